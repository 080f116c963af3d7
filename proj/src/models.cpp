#include "curio/models.hpp"

#include <algorithm>

namespace curio::models {

namespace {

constexpr auto kTanh = nn::Activation::tanh;

void check_latent(const ModelConfig& cfg) {
    if (cfg.latent_dim <= 0 || cfg.hidden_small <= 0 || cfg.hidden_large <= 0)
        throw nn::NnError("model dimensions must be positive");
}

std::size_t count_rows(std::span<const SensorimotorSample> a, std::span<const SensorimotorSample> b) {
    const std::size_t n = a.size() + b.size();
    if (n == 0) throw nn::NnError("online_fit: no samples to train on");
    return n;
}

template <typename Fill>
nn::TrainingBatch make_batch(std::span<const SensorimotorSample> buffer, std::span<const SensorimotorSample> memory,
                             Eigen::Index in_dim, Eigen::Index out_dim, Fill fill) {
    const auto n = static_cast<Eigen::Index>(count_rows(buffer, memory));
    nn::TrainingBatch batch{nn::Matrix(in_dim, n), nn::Matrix(out_dim, n)};
    Eigen::Index col = 0;
    for (auto span : {buffer, memory})
        for (const auto& s : span) fill(s, batch, col++);
    return batch;
}

double fit(nn::Network& net, nn::OptimizerState& opt, const nn::TrainingBatch& batch, const ModelConfig& cfg,
           Rng& rng) {
    double loss = 0.0;
    for (int e = 0; e < cfg.epochs_per_fit; ++e) loss = nn::fit_epoch(net, batch, opt, cfg.minibatch, rng);
    return loss;
}

}  // namespace

std::vector<nn::LayerSpec> forward_architecture(const ModelConfig& cfg) {
    check_latent(cfg);
    const auto small = static_cast<std::size_t>(cfg.hidden_small);
    const auto large = static_cast<std::size_t>(cfg.hidden_large);
    const auto latent = static_cast<std::size_t>(cfg.latent_dim);
    return {{2, small, kTanh}, {small, large, kTanh}, {large, large, kTanh}, {large, latent, kTanh}};
}

std::vector<nn::LayerSpec> inverse_architecture(const ModelConfig& cfg) {
    check_latent(cfg);
    const auto large = static_cast<std::size_t>(cfg.hidden_large);
    const auto latent = static_cast<std::size_t>(cfg.latent_dim);
    return {{latent, latent, kTanh}, {latent, large, kTanh}, {large, large, kTanh}, {large, 2, kTanh}};
}

ForwardModel make_forward_model(const ModelConfig& cfg, Rng& rng) {
    ForwardModel fm;
    fm.net = nn::init_network(forward_architecture(cfg), rng);
    fm.opt = nn::OptimizerState::make_sgd(fm.net, cfg.sgd);
    return fm;
}

InverseModel make_inverse_model(const ModelConfig& cfg, Rng& rng) {
    InverseModel im;
    im.net = nn::init_network(inverse_architecture(cfg), rng);
    im.opt = nn::OptimizerState::make_sgd(im.net, cfg.sgd);
    return im;
}

nn::Vector motor_to_net(MotorCommand m) {
    nn::Vector v(2);
    v << 2.0 * m.x - 1.0, 2.0 * m.y - 1.0;
    return v;
}

MotorCommand net_to_motor(const nn::Vector& v) {
    return world::clamp_unit({(v(0) + 1.0) / 2.0, (v(1) + 1.0) / 2.0});
}

LatentCode predict_forward(const ForwardModel& fm, MotorCommand motor) {
    return nn::forward(fm.net, motor_to_net(motor));
}

MotorCommand predict_inverse(const InverseModel& im, const LatentCode& goal) {
    if (static_cast<std::size_t>(goal.size()) != im.net.in_dim())
        throw nn::NnError("predict_inverse: code length " + std::to_string(goal.size()) + " != " +
                          std::to_string(im.net.in_dim()));
    return net_to_motor(nn::forward(im.net, goal));
}

double online_fit(ForwardModel& fm, std::span<const SensorimotorSample> buffer,
                  std::span<const SensorimotorSample> memory_samples, const ModelConfig& cfg, Rng& rng) {
    const auto batch = make_batch(buffer, memory_samples, 2, static_cast<Eigen::Index>(fm.net.out_dim()),
                                  [](const SensorimotorSample& s, nn::TrainingBatch& b, Eigen::Index c) {
                                      b.inputs.col(c) = motor_to_net(s.motor);
                                      b.targets.col(c) = s.code;
                                  });
    return fit(fm.net, fm.opt, batch, cfg, rng);
}

double online_fit(InverseModel& im, std::span<const SensorimotorSample> buffer,
                  std::span<const SensorimotorSample> memory_samples, const ModelConfig& cfg, Rng& rng) {
    const auto batch = make_batch(buffer, memory_samples, static_cast<Eigen::Index>(im.net.in_dim()), 2,
                                  [](const SensorimotorSample& s, nn::TrainingBatch& b, Eigen::Index c) {
                                      b.inputs.col(c) = s.code;
                                      b.targets.col(c) = motor_to_net(s.motor);
                                  });
    return fit(im.net, im.opt, batch, cfg, rng);
}

EvalResult evaluate_mse(const ForwardModel& fm, const InverseModel& im, std::span<const TestPoint> testset) {
    if (testset.empty()) throw nn::NnError("evaluate_mse: empty test set");
    EvalResult r;
    for (const auto& p : testset) {
        r.fwd_mse += nn::mse_loss(predict_forward(fm, p.motor), p.code);
        const MotorCommand pred = predict_inverse(im, p.code);
        const double dx = pred.x - p.motor.x, dy = pred.y - p.motor.y;
        r.inv_mse += (dx * dx + dy * dy) / 2.0;
    }
    r.fwd_mse /= static_cast<double>(testset.size());
    r.inv_mse /= static_cast<double>(testset.size());
    return r;
}

}  // namespace curio::models
