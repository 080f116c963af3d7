#pragma once

// Online-trained forward (motor -> latent) and inverse (latent -> motor)
// models. Motor commands live in [0,1]^2 and are mapped affinely onto the
// [-1,1] range of the tanh networks; latent codes are the standardized codes
// produced by the autoencoder.

#include <span>
#include <utility>
#include <vector>

#include "curio/encoder.hpp"
#include "curio/nn.hpp"
#include "curio/world.hpp"

namespace curio::models {

using encoder::LatentCode;
using world::MotorCommand;

struct SensorimotorSample {
    MotorCommand motor;
    LatentCode code;
};

struct ForwardModel {
    nn::Network net;
    nn::OptimizerState opt;
};

struct InverseModel {
    nn::Network net;
    nn::OptimizerState opt;
};

struct ModelConfig {
    int latent_dim = 16;
    int hidden_small = 32;   // first forward layer; inverse uses latent_dim here
    int hidden_large = 320;  // the two wide layers
    nn::SgdMomentum sgd{};
    std::size_t minibatch = 16;
    int epochs_per_fit = 1;
};

/// 2 -> 32 -> 320 -> 320 -> L, tanh throughout.
std::vector<nn::LayerSpec> forward_architecture(const ModelConfig& cfg);
/// L -> L -> 320 -> 320 -> 2, tanh throughout.
std::vector<nn::LayerSpec> inverse_architecture(const ModelConfig& cfg);

ForwardModel make_forward_model(const ModelConfig& cfg, Rng& rng);
InverseModel make_inverse_model(const ModelConfig& cfg, Rng& rng);

nn::Vector motor_to_net(MotorCommand m);
MotorCommand net_to_motor(const nn::Vector& v);

LatentCode predict_forward(const ForwardModel& fm, MotorCommand motor);
/// Always returns a command inside [0,1]^2.
MotorCommand predict_inverse(const InverseModel& im, const LatentCode& goal);

/// Trains on buffer + memory_samples for cfg.epochs_per_fit epochs; returns the
/// mean loss of the last epoch.
double online_fit(ForwardModel& fm, std::span<const SensorimotorSample> buffer,
                  std::span<const SensorimotorSample> memory_samples, const ModelConfig& cfg, Rng& rng);
double online_fit(InverseModel& im, std::span<const SensorimotorSample> buffer,
                  std::span<const SensorimotorSample> memory_samples, const ModelConfig& cfg, Rng& rng);

struct TestPoint {
    MotorCommand motor;  // ground-truth position
    LatentCode code;     // standardized code of the image seen there
};

struct EvalResult {
    double fwd_mse = 0.0;
    double inv_mse = 0.0;
};

EvalResult evaluate_mse(const ForwardModel& fm, const InverseModel& im, std::span<const TestPoint> testset);

}  // namespace curio::models
