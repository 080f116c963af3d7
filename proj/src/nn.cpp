#include "curio/nn.hpp"

#include "curio/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace curio::nn {

namespace {

constexpr char kWeightMagic[8] = {'C', 'U', 'R', 'I', 'O', 'N', 'N', '1'};

void apply_activation(Activation a, Matrix& z) {
    switch (a) {
        case Activation::tanh: z = z.array().tanh(); break;
        case Activation::relu: z = z.array().max(0.0); break;
        case Activation::sigmoid: z = (1.0 + (-z.array()).exp()).inverse(); break;
        case Activation::linear: break;
    }
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::tanh: return std::tanh(z);
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::linear: return z;
    }
    return z;
}

// Derivative expressed through the activation's output.
Matrix activation_derivative(Activation a, const Matrix& out) {
    switch (a) {
        case Activation::tanh: return (1.0 - out.array().square()).matrix();
        case Activation::relu: return (out.array() > 0.0).cast<double>().matrix();
        case Activation::sigmoid: return (out.array() * (1.0 - out.array())).matrix();
        case Activation::linear: return Matrix::Ones(out.rows(), out.cols());
    }
    return Matrix::Ones(out.rows(), out.cols());
}

Activation activation_from_code(std::uint8_t code) {
    if (code > 3) throw NnError("weight file: unknown activation code " + std::to_string(code));
    return static_cast<Activation>(code);
}

bool same_shape(const std::vector<LayerSpec>& a, const std::vector<LayerSpec>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].in_dim != b[i].in_dim || a[i].out_dim != b[i].out_dim ||
            a[i].activation != b[i].activation)
            return false;
    }
    return true;
}

}  // namespace

const char* to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::linear: return "linear";
    }
    return "?";
}

std::size_t Network::in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
std::size_t Network::out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
    return n;
}

std::vector<LayerSpec> Network::specs() const {
    std::vector<LayerSpec> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back({l.in_dim(), l.out_dim(), l.activation});
    return out;
}

bool Network::all_finite() const {
    return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
        return l.weights.allFinite() && l.biases.allFinite();
    });
}

Network init_network(std::span<const LayerSpec> spec, Rng& rng) {
    if (spec.empty()) throw NnError("network needs at least one layer");
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec[i].in_dim == 0 || spec[i].out_dim == 0)
            throw NnError("layer " + std::to_string(i) + " has a zero dimension");
        if (i > 0 && spec[i - 1].out_dim != spec[i].in_dim)
            throw NnError("layer " + std::to_string(i) + " expects " + std::to_string(spec[i].in_dim) +
                          " inputs but previous layer produces " + std::to_string(spec[i - 1].out_dim));
    }
    Network net;
    net.layers.reserve(spec.size());
    for (const auto& s : spec) {
        const double limit = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
        DenseLayer layer;
        layer.activation = s.activation;
        layer.weights.resize(static_cast<Eigen::Index>(s.out_dim), static_cast<Eigen::Index>(s.in_dim));
        // Fill row-major so the draw order matches the on-disk layout.
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                layer.weights(r, c) = uniform(rng, -limit, limit);
        layer.biases = Vector::Zero(static_cast<Eigen::Index>(s.out_dim));
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Network concatenate(const Network& head, const Network& tail) {
    if (!head.layers.empty() && !tail.layers.empty() && head.out_dim() != tail.in_dim())
        throw NnError("cannot chain networks: " + std::to_string(head.out_dim()) + " != " +
                      std::to_string(tail.in_dim()));
    Network out = head;
    out.layers.insert(out.layers.end(), tail.layers.begin(), tail.layers.end());
    return out;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.layers) {
        g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        g.biases.push_back(Vector::Zero(l.biases.size()));
    }
    return g;
}

bool Gradients::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& w : weights)
        if (w.size()) m = std::max(m, w.cwiseAbs().maxCoeff());
    for (const auto& b : biases)
        if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
}

Matrix forward(const Network& net, const Matrix& inputs, ForwardCache* cache) {
    if (net.layers.empty()) throw NnError("forward on an empty network");
    if (static_cast<std::size_t>(inputs.rows()) != net.in_dim())
        throw NnError("forward: input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                      std::to_string(net.in_dim()));
    if (cache) {
        cache->inputs.clear();
        cache->activations.clear();
        cache->shape = net.specs();
    }
    Matrix x = inputs;
    for (const auto& layer : net.layers) {
        Matrix z = layer.weights * x;
        z.colwise() += layer.biases;
        apply_activation(layer.activation, z);
        if (cache) cache->inputs.push_back(std::move(x));
        x = std::move(z);
        if (cache) cache->activations.push_back(x);
    }
    return x;
}

Vector forward(const Network& net, const Vector& input, ForwardCache* cache) {
    Matrix in = input;
    Matrix out = forward(net, in, cache);
    return out.col(0);
}

double mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw NnError("mse_loss: shape mismatch");
    if (pred.size() == 0) throw NnError("mse_loss: empty input");
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double mse_loss(const Vector& pred, const Vector& target) {
    if (pred.size() != target.size())
        throw NnError("mse_loss: length " + std::to_string(pred.size()) + " vs " + std::to_string(target.size()));
    return mse_loss(Matrix(pred), Matrix(target));
}

Matrix mse_grad(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw NnError("mse_grad: shape mismatch");
    return 2.0 * (pred - target) / static_cast<double>(pred.size());
}

namespace {

// Writes into `g`, reusing its storage when the shapes already match.
void backward_into(const Network& net, const ForwardCache& cache, const Matrix& loss_grad, Gradients& g) {
    const std::size_t n_layers = net.layers.size();
    if (cache.activations.size() != n_layers || cache.inputs.size() != n_layers ||
        !same_shape(cache.shape, net.specs()))
        throw NnError("backward: cache does not match the network");
    const Matrix& out = cache.activations.back();
    if (loss_grad.rows() != out.rows() || loss_grad.cols() != out.cols())
        throw NnError("backward: loss gradient shape does not match the cached output");

    g.weights.resize(n_layers);
    g.biases.resize(n_layers);
    Matrix delta = loss_grad.cwiseProduct(activation_derivative(net.layers.back().activation, out));
    for (std::size_t k = n_layers; k-- > 0;) {
        g.weights[k].noalias() = delta * cache.inputs[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        if (k > 0) {
            Matrix upstream = net.layers[k].weights.transpose() * delta;
            delta = upstream.cwiseProduct(
                activation_derivative(net.layers[k - 1].activation, cache.activations[k - 1]));
        }
    }
}

}  // namespace

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& loss_grad) {
    Gradients g;
    backward_into(net, cache, loss_grad, g);
    return g;
}

OptimizerState OptimizerState::make_sgd(const Network& net, SgdMomentum hp) {
    OptimizerState s;
    s.kind = Kind::sgd_momentum;
    s.sgd = hp;
    s.first = Gradients::zeros_like(net);
    return s;
}

OptimizerState OptimizerState::make_adam(const Network& net, Adam hp) {
    OptimizerState s;
    s.kind = Kind::adam;
    s.adam = hp;
    s.first = Gradients::zeros_like(net);
    s.second = Gradients::zeros_like(net);
    return s;
}

bool optimizer_step(Network& net, const Gradients& grads, OptimizerState& state) {
    const std::size_t n = net.layers.size();
    if (grads.weights.size() != n || grads.biases.size() != n || state.first.weights.size() != n)
        throw NnError("optimizer_step: gradient/state layout does not match the network");
    for (std::size_t k = 0; k < n; ++k) {
        const auto& l = net.layers[k];
        if (grads.weights[k].rows() != l.weights.rows() || grads.weights[k].cols() != l.weights.cols() ||
            grads.biases[k].size() != l.biases.size())
            throw NnError("optimizer_step: gradient shape mismatch at layer " + std::to_string(k));
    }
    if (!grads.all_finite()) {
        ++state.skipped_steps;
        return false;
    }

    if (state.kind == OptimizerState::Kind::sgd_momentum) {
        const auto& hp = state.sgd;
        const double lr = hp.learning_rate / (1.0 + hp.decay * static_cast<double>(state.steps));
        for (std::size_t k = 0; k < n; ++k) {
            auto& vw = state.first.weights[k];
            auto& vb = state.first.biases[k];
            vw = hp.momentum * vw - lr * grads.weights[k];
            vb = hp.momentum * vb - lr * grads.biases[k];
            net.layers[k].weights += vw;
            net.layers[k].biases += vb;
        }
    } else {
        const auto& hp = state.adam;
        const double t = static_cast<double>(state.steps + 1);
        const double c1 = 1.0 - std::pow(hp.beta1, t);
        const double c2 = 1.0 - std::pow(hp.beta2, t);
        auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = hp.beta1 * m + (1.0 - hp.beta1) * g;
            v = hp.beta2 * v + (1.0 - hp.beta2) * g.cwiseProduct(g);
            param.array() -= hp.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + hp.epsilon);
        };
        for (std::size_t k = 0; k < n; ++k) {
            update(net.layers[k].weights, state.first.weights[k], state.second.weights[k], grads.weights[k]);
            update(net.layers[k].biases, state.first.biases[k], state.second.biases[k], grads.biases[k]);
        }
    }
    ++state.steps;
    return true;
}

double fit_epoch(Network& net, const TrainingBatch& batch, OptimizerState& state,
                 std::size_t minibatch_size, Rng& rng) {
    if (minibatch_size == 0) throw NnError("fit_epoch: minibatch size must be >= 1");
    const std::size_t n = batch.size();
    if (n == 0) throw NnError("fit_epoch: empty batch");
    if (batch.targets.cols() != batch.inputs.cols())
        throw NnError("fit_epoch: input/target row counts differ");
    if (static_cast<std::size_t>(batch.inputs.rows()) != net.in_dim() ||
        static_cast<std::size_t>(batch.targets.rows()) != net.out_dim())
        throw NnError("fit_epoch: batch widths do not match the network");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    double loss_sum = 0.0;
    std::size_t minibatches = 0;
    ForwardCache cache;
    Gradients grads;
    for (std::size_t start = 0; start < n; start += minibatch_size) {
        const std::size_t m = std::min(minibatch_size, n - start);
        Matrix x(batch.inputs.rows(), static_cast<Eigen::Index>(m));
        Matrix t(batch.targets.rows(), static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) {
            x.col(static_cast<Eigen::Index>(j)) = batch.inputs.col(order[start + j]);
            t.col(static_cast<Eigen::Index>(j)) = batch.targets.col(order[start + j]);
        }
        Matrix pred = forward(net, x, &cache);
        loss_sum += mse_loss(pred, t);
        ++minibatches;
        backward_into(net, cache, mse_grad(pred, t), grads);
        optimizer_step(net, grads, state);
    }
    return loss_sum / static_cast<double>(minibatches);
}

double gradcheck(const Network& net, const Vector& input, const Vector& target, double h) {
    if (h <= 0.0) throw NnError("gradcheck: step must be positive");
    ForwardCache cache;
    const Matrix out = forward(net, Matrix(input), &cache);
    const Gradients analytic = backward(net, cache, mse_grad(out, Matrix(target)));

    const std::size_t n_layers = net.layers.size();
    std::vector<Vector> pre(n_layers);
    for (std::size_t k = 0; k < n_layers; ++k)
        pre[k] = net.layers[k].weights * cache.inputs[k].col(0) + net.layers[k].biases;

    // Loss after replacing pre-activation `i` of layer `k` by `z_new`. Only the
    // layers downstream of k are re-evaluated.
    auto loss_with = [&](std::size_t k, Eigen::Index i, double z_new) {
        const Vector& a = cache.activations[k].col(0);
        const double da = activate(net.layers[k].activation, z_new) - a(i);
        Vector x;
        if (k + 1 == n_layers) {
            x = a;
            x(i) += da;
        } else {
            Matrix z = pre[k + 1] + net.layers[k + 1].weights.col(i) * da;
            apply_activation(net.layers[k + 1].activation, z);
            x = z.col(0);
            for (std::size_t j = k + 2; j < n_layers; ++j) {
                Matrix zj = net.layers[j].weights * x + net.layers[j].biases;
                apply_activation(net.layers[j].activation, zj);
                x = zj.col(0);
            }
        }
        return (x - target).squaredNorm() / static_cast<double>(x.size());
    };

    auto rel_error = [](double a, double n) {
        return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-5);
    };

    double worst = 0.0;
    for (std::size_t k = 0; k < n_layers; ++k) {
        const auto& layer = net.layers[k];
        const Vector& x = cache.inputs[k].col(0);
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
                const double step = h * x(j);
                const double numeric =
                    (loss_with(k, i, pre[k](i) + step) - loss_with(k, i, pre[k](i) - step)) / (2.0 * h);
                worst = std::max(worst, rel_error(analytic.weights[k](i, j), numeric));
            }
            const double numeric = (loss_with(k, i, pre[k](i) + h) - loss_with(k, i, pre[k](i) - h)) / (2.0 * h);
            worst = std::max(worst, rel_error(analytic.biases[k](i), numeric));
        }
    }
    return worst;
}

void save_weights(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw NnError("cannot open " + path.string() + " for writing");
    out.write(kWeightMagic, sizeof(kWeightMagic));
    io::write_u32(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        io::write_u32(out, static_cast<std::uint32_t>(l.in_dim()));
        io::write_u32(out, static_cast<std::uint32_t>(l.out_dim()));
        io::write_u8(out, static_cast<std::uint8_t>(l.activation));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) io::write_f64(out, l.weights(r, c));
        for (Eigen::Index r = 0; r < l.biases.size(); ++r) io::write_f64(out, l.biases(r));
    }
    if (!out) throw NnError("write failed for " + path.string());
}

Network load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NnError("cannot open " + path.string());
    try {
        char magic[sizeof(kWeightMagic)];
        io::read_exact(in, magic, sizeof(magic));
        if (!std::equal(std::begin(magic), std::end(magic), std::begin(kWeightMagic)))
            throw NnError("bad magic");
        const std::uint32_t count = io::read_u32(in);
        if (count == 0 || count > 1024) throw NnError("implausible layer count " + std::to_string(count));
        Network net;
        for (std::uint32_t k = 0; k < count; ++k) {
            const std::uint32_t in_dim = io::read_u32(in);
            const std::uint32_t out_dim = io::read_u32(in);
            const Activation act = activation_from_code(io::read_u8(in));
            if (in_dim == 0 || out_dim == 0 || in_dim > (1u << 20) || out_dim > (1u << 20))
                throw NnError("implausible layer shape");
            if (k > 0 && net.layers.back().out_dim() != in_dim)
                throw NnError("layer " + std::to_string(k) + " does not chain with its predecessor");
            DenseLayer l;
            l.activation = act;
            l.weights.resize(out_dim, in_dim);
            l.biases.resize(out_dim);
            for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = io::read_f64(in);
            for (Eigen::Index r = 0; r < l.biases.size(); ++r) l.biases(r) = io::read_f64(in);
            net.layers.push_back(std::move(l));
        }
        if (in.peek() != std::char_traits<char>::eof()) throw NnError("trailing bytes");
        if (!net.all_finite()) throw NnError("non-finite parameter");
        return net;
    } catch (const io::IoError& e) {
        throw NnError("weight file " + path.string() + ": " + e.what());
    } catch (const NnError& e) {
        throw NnError("weight file " + path.string() + ": " + e.what());
    }
}

}  // namespace curio::nn
