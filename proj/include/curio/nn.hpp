#pragma once

// Small dense feed-forward network engine: forward/backward passes, SGD with
// momentum and Adam, minibatch epochs, finite-difference gradient checking and
// a binary weight format.
//
// Batches are column-major: a batch of n samples of width d is a d x n matrix.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curio/rng.hpp"

namespace curio::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class NnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Activation : std::uint8_t { tanh = 0, relu = 1, sigmoid = 2, linear = 3 };

const char* to_string(Activation a);

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::linear;
};

struct DenseLayer {
    Matrix weights;  // out_dim x in_dim
    Vector biases;   // out_dim
    Activation activation = Activation::linear;

    std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }
};

struct Network {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const;
    std::size_t out_dim() const;
    std::size_t parameter_count() const;
    std::vector<LayerSpec> specs() const;
    bool all_finite() const;
};

/// Builds a network with Glorot-uniform weights and zero biases.
/// Throws NnError when consecutive layer dimensions do not chain.
Network init_network(std::span<const LayerSpec> spec, Rng& rng);

/// Appends the layers of `tail` after those of `head`.
Network concatenate(const Network& head, const Network& tail);

/// Everything backward() needs from a forward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> activations;  // output of each layer
    std::vector<LayerSpec> shape;     // network shape at forward time
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static Gradients zeros_like(const Network& net);
    bool all_finite() const;
    double max_abs() const;
};

Matrix forward(const Network& net, const Matrix& inputs, ForwardCache* cache = nullptr);
Vector forward(const Network& net, const Vector& input, ForwardCache* cache = nullptr);

/// Mean over all entries of the squared differences.
double mse_loss(const Matrix& pred, const Matrix& target);
double mse_loss(const Vector& pred, const Vector& target);
/// d(mse_loss)/d(pred).
Matrix mse_grad(const Matrix& pred, const Matrix& target);

/// Exact gradients of a scalar loss w.r.t. every parameter, given dLoss/dOutput
/// for the batch the cache was computed on. Gradients are summed over columns.
Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& loss_grad);

struct SgdMomentum {
    double learning_rate = 0.0014;
    double momentum = 0.8;
    double decay = 0.0;  // lr / (1 + decay * steps)
};

struct Adam {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    enum class Kind { sgd_momentum, adam };

    Kind kind = Kind::sgd_momentum;
    SgdMomentum sgd;
    Adam adam;
    Gradients first;   // velocity (sgd) or first moment (adam)
    Gradients second;  // second moment (adam only)
    std::uint64_t steps = 0;
    std::uint64_t skipped_steps = 0;

    static OptimizerState make_sgd(const Network& net, SgdMomentum hp);
    static OptimizerState make_adam(const Network& net, Adam hp);
};

/// Applies one update. Returns false and leaves `net` untouched when `grads`
/// contains a non-finite value (the skip is counted in state.skipped_steps).
bool optimizer_step(Network& net, const Gradients& grads, OptimizerState& state);

struct TrainingBatch {
    Matrix inputs;   // in_dim x n
    Matrix targets;  // out_dim x n

    std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
};

/// One shuffled pass over `batch` in minibatches of `minibatch_size` (the last
/// one may be short), one optimizer step per minibatch. Returns the mean of the
/// pre-update minibatch losses.
double fit_epoch(Network& net, const TrainingBatch& batch, OptimizerState& state,
                 std::size_t minibatch_size, Rng& rng);

/// Maximum relative difference between backward() and central finite
/// differences of the MSE loss over every parameter. The relative error of a
/// component is |a - n| / max(|a| + |n|, 1e-5), so parameters whose gradient is
/// numerically zero are compared in absolute terms.
double gradcheck(const Network& net, const Vector& input, const Vector& target, double h);

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);

}  // namespace curio::nn
