#pragma once

// Dense hourglass autoencoder, pretrained offline on the world's images and
// frozen afterwards. Its latent layer is the space in which goals, forward
// model predictions and prediction errors are expressed.

#include <filesystem>
#include <span>
#include <vector>

#include "curio/nn.hpp"
#include "curio/world.hpp"

namespace curio::encoder {

using LatentCode = nn::Vector;

struct Autoencoder {
    nn::Network encoder;
    nn::Network decoder;
    int img_w = 0;
    int img_h = 0;
    int latent_dim = 0;
    // Per-dimension statistics of the raw codes over the pretraining images.
    nn::Vector code_mean;
    nn::Vector code_std;

    /// Maps a raw code to zero mean / unit variance per dimension.
    LatentCode standardize(const LatentCode& raw) const;
};

/// (img_w * img_h) -> hidden... -> latent_dim with relu hidden layers and a
/// linear latent layer; the decoder mirrors it and ends in a sigmoid.
Autoencoder build_autoencoder(int img_w, int img_h, int latent_dim, std::span<const int> hidden, Rng& rng);
Autoencoder build_autoencoder(int img_w, int img_h, int latent_dim, Rng& rng);

struct PretrainConfig {
    int epochs = 50;
    std::size_t minibatch = 32;
    nn::Adam adam{};
};

nn::Vector to_vector(const world::Image& img);
nn::Matrix to_matrix(std::span<const world::Image> images);

/// Trains decode(encode(x)) ~ x with Adam and refreshes the code statistics.
/// Returns the mean training loss of each epoch.
std::vector<double> pretrain(Autoencoder& ae, std::span<const world::Image> images, const PretrainConfig& cfg,
                             Rng& rng);

/// Recomputes code_mean/code_std from `images` (std floored at 1e-6).
void fit_code_statistics(Autoencoder& ae, std::span<const world::Image> images);

/// Raw latent code.
LatentCode encode(const Autoencoder& ae, const world::Image& img);
/// Latent code standardized with the stored statistics.
LatentCode encode_standardized(const Autoencoder& ae, const world::Image& img);
world::Image decode(const Autoencoder& ae, const LatentCode& code);

/// Mean per-pixel squared reconstruction error.
double reconstruction_mse(const Autoencoder& ae, std::span<const world::Image> images);

/// Writes <stem>.encoder.nn, <stem>.decoder.nn and the key-value header <stem>.txt.
void save_autoencoder(const Autoencoder& ae, const std::filesystem::path& stem);
Autoencoder load_autoencoder(const std::filesystem::path& stem);

}  // namespace curio::encoder
