#include "curio/encoder.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace curio::encoder {

namespace {

constexpr int kDefaultHidden[] = {128, 64};

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

std::string join(const nn::Vector& v) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    return os.str();
}

nn::Vector split_doubles(const std::string& s, int expected) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (static_cast<int>(vals.size()) != expected)
        throw nn::NnError("encoder header: expected " + std::to_string(expected) + " values");
    return Eigen::Map<nn::Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

LatentCode Autoencoder::standardize(const LatentCode& raw) const {
    return ((raw - code_mean).array() / code_std.array()).matrix();
}

Autoencoder build_autoencoder(int img_w, int img_h, int latent_dim, std::span<const int> hidden, Rng& rng) {
    if (img_w <= 0 || img_h <= 0 || latent_dim <= 0) throw nn::NnError("autoencoder dimensions must be positive");
    for (int h : hidden)
        if (h <= 0) throw nn::NnError("autoencoder hidden widths must be positive");
    const std::size_t pixels = static_cast<std::size_t>(img_w) * static_cast<std::size_t>(img_h);

    std::vector<std::size_t> widths{pixels};
    for (int h : hidden) widths.push_back(static_cast<std::size_t>(h));
    widths.push_back(static_cast<std::size_t>(latent_dim));

    std::vector<nn::LayerSpec> enc, dec;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const bool last = i + 2 == widths.size();
        enc.push_back({widths[i], widths[i + 1], last ? nn::Activation::linear : nn::Activation::relu});
    }
    for (std::size_t i = widths.size() - 1; i > 0; --i) {
        const bool last = i == 1;
        dec.push_back({widths[i], widths[i - 1], last ? nn::Activation::sigmoid : nn::Activation::relu});
    }

    Autoencoder ae;
    ae.img_w = img_w;
    ae.img_h = img_h;
    ae.latent_dim = latent_dim;
    ae.encoder = nn::init_network(enc, rng);
    ae.decoder = nn::init_network(dec, rng);
    ae.code_mean = nn::Vector::Zero(latent_dim);
    ae.code_std = nn::Vector::Ones(latent_dim);
    return ae;
}

Autoencoder build_autoencoder(int img_w, int img_h, int latent_dim, Rng& rng) {
    return build_autoencoder(img_w, img_h, latent_dim, kDefaultHidden, rng);
}

nn::Vector to_vector(const world::Image& img) {
    nn::Vector v(static_cast<Eigen::Index>(img.pixels.size()));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) v(static_cast<Eigen::Index>(i)) = img.pixels[i];
    return v;
}

nn::Matrix to_matrix(std::span<const world::Image> images) {
    if (images.empty()) return {};
    nn::Matrix m(static_cast<Eigen::Index>(images.front().pixels.size()), static_cast<Eigen::Index>(images.size()));
    for (std::size_t i = 0; i < images.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = to_vector(images[i]);
    return m;
}

std::vector<double> pretrain(Autoencoder& ae, std::span<const world::Image> images, const PretrainConfig& cfg,
                             Rng& rng) {
    if (images.empty()) throw nn::NnError("pretrain: no images");
    for (const auto& img : images)
        if (img.width != ae.img_w || img.height != ae.img_h)
            throw nn::NnError("pretrain: image dimensions do not match the autoencoder");

    std::vector<double> history;
    if (cfg.epochs > 0) {
        nn::Network joint = nn::concatenate(ae.encoder, ae.decoder);
        auto opt = nn::OptimizerState::make_adam(joint, cfg.adam);
        nn::TrainingBatch batch{to_matrix(images), {}};
        batch.targets = batch.inputs;
        for (int e = 0; e < cfg.epochs; ++e) history.push_back(nn::fit_epoch(joint, batch, opt, cfg.minibatch, rng));
        const auto split = ae.encoder.layers.size();
        ae.encoder.layers.assign(joint.layers.begin(), joint.layers.begin() + static_cast<std::ptrdiff_t>(split));
        ae.decoder.layers.assign(joint.layers.begin() + static_cast<std::ptrdiff_t>(split), joint.layers.end());
    }
    fit_code_statistics(ae, images);
    return history;
}

void fit_code_statistics(Autoencoder& ae, std::span<const world::Image> images) {
    if (images.empty()) throw nn::NnError("code statistics need at least one image");
    const nn::Matrix codes = nn::forward(ae.encoder, to_matrix(images));
    ae.code_mean = codes.rowwise().mean();
    const nn::Matrix centred = codes.colwise() - ae.code_mean;
    ae.code_std = (centred.array().square().rowwise().sum() / static_cast<double>(codes.cols())).sqrt().max(1e-6);
}

LatentCode encode(const Autoencoder& ae, const world::Image& img) {
    if (img.width != ae.img_w || img.height != ae.img_h)
        throw nn::NnError("encode: image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                          ", encoder expects " + std::to_string(ae.img_w) + "x" + std::to_string(ae.img_h));
    return nn::forward(ae.encoder, to_vector(img));
}

LatentCode encode_standardized(const Autoencoder& ae, const world::Image& img) {
    return ae.standardize(encode(ae, img));
}

world::Image decode(const Autoencoder& ae, const LatentCode& code) {
    if (code.size() != ae.latent_dim)
        throw nn::NnError("decode: code length " + std::to_string(code.size()) + " != latent_dim " +
                          std::to_string(ae.latent_dim));
    const nn::Vector out = nn::forward(ae.decoder, code);
    world::Image img{ae.img_w, ae.img_h, std::vector<float>(static_cast<std::size_t>(out.size()))};
    for (Eigen::Index i = 0; i < out.size(); ++i) img.pixels[static_cast<std::size_t>(i)] = static_cast<float>(out(i));
    return img;
}

double reconstruction_mse(const Autoencoder& ae, std::span<const world::Image> images) {
    if (images.empty()) throw nn::NnError("reconstruction_mse: no images");
    const nn::Matrix x = to_matrix(images);
    const nn::Matrix y = nn::forward(ae.decoder, nn::forward(ae.encoder, x));
    return nn::mse_loss(y, x);
}

void save_autoencoder(const Autoencoder& ae, const std::filesystem::path& stem) {
    nn::save_weights(ae.encoder, with_suffix(stem, ".encoder.nn"));
    nn::save_weights(ae.decoder, with_suffix(stem, ".decoder.nn"));
    std::ofstream out(with_suffix(stem, ".txt"), std::ios::trunc);
    if (!out) throw nn::NnError("cannot write encoder header for " + stem.string());
    out << "img_w = " << ae.img_w << "\n"
        << "img_h = " << ae.img_h << "\n"
        << "latent_dim = " << ae.latent_dim << "\n"
        << "code_mean = " << join(ae.code_mean) << "\n"
        << "code_std = " << join(ae.code_std) << "\n";
}

Autoencoder load_autoencoder(const std::filesystem::path& stem) {
    std::ifstream in(with_suffix(stem, ".txt"));
    if (!in) throw nn::NnError("cannot open encoder header " + with_suffix(stem, ".txt").string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* key : {"img_w", "img_h", "latent_dim", "code_mean", "code_std"})
        if (!kv.count(key)) throw nn::NnError(std::string("encoder header is missing '") + key + "'");

    Autoencoder ae;
    ae.img_w = std::stoi(kv["img_w"]);
    ae.img_h = std::stoi(kv["img_h"]);
    ae.latent_dim = std::stoi(kv["latent_dim"]);
    ae.code_mean = split_doubles(kv["code_mean"], ae.latent_dim);
    ae.code_std = split_doubles(kv["code_std"], ae.latent_dim);
    ae.encoder = nn::load_weights(with_suffix(stem, ".encoder.nn"));
    ae.decoder = nn::load_weights(with_suffix(stem, ".decoder.nn"));
    const auto pixels = static_cast<std::size_t>(ae.img_w * ae.img_h);
    if (ae.encoder.in_dim() != pixels || ae.encoder.out_dim() != static_cast<std::size_t>(ae.latent_dim) ||
        ae.decoder.in_dim() != static_cast<std::size_t>(ae.latent_dim) || ae.decoder.out_dim() != pixels)
        throw nn::NnError("encoder/decoder shapes do not match the header");
    return ae;
}

}  // namespace curio::encoder
