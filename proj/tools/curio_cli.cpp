// curio: command-line harness for pretraining, single runs, experiment grids,
// reports and gradient checks.

#include <CLI11.hpp>

#include "curio/agent.hpp"
#include "curio/config.hpp"
#include "curio/csv.hpp"
#include "curio/encoder.hpp"
#include "curio/experiment.hpp"
#include "curio/models.hpp"
#include "curio/nn.hpp"
#include "curio/world.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace curio;

namespace {

struct CommonOptions {
    std::string config_path;
};

agent::RunConfig load_run_config(const std::string& path, config::KeyValues* grid_keys = nullptr) {
    agent::RunConfig cfg;
    if (!path.empty()) {
        const auto kv = config::KeyValues::load(path);
        config::apply(cfg, kv, {"grid."});
        if (grid_keys) *grid_keys = kv;
    }
    cfg.models.latent_dim = cfg.latent_dim;
    return cfg;
}

// Loads world/encoder from files when given, otherwise builds them from cfg.
agent::Environment load_environment(const agent::RunConfig& cfg, const std::string& world_path,
                                    const std::string& encoder_stem) {
    if (world_path.empty() && encoder_stem.empty()) return agent::prepare_environment(cfg);
    agent::Environment env;
    if (!world_path.empty()) {
        env.world = std::make_shared<world::WorldDataset>(world::load_dataset(world_path));
    } else {
        Rng rng(derive_seed(cfg.world_seed, 0x574f524cULL));
        env.world = std::make_shared<world::WorldDataset>(world::generate_world(cfg.world, rng));
    }
    if (encoder_stem.empty()) throw std::invalid_argument("--world requires --encoder (pretrain it first)");
    env.autoencoder = std::make_shared<encoder::Autoencoder>(encoder::load_autoencoder(encoder_stem));
    return env;
}

void print_duration(const char* what, std::chrono::steady_clock::time_point start) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << what << " took " << s << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curio: curiosity-driven goal babbling with episodic memory"};
    app.require_subcommand(1);

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "generate the world and pretrain the autoencoder");
    std::string pre_config, pre_out = "pretrained";
    std::optional<std::uint64_t> pre_seed;
    std::optional<int> pre_epochs, pre_latent;
    pre->add_option("--config", pre_config, "key-value config file");
    pre->add_option("--world-seed", pre_seed, "world seed");
    pre->add_option("--epochs", pre_epochs, "autoencoder epochs");
    pre->add_option("--latent", pre_latent, "latent dimension");
    pre->add_option("--out", pre_out, "output directory");

    // run
    auto* run = app.add_subcommand("run", "run one learning session");
    std::string run_config, run_out = "run", run_world, run_encoder;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_mem, run_iters;
    std::optional<double> run_pem;
    run->add_option("--config", run_config, "key-value config file");
    run->add_option("--seed", run_seed, "run seed");
    run->add_option("--mem-batches", run_mem, "episodic memory size in batches");
    run->add_option("--p-em", run_pem, "memory replacement probability");
    run->add_option("--iterations", run_iters, "loop iterations");
    run->add_option("--out", run_out, "output directory");
    run->add_option("--world", run_world, "dataset file (CURIOWLD1) instead of a generated world");
    run->add_option("--encoder", run_encoder, "pretrained encoder stem (from 'pretrain')");

    // grid
    auto* grid = app.add_subcommand("grid", "run the memory-size x p_em experiment grid");
    std::string grid_config, grid_out = "grid", grid_world, grid_encoder;
    std::optional<int> grid_runs;
    int grid_par = 1;
    grid->add_option("--config", grid_config, "key-value config file (grid.* keys allowed)");
    grid->add_option("--runs", grid_runs, "runs per cell");
    grid->add_option("--parallelism", grid_par, "concurrent runs")->check(CLI::PositiveNumber);
    grid->add_option("--out", grid_out, "output root");
    grid->add_option("--world", grid_world, "dataset file instead of a generated world");
    grid->add_option("--encoder", grid_encoder, "pretrained encoder stem");

    // report
    auto* rep = app.add_subcommand("report", "render SVG/CSV reports from a grid directory");
    std::string rep_in, rep_out;
    rep->add_option("--in", rep_in, "grid output root")->required();
    rep->add_option("--out", rep_out, "report directory")->required();

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the model architectures");
    std::vector<int> gc_latent{8, 16};
    double gc_h = 1e-5;
    std::uint64_t gc_seed = 1;
    gc->add_option("--latent", gc_latent, "latent sizes")->delimiter(',');
    gc->add_option("--step", gc_h, "finite-difference step");
    gc->add_option("--seed", gc_seed, "weight seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = std::chrono::steady_clock::now();
        if (*pre) {
            auto cfg = load_run_config(pre_config);
            if (pre_seed) cfg.world_seed = *pre_seed;
            if (pre_epochs) cfg.pretrain.epochs = *pre_epochs;
            if (pre_latent) cfg.latent_dim = cfg.models.latent_dim = *pre_latent;
            const auto env = agent::prepare_environment(cfg);
            fs::create_directories(pre_out);
            world::save_dataset(*env.world, fs::path(pre_out) / "world.dat");
            encoder::save_autoencoder(*env.autoencoder, fs::path(pre_out) / "autoencoder");
            std::vector<std::vector<double>> hist;
            for (std::size_t e = 0; e < env.pretrain_history.size(); ++e)
                hist.push_back({static_cast<double>(e + 1), env.pretrain_history[e]});
            csv::write(fs::path(pre_out) / "pretrain.csv", {"epoch", "loss"}, hist);
            std::cout << "train_mse " << env.train_mse << "\nheldout_mse " << env.heldout_mse << "\n";
            print_duration("pretrain", start);
        } else if (*run) {
            auto cfg = load_run_config(run_config);
            if (run_seed) cfg.seed = *run_seed;
            if (run_mem) cfg.mem_batches = *run_mem;
            if (run_pem) cfg.p_em = *run_pem;
            if (run_iters) cfg.iterations = *run_iters;
            const auto env = load_environment(cfg, run_world, run_encoder);
            const auto log = agent::run_session(cfg, &env);
            agent::write_run_outputs(log, run_out);
            if (!log.evals.empty())
                std::cout << "final fwd_mse " << log.evals.back().fwd_mse << "\nfinal inv_mse "
                          << log.evals.back().inv_mse << "\n";
            print_duration("run", start);
        } else if (*grid) {
            config::KeyValues kv;
            experiment::GridConfig gcfg;
            gcfg.base = load_run_config(grid_config, &kv);
            if (kv.has("grid.mem_batches")) {
                gcfg.mem_batches_values.clear();
                for (auto v : kv.get_ints("grid.mem_batches")) gcfg.mem_batches_values.push_back(static_cast<int>(v));
            }
            if (kv.has("grid.p_em")) gcfg.p_em_values = kv.get_doubles("grid.p_em");
            if (kv.has("grid.runs")) gcfg.runs_per_cell = static_cast<int>(kv.get_int("grid.runs"));
            if (kv.has("grid.base_seed")) gcfg.base_seed = kv.get_u64("grid.base_seed");
            if (grid_runs) gcfg.runs_per_cell = *grid_runs;
            gcfg.output_root = grid_out;
            const auto env = load_environment(gcfg.base, grid_world, grid_encoder);
            const auto result = experiment::run_grid(gcfg, grid_par, &env);
            for (const auto& c : result.cells)
                if (!c.curve.ticks.empty())
                    std::cout << experiment::cell_name(c.cell) << " final fwd " << c.curve.fwd_mean.back() << " +- "
                              << c.curve.fwd_std.back() << "  inv " << c.curve.inv_mean.back() << " +- "
                              << c.curve.inv_std.back() << "\n";
            print_duration("grid", start);
        } else if (*rep) {
            experiment::emit_reports(rep_in, rep_out);
        } else if (*gc) {
            bool ok = true;
            for (int latent : gc_latent) {
                models::ModelConfig mc;
                mc.latent_dim = latent;
                Rng rng(gc_seed);
                for (const auto& [name, spec] :
                     {std::pair{"forward", models::forward_architecture(mc)},
                      std::pair{"inverse", models::inverse_architecture(mc)}}) {
                    const auto net = nn::init_network(spec, rng);
                    nn::Vector x(static_cast<Eigen::Index>(net.in_dim())), t(static_cast<Eigen::Index>(net.out_dim()));
                    for (auto& v : x) v = uniform(rng, -1, 1);
                    for (auto& v : t) v = uniform(rng, -1, 1);
                    const double err = nn::gradcheck(net, x, t, gc_h);
                    const bool pass = err < 1e-4;
                    ok = ok && pass;
                    std::cout << name << " L=" << latent << " params=" << net.parameter_count()
                              << " max_rel_error=" << err << (pass ? " ok" : " FAIL") << "\n";
                }
            }
            print_duration("gradcheck", start);
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
