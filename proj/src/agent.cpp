#include "curio/agent.hpp"

#include "curio/config.hpp"
#include "curio/csv.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace curio::agent {

namespace {

// Independent random streams so that, for a given seed, goals, test set and
// initial weights do not depend on how many draws the policy or memory made.
enum Stream : std::uint64_t { kInit = 1, kPolicy = 2, kNoise = 3, kMemory = 4, kFit = 5 };

constexpr std::uint64_t kWorldStream = 0x574f524cULL;
constexpr std::uint64_t kEncoderStream = 0x43414545ULL;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid run config: ") + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void RunConfig::validate() const {
    require(world.grid_w > 0 && world.grid_h > 0 && world.img_w > 0 && world.img_h > 0, "world dimensions");
    require(latent_dim > 0, "encoder.latent_dim");
    require(pretrain.epochs >= 0 && pretrain.minibatch >= 1, "encoder training");
    require(pretrain_holdout >= 0.0 && pretrain_holdout < 1.0, "encoder.holdout");
    require(iterations >= 0, "loop.iterations");
    require(buffer_len >= 1, "loop.buffer_len");
    require(eval_every >= 1, "loop.eval_every");
    require(testset_size >= 1, "loop.testset_size");
    require(n_goals >= 1, "goals.n");
    require(static_cast<long long>(n_goals) + testset_size <=
                static_cast<long long>(world.grid_w) * world.grid_h,
            "goals plus test set exceed the grid");
    require(motor_noise_sigma >= 0.0, "loop.motor_noise_sigma");
    require(samples_per_move >= 1, "loop.samples_per_move");
    require(mem_batches >= 0, "memory.batches");
    require(is_probability(p_em), "memory.p_em");
    require(is_probability(policy.epsilon_goal), "goals.epsilon");
    require(is_probability(policy.p_random_move), "goals.p_random_move");
    require(policy.decay > 0.0 && policy.decay <= 1.0, "goals.decay");
    require(models.minibatch >= 1 && models.epochs_per_fit >= 1, "models training");
    require(models.sgd.learning_rate >= 0.0, "models.lr");
}

RunConfig full_scale_config() {
    RunConfig cfg;
    cfg.iterations = 5000;
    cfg.latent_dim = 32;
    cfg.models.latent_dim = 32;
    return cfg;
}

MotorCommand add_motor_noise(MotorCommand cmd, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("motor noise sigma must be non-negative");
    if (sigma == 0.0) return world::clamp_unit(cmd);
    const double nx = gaussian(rng, 0.0, sigma);
    const double ny = gaussian(rng, 0.0, sigma);
    return world::clamp_unit({cmd.x + nx, cmd.y + ny});
}

Environment prepare_environment(const RunConfig& cfg) {
    cfg.validate();
    Environment env;
    Rng world_rng(derive_seed(cfg.world_seed, kWorldStream));
    auto world = std::make_shared<world::WorldDataset>(world::generate_world(cfg.world, world_rng));

    Rng enc_rng(derive_seed(cfg.world_seed, kEncoderStream));
    std::vector<std::size_t> order(world->cell_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(enc_rng, i)]);
    const auto holdout = static_cast<std::size_t>(cfg.pretrain_holdout * static_cast<double>(order.size()));
    std::vector<world::Image> train, held;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < holdout ? held : train).push_back(world->images[order[i]]);

    auto ae = std::make_shared<encoder::Autoencoder>(
        encoder::build_autoencoder(cfg.world.img_w, cfg.world.img_h, cfg.latent_dim, enc_rng));
    env.pretrain_history = encoder::pretrain(*ae, train, cfg.pretrain, enc_rng);
    env.train_mse = encoder::reconstruction_mse(*ae, train);
    env.heldout_mse = held.empty() ? env.train_mse : encoder::reconstruction_mse(*ae, held);
    env.world = std::move(world);
    env.autoencoder = std::move(ae);
    return env;
}

Agent::Agent(const RunConfig& cfg, std::shared_ptr<const world::WorldDataset> world,
             std::shared_ptr<const encoder::Autoencoder> ae)
    : cfg_(cfg),
      world_(std::move(world)),
      ae_(std::move(ae)),
      policy_rng_(derive_seed(cfg.seed, kPolicy)),
      noise_rng_(derive_seed(cfg.seed, kNoise)),
      memory_rng_(derive_seed(cfg.seed, kMemory)),
      fit_rng_(derive_seed(cfg.seed, kFit)),
      memory_(static_cast<std::size_t>(std::max(cfg.mem_batches, 0)), static_cast<std::size_t>(cfg.buffer_len)) {
    cfg_.validate();
    if (!world_ || !ae_) throw std::invalid_argument("agent needs a world and an autoencoder");
    if (ae_->img_w != world_->img_w || ae_->img_h != world_->img_h)
        throw std::invalid_argument("autoencoder image size does not match the world");
    cfg_.latent_dim = ae_->latent_dim;
    cfg_.models.latent_dim = ae_->latent_dim;

    Rng init_rng(derive_seed(cfg.seed, kInit));
    goals_ = motivation::init_goals(*world_, *ae_, static_cast<std::size_t>(cfg_.n_goals), cfg_.policy, init_rng);

    std::unordered_set<std::size_t> taken;
    for (const auto& g : goals_.goals) taken.insert(world_->index(g.cell));
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < world_->cell_count(); ++i)
        if (!taken.count(i)) pool.push_back(i);
    for (int i = 0; i < cfg_.testset_size; ++i) {
        const auto k = static_cast<std::size_t>(i);
        std::swap(pool[k], pool[k + uniform_index(init_rng, pool.size() - k)]);
        const world::GridCell cell = world_->cell(pool[k]);
        testset_cells_.push_back(pool[k]);
        testset_.push_back({world_->position(cell), encoder::encode_standardized(*ae_, world_->image(cell))});
    }

    fm_ = models::make_forward_model(cfg_.models, init_rng);
    im_ = models::make_inverse_model(cfg_.models, init_rng);
    sim_.world = world_.get();
    sim_.position = {0.5, 0.5};
    buffer_.reserve(static_cast<std::size_t>(cfg_.buffer_len));
}

void Agent::flush_buffer(IterationRecord& rec) {
    const auto replay = memory_.samples();
    models::online_fit(im_, buffer_, replay, cfg_.models, fit_rng_);
    models::online_fit(fm_, buffer_, replay, cfg_.models, fit_rng_);
    ++fit_count_;
    samples_fitted_ += buffer_.size() + replay.size();
    rec.fitted = true;

    MemoryRecord mrec;
    mrec.iteration = iteration_;
    if (memory_.capacity() > 0) {
        auto account = [&](const memory::MemoryUpdateReport& r) {
            mrec.replaced += r.replaced_indices.size();
            mrec.forced = mrec.forced || r.forced;
        };
        if (cfg_.memory_update_per_batch) {
            account(memory_.insert_batch(buffer_, cfg_.p_em, memory_rng_));
        } else {
            for (const auto& s : buffer_) account(memory_.insert(s, cfg_.p_em, memory_rng_));
        }
    }
    mrec.occupancy = memory_.size();
    mrec.diversity = memory_.diversity();
    memory_log_.push_back(mrec);
    buffer_.clear();
}

void Agent::push_sample(models::SensorimotorSample s, IterationRecord& rec) {
    buffer_.push_back(std::move(s));
    if (buffer_.size() >= static_cast<std::size_t>(cfg_.buffer_len)) flush_buffer(rec);
}

IterationRecord Agent::run_iteration() {
    ++iteration_;
    IterationRecord rec;
    rec.iteration = iteration_;

    const std::size_t gi = motivation::select_goal(goals_, policy_rng_);
    motivation::Goal& goal = goals_.goals[gi];
    rec.goal_id = goal.id;
    rec.goal_predictions.reserve(goals_.size());
    for (const auto& g : goals_.goals) rec.goal_predictions.push_back(models::predict_inverse(im_, g.code));
    rec.goal_prediction = rec.goal_predictions[gi];

    const auto choice = motivation::choose_command(im_, goal.code, goals_, policy_rng_);
    rec.was_random = choice.was_random;
    rec.command = choice.command;

    const encoder::LatentCode predicted = models::predict_forward(fm_, choice.command);
    rec.executed = add_motor_noise(choice.command, cfg_.motor_noise_sigma, noise_rng_);
    const auto observations = world::execute_move(sim_, rec.executed, cfg_.samples_per_move);
    const auto& last = observations.back();
    rec.cell = last.cell;
    const encoder::LatentCode observed = encoder::encode_standardized(*ae_, last.image);

    rec.pe = motivation::compute_pe(predicted, observed);
    motivation::update_lp(goal, rec.pe);
    motivation::decay_all(goals_);
    rec.lp_selected = goal.lp;
    rec.lp.reserve(goals_.size());
    for (const auto& g : goals_.goals) rec.lp.push_back(g.lp);

    if (cfg_.train_on_trajectory) {
        for (std::size_t k = 0; k + 1 < observations.size(); ++k)
            push_sample({observations[k].position, encoder::encode_standardized(*ae_, observations[k].image)}, rec);
    }
    push_sample({last.position, observed}, rec);
    return rec;
}

models::EvalResult Agent::evaluate() const { return models::evaluate_mse(fm_, im_, testset_); }

RunLog run_session(const RunConfig& cfg, const Environment* env) {
    cfg.validate();
    Environment own;
    if (!env) {
        own = prepare_environment(cfg);
        env = &own;
    }
    Agent agent(cfg, env->world, env->autoencoder);

    RunLog log;
    log.config = agent.config();
    for (const auto& g : agent.goals().goals) log.goals.push_back({g.id, g.cell, g.truth_motor});
    log.testset_cells = agent.testset_cells();
    log.iterations.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int t = 0; t < cfg.iterations; ++t) {
        log.iterations.push_back(agent.run_iteration());
        if (agent.iteration() % cfg.eval_every == 0) {
            const auto r = agent.evaluate();
            log.evals.push_back({agent.iteration(), r.fwd_mse, r.inv_mse});
        }
    }
    log.memory = agent.memory_log();
    log.skipped_steps = agent.forward_model().opt.skipped_steps + agent.inverse_model().opt.skipped_steps;
    log.fit_count = agent.fit_count();
    log.samples_fitted = agent.samples_fitted();
    log.forward_net = agent.forward_model().net;
    log.inverse_net = agent.inverse_model().net;
    return log;
}

void write_run_outputs(const RunLog& log, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::vector<std::vector<double>> explore, goals, lp;
    for (const auto& r : log.iterations) {
        const double it = r.iteration;
        explore.push_back({it, static_cast<double>(r.goal_id), r.was_random ? 1.0 : 0.0, r.command.x, r.command.y,
                           r.executed.x, r.executed.y, r.pe, r.lp_selected});
        for (std::size_t k = 0; k < r.goal_predictions.size(); ++k) {
            const auto& g = log.goals.at(k);
            goals.push_back({it, static_cast<double>(g.id), r.goal_predictions[k].x, r.goal_predictions[k].y,
                             g.truth.x, g.truth.y});
        }
        std::vector<double> row{it, static_cast<double>(r.goal_id)};
        row.insert(row.end(), r.lp.begin(), r.lp.end());
        lp.push_back(std::move(row));
    }
    csv::write(dir / "explore.csv",
               {"iteration", "goal_id", "was_random", "cmd_x", "cmd_y", "exec_x", "exec_y", "pe", "lp_selected"},
               explore);
    csv::write(dir / "goals.csv", {"iteration", "goal_id", "pred_x", "pred_y", "true_x", "true_y"}, goals);
    std::vector<std::string> lp_header{"iteration", "selected_goal"};
    for (std::size_t i = 0; i < log.goals.size(); ++i) lp_header.push_back("lp_" + std::to_string(i));
    csv::write(dir / "lp.csv", lp_header, lp);

    std::vector<std::vector<double>> mse;
    for (const auto& e : log.evals) mse.push_back({static_cast<double>(e.iteration), e.fwd_mse, e.inv_mse});
    csv::write(dir / "mse.csv", {"iteration", "fwd_mse", "inv_mse"}, mse);

    std::vector<std::vector<double>> mem;
    for (const auto& m : log.memory)
        mem.push_back({static_cast<double>(m.iteration), static_cast<double>(m.occupancy),
                       static_cast<double>(m.replaced), m.forced ? 1.0 : 0.0, m.diversity});
    csv::write(dir / "memory.csv", {"iteration", "occupancy", "replaced_count", "forced", "diversity"}, mem);

    std::vector<std::vector<double>> goal_table;
    for (const auto& g : log.goals)
        goal_table.push_back({static_cast<double>(g.id), static_cast<double>(g.cell.ix),
                              static_cast<double>(g.cell.iy), g.truth.x, g.truth.y});
    csv::write(dir / "goal_set.csv", {"goal_id", "cell_x", "cell_y", "true_x", "true_y"}, goal_table);

    nn::save_weights(log.forward_net, dir / "forward.nn");
    nn::save_weights(log.inverse_net, dir / "inverse.nn");

    std::ofstream snap(dir / "config.txt", std::ios::trunc);
    snap << config::to_key_values(log.config).to_text();
    snap << "# skipped_optimizer_steps = " << log.skipped_steps << "\n";
    if (!snap) throw std::runtime_error("cannot write config snapshot in " + dir.string());
}

}  // namespace curio::agent
