#pragma once

// The online learning loop: pick a goal by learning progress, reach for it
// with the inverse model (or move randomly), predict the outcome with the
// forward model, move with noise, observe, update PE/LP, and every buffer_len
// samples refit both models on the buffer plus the episodic memory.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "curio/encoder.hpp"
#include "curio/memory.hpp"
#include "curio/models.hpp"
#include "curio/motivation.hpp"
#include "curio/world.hpp"

namespace curio::agent {

using world::MotorCommand;

struct RunConfig {
    // world and encoder
    world::WorldConfig world;
    std::uint64_t world_seed = 7;
    int latent_dim = 16;
    encoder::PretrainConfig pretrain;
    double pretrain_holdout = 0.1;

    // loop
    int iterations = 2000;
    int buffer_len = 16;
    int eval_every = 50;
    int testset_size = 50;
    int n_goals = 9;
    double motor_noise_sigma = 0.05;
    int samples_per_move = 1;
    bool train_on_trajectory = false;
    std::uint64_t seed = 1;

    // memory
    int mem_batches = 20;
    double p_em = 0.1;
    bool memory_update_per_batch = false;

    motivation::GoalPolicy policy;
    models::ModelConfig models;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Full-scale loop settings (5000 iterations, 32-d latent), desk-scale world.
RunConfig full_scale_config();

struct IterationRecord {
    int iteration = 0;
    int goal_id = 0;
    bool was_random = false;
    MotorCommand command;    // inverse-model or random command
    MotorCommand executed;   // after noise and clamping
    MotorCommand goal_prediction;  // inverse model's answer for the selected goal
    std::vector<MotorCommand> goal_predictions;  // every goal, before this iteration's move
    world::GridCell cell;    // cell whose image was observed
    double pe = 0.0;
    double lp_selected = 0.0;
    std::vector<double> lp;  // all goals, after decay
    bool fitted = false;
};

struct EvalRecord {
    int iteration = 0;
    double fwd_mse = 0.0;
    double inv_mse = 0.0;
};

struct MemoryRecord {
    int iteration = 0;
    std::size_t occupancy = 0;
    std::size_t replaced = 0;
    bool forced = false;
    double diversity = 1.0;
};

struct GoalInfo {
    int id = 0;
    world::GridCell cell;
    MotorCommand truth;
};

struct RunLog {
    RunConfig config;
    std::vector<GoalInfo> goals;
    std::vector<std::size_t> testset_cells;
    std::vector<IterationRecord> iterations;
    std::vector<EvalRecord> evals;
    std::vector<MemoryRecord> memory;
    std::uint64_t skipped_steps = 0;
    std::uint64_t fit_count = 0;
    std::uint64_t samples_fitted = 0;  // rows seen by the forward model, memory replays included
    nn::Network forward_net;
    nn::Network inverse_net;
};

/// Adds per-axis N(0, sigma^2) noise and clamps to [0,1]^2.
MotorCommand add_motor_noise(MotorCommand cmd, double sigma, Rng& rng);

struct Environment {
    std::shared_ptr<const world::WorldDataset> world;
    std::shared_ptr<const encoder::Autoencoder> autoencoder;
    double train_mse = 0.0;
    double heldout_mse = 0.0;
    std::vector<double> pretrain_history;
};

/// Generates the seeded world and pretrains the autoencoder on a seeded split
/// (1 - pretrain_holdout of the cells), reporting training and held-out MSE.
Environment prepare_environment(const RunConfig& cfg);

class Agent {
public:
    Agent(const RunConfig& cfg, std::shared_ptr<const world::WorldDataset> world,
          std::shared_ptr<const encoder::Autoencoder> ae);

    IterationRecord run_iteration();
    models::EvalResult evaluate() const;

    int iteration() const { return iteration_; }
    const RunConfig& config() const { return cfg_; }
    const motivation::GoalSet& goals() const { return goals_; }
    const memory::EpisodicMemory& memory() const { return memory_; }
    const std::vector<models::SensorimotorSample>& buffer() const { return buffer_; }
    const std::vector<models::TestPoint>& testset() const { return testset_; }
    const std::vector<std::size_t>& testset_cells() const { return testset_cells_; }
    const models::ForwardModel& forward_model() const { return fm_; }
    const models::InverseModel& inverse_model() const { return im_; }
    std::uint64_t fit_count() const { return fit_count_; }
    std::uint64_t samples_fitted() const { return samples_fitted_; }
    const std::vector<MemoryRecord>& memory_log() const { return memory_log_; }

private:
    void push_sample(models::SensorimotorSample s, IterationRecord& rec);
    void flush_buffer(IterationRecord& rec);

    RunConfig cfg_;
    std::shared_ptr<const world::WorldDataset> world_;
    std::shared_ptr<const encoder::Autoencoder> ae_;
    Rng policy_rng_, noise_rng_, memory_rng_, fit_rng_;
    world::SimState sim_;
    motivation::GoalSet goals_;
    std::vector<models::TestPoint> testset_;
    std::vector<std::size_t> testset_cells_;
    models::ForwardModel fm_;
    models::InverseModel im_;
    memory::EpisodicMemory memory_;
    std::vector<models::SensorimotorSample> buffer_;
    std::vector<MemoryRecord> memory_log_;
    int iteration_ = 0;
    std::uint64_t fit_count_ = 0;
    std::uint64_t samples_fitted_ = 0;
};

/// Runs the full session. World and encoder are built from the config unless
/// an environment is supplied.
RunLog run_session(const RunConfig& cfg, const Environment* env = nullptr);

/// explore.csv, mse.csv, goals.csv, lp.csv, memory.csv, forward.nn,
/// inverse.nn and config.txt.
void write_run_outputs(const RunLog& log, const std::filesystem::path& dir);

}  // namespace curio::agent
