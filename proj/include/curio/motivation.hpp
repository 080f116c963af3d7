#pragma once

// Goal bookkeeping and the curiosity policy: prediction errors per goal,
// learning progress LP = tanh(|PE(t) - PE(t-1)|), decay, epsilon-greedy goal
// selection and the random-movement branch.

#include <cstddef>
#include <span>
#include <vector>

#include "curio/encoder.hpp"
#include "curio/models.hpp"
#include "curio/world.hpp"

namespace curio::motivation {

using encoder::LatentCode;
using world::MotorCommand;

struct Goal {
    int id = 0;
    LatentCode code;
    MotorCommand truth_motor;  // logging only
    world::GridCell cell;
    double last_pe = 0.0;
    double lp = 0.0;
    int visits = 0;
};

struct GoalPolicy {
    double decay = 0.99;
    double epsilon_goal = 0.15;
    double p_random_move = 0.30;
};

struct GoalSet {
    std::vector<Goal> goals;
    GoalPolicy policy;
    bool first_selection_done = false;

    std::size_t size() const { return goals.size(); }
};

/// Samples n distinct grid cells (excluding `excluded`) and encodes their images.
GoalSet init_goals(const world::WorldDataset& world, const encoder::Autoencoder& ae, std::size_t n,
                   const GoalPolicy& policy, Rng& rng, std::span<const std::size_t> excluded = {});

/// Euclidean distance between two latent codes.
double compute_pe(const LatentCode& predicted, const LatentCode& observed);

double learning_progress(double pe_prev, double pe_now);
void update_lp(Goal& goal, double pe_now);
void decay_all(GoalSet& set);

/// The first call picks uniformly at random. Later calls pick a uniform goal
/// with probability epsilon_goal and otherwise the max-LP goal, breaking ties
/// uniformly. Returns an index into set.goals.
std::size_t select_goal(GoalSet& set, Rng& rng);

struct CommandChoice {
    MotorCommand command;
    bool was_random = false;
};

CommandChoice choose_command(const models::InverseModel& im, const LatentCode& goal_code, const GoalSet& set,
                             Rng& rng);

}  // namespace curio::motivation
