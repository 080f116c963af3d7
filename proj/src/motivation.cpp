#include "curio/motivation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace curio::motivation {

GoalSet init_goals(const world::WorldDataset& world, const encoder::Autoencoder& ae, std::size_t n,
                   const GoalPolicy& policy, Rng& rng, std::span<const std::size_t> excluded) {
    if (n == 0) throw std::invalid_argument("goal set needs at least one goal");
    const std::unordered_set<std::size_t> skip(excluded.begin(), excluded.end());
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < world.cell_count(); ++i)
        if (!skip.count(i)) pool.push_back(i);
    if (n > pool.size())
        throw std::invalid_argument("cannot pick " + std::to_string(n) + " goals from " + std::to_string(pool.size()) +
                                    " available cells");

    GoalSet set;
    set.policy = policy;
    // Partial Fisher-Yates: the first n entries become the sample.
    for (std::size_t i = 0; i < n; ++i) {
        std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
        Goal g;
        g.id = static_cast<int>(i);
        g.cell = world.cell(pool[i]);
        g.truth_motor = world.position(g.cell);
        g.code = encoder::encode_standardized(ae, world.image(g.cell));
        set.goals.push_back(std::move(g));
    }
    return set;
}

double compute_pe(const LatentCode& predicted, const LatentCode& observed) {
    if (predicted.size() != observed.size())
        throw std::invalid_argument("compute_pe: code lengths differ");
    return (predicted - observed).norm();
}

double learning_progress(double pe_prev, double pe_now) {
    // tanh rounds to 1.0 beyond |x| ~ 19; keep the result strictly below 1.
    return std::min(std::tanh(std::abs(pe_now - pe_prev)), std::nextafter(1.0, 0.0));
}

void update_lp(Goal& goal, double pe_now) {
    if (!(pe_now >= 0.0)) throw std::invalid_argument("prediction error must be non-negative");
    goal.lp = learning_progress(goal.last_pe, pe_now);
    goal.last_pe = pe_now;
    ++goal.visits;
}

void decay_all(GoalSet& set) {
    for (auto& g : set.goals) g.lp *= set.policy.decay;
}

std::size_t select_goal(GoalSet& set, Rng& rng) {
    if (set.goals.empty()) throw std::invalid_argument("select_goal on an empty goal set");
    const std::size_t n = set.goals.size();
    if (!set.first_selection_done) {
        set.first_selection_done = true;
        return uniform_index(rng, n);
    }
    if (bernoulli(rng, set.policy.epsilon_goal)) return uniform_index(rng, n);

    double best = -1.0;
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < n; ++i) {
        const double lp = set.goals[i].lp;
        if (lp > best) {
            best = lp;
            ties.assign(1, i);
        } else if (lp == best) {
            ties.push_back(i);
        }
    }
    return ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
}

CommandChoice choose_command(const models::InverseModel& im, const LatentCode& goal_code, const GoalSet& set,
                             Rng& rng) {
    if (bernoulli(rng, set.policy.p_random_move)) return {{uniform01(rng), uniform01(rng)}, true};
    return {models::predict_inverse(im, goal_code), false};
}

}  // namespace curio::motivation
