#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curio/motivation.hpp"
#include "curio/stats.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <set>
#include <vector>

using namespace curio;
using namespace curio::motivation;

namespace {

GoalSet make_set(std::vector<double> lps, GoalPolicy policy) {
    GoalSet set;
    set.policy = policy;
    for (std::size_t i = 0; i < lps.size(); ++i) {
        Goal g;
        g.id = static_cast<int>(i);
        g.lp = lps[i];
        set.goals.push_back(g);
    }
    set.first_selection_done = true;
    return set;
}

double hp_tanh_abs_diff(double a, double b) {
    using big = boost::multiprecision::cpp_dec_float_50;
    return static_cast<double>(boost::multiprecision::tanh(boost::multiprecision::abs(big(b) - big(a))));
}

struct Fixture {
    world::WorldDataset world;
    encoder::Autoencoder ae;
    Fixture() {
        world::WorldConfig cfg;
        cfg.grid_w = 10;
        cfg.grid_h = 10;
        Rng rng(1);
        world = generate_world(cfg, rng);
        ae = encoder::build_autoencoder(16, 16, 8, rng);
        encoder::fit_code_statistics(ae, world.images);
    }
};

}  // namespace

TEST_CASE("learning progress") {
    Goal g;
    g.last_pe = 0.2;
    update_lp(g, 0.5);
    CHECK(g.lp == doctest::Approx(0.2913126124515909).epsilon(1e-15));
    CHECK(g.last_pe == 0.5);
    CHECK(g.visits == 1);
    update_lp(g, 0.5);
    CHECK(g.lp == 0.0);
    CHECK(g.visits == 2);
    CHECK_THROWS(update_lp(g, -0.1));
    CHECK_THROWS(update_lp(g, std::nan("")));

    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const double a = uniform(rng, 0, 10), b = uniform(rng, 0, 10);
        const double lp = learning_progress(a, b);
        CHECK(std::abs(lp - hp_tanh_abs_diff(a, b)) < 1e-12);
        CHECK(lp == learning_progress(b, a));
        CHECK(lp >= 0.0);
        CHECK(lp < 1.0);
    }
    CHECK(learning_progress(0.0, 1e6) < 1.0);
}

TEST_CASE("prediction error") {
    nn::Vector a = nn::Vector::Zero(6), b = nn::Vector::Zero(6);
    b(0) = 3;
    b(1) = 4;
    CHECK(compute_pe(a, b) == 5.0);
    CHECK(compute_pe(b, a) == 5.0);
    CHECK(compute_pe(b, b) == 0.0);
    CHECK_THROWS(compute_pe(a, nn::Vector::Zero(5)));
}

TEST_CASE("decay") {
    GoalSet set = make_set({1.0, 0.5, 0.0}, {1.0, 0.15, 0.3});
    decay_all(set);
    CHECK(set.goals[0].lp == 1.0);
    set.policy.decay = 0.99;
    decay_all(set);
    CHECK(set.goals[0].lp == 0.99);
    for (int k = 1; k < 10; ++k) decay_all(set);
    CHECK(set.goals[1].lp == doctest::Approx(0.5 * std::pow(0.99, 10)).epsilon(1e-14));
    CHECK(set.goals[2].lp == 0.0);
}

TEST_CASE("greedy selection") {
    GoalSet set = make_set({0.5, 0.1, 0.2}, {0.99, 0.0, 0.3});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK(select_goal(set, rng) == 0);

    // Scaling every LP keeps the argmax.
    GoalSet scaled = make_set({0.05, 0.01, 0.02}, {0.99, 0.0, 0.3});
    for (int i = 0; i < 100; ++i) CHECK(select_goal(scaled, rng) == 0);
}

TEST_CASE("selection frequencies") {
    auto frequencies = [](GoalSet set, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<double> counts(set.size(), 0.0);
        for (int i = 0; i < 100000; ++i) counts[select_goal(set, rng)] += 1;
        return counts;
    };
    // epsilon 1: uniform regardless of LP.
    CHECK(stats::chi_square_uniform_p(frequencies(make_set({0.9, 0.1, 0.3, 0.0, 0.2}, {0.99, 1.0, 0.3}), 4)) > 0.01);
    // All LPs equal: ties broken uniformly.
    CHECK(stats::chi_square_uniform_p(frequencies(make_set(std::vector<double>(9, 0.0), {0.99, 0.0, 0.3}), 5)) >
          0.01);
    // Mixed: the argmax gets (1 - eps) + eps / n.
    const auto c = frequencies(make_set({0.1, 0.7, 0.3, 0.2}, {0.99, 0.15, 0.3}), 6);
    CHECK(c[1] / 100000 == doctest::Approx(0.85 + 0.15 / 4).epsilon(0.01));
}

TEST_CASE("first selection is uniform") {
    std::vector<double> counts(4, 0.0);
    Rng rng(7);
    for (int i = 0; i < 40000; ++i) {
        GoalSet set = make_set({0.9, 0.0, 0.0, 0.0}, {0.99, 0.0, 0.3});
        set.first_selection_done = false;
        counts[select_goal(set, rng)] += 1;
        CHECK(set.first_selection_done);
    }
    CHECK(stats::chi_square_uniform_p(counts) > 0.01);
}

TEST_CASE("command choice") {
    models::ModelConfig mc;
    mc.latent_dim = 4;
    Rng rng(8);
    const auto im = models::make_inverse_model(mc, rng);
    nn::Vector goal(4);
    goal << 0.3, -0.2, 1.1, 0.0;

    GoalSet never = make_set({0, 0}, {0.99, 0.15, 0.0});
    for (int i = 0; i < 50; ++i) {
        const auto c = choose_command(im, goal, never, rng);
        CHECK_FALSE(c.was_random);
        CHECK(c.command == models::predict_inverse(im, goal));
    }

    GoalSet always = make_set({0, 0}, {0.99, 0.15, 1.0});
    std::vector<double> xs, ys;
    for (int i = 0; i < 100000; ++i) {
        const auto c = choose_command(im, goal, always, rng);
        CHECK(c.was_random);
        xs.push_back(c.command.x);
        ys.push_back(c.command.y);
    }
    CHECK(stats::ks_uniform_p(xs) > 0.01);
    CHECK(stats::ks_uniform_p(ys) > 0.01);

    GoalSet some = make_set({0, 0}, {0.99, 0.15, 0.3});
    int random = 0;
    const auto inv = models::predict_inverse(im, goal);
    for (int i = 0; i < 20000; ++i) {
        const auto c = choose_command(im, goal, some, rng);
        if (c.was_random) ++random;
        else CHECK(c.command == inv);
    }
    CHECK(random / 20000.0 == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("init_goals") {
    Fixture f;
    GoalPolicy policy;
    Rng a(9), b(9);
    const auto s1 = init_goals(f.world, f.ae, 9, policy, a);
    const auto s2 = init_goals(f.world, f.ae, 9, policy, b);
    REQUIRE(s1.size() == 9);
    std::set<int> ids;
    std::set<std::pair<int, int>> cells;
    for (std::size_t i = 0; i < 9; ++i) {
        const auto& g = s1.goals[i];
        ids.insert(g.id);
        cells.insert({g.cell.ix, g.cell.iy});
        CHECK(g.lp == 0.0);
        CHECK(g.last_pe == 0.0);
        CHECK(g.visits == 0);
        CHECK(g.truth_motor == f.world.position(g.cell));
        CHECK(g.code == encoder::encode_standardized(f.ae, f.world.image(g.cell)));
        CHECK(g.cell == s2.goals[i].cell);
    }
    CHECK(ids.size() == 9);
    CHECK(cells.size() == 9);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = i + 1; j < 9; ++j) CHECK((s1.goals[i].code - s1.goals[j].code).norm() > 1e-6);

    Rng c(10);
    CHECK_THROWS(init_goals(f.world, f.ae, 101, policy, c));
    CHECK_NOTHROW(init_goals(f.world, f.ae, 100, policy, c));

    std::vector<std::size_t> excluded;
    for (std::size_t i = 0; i < 95; ++i) excluded.push_back(i);
    const auto rest = init_goals(f.world, f.ae, 5, policy, c, excluded);
    for (const auto& g : rest.goals) CHECK(f.world.index(g.cell) >= 95);
    CHECK_THROWS(init_goals(f.world, f.ae, 6, policy, c, excluded));
}
