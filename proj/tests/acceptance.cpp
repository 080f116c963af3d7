// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when a
// gating criterion fails.

#include "curio/agent.hpp"
#include "curio/csv.hpp"
#include "curio/encoder.hpp"
#include "curio/experiment.hpp"
#include "curio/geometry.hpp"
#include "curio/memory.hpp"
#include "curio/models.hpp"
#include "curio/motivation.hpp"
#include "curio/nn.hpp"
#include "curio/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace curio;
namespace fs = std::filesystem;
using geometry::Point;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    bool gating;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss << std::setprecision(prec) << v;
    return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    return out;
}

double chi_square_p(const std::vector<double>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    const double e = total / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(counts.size() - 1)), chi2));
}

// Hull vertices and area by testing every ordered pair as a candidate edge.
std::pair<std::set<Point>, double> brute_force_hull(const std::vector<Point>& pts) {
    std::vector<Point> u(pts);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    if (u.size() < 3) return {std::set<Point>(u.begin(), u.end()), 0.0};
    std::set<Point> verts;
    double twice = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (i == j) continue;
            bool edge = true;
            const double dx = u[j].x - u[i].x, dy = u[j].y - u[i].y;
            for (std::size_t k = 0; k < u.size() && edge; ++k) {
                if (k == i || k == j) continue;
                const double c = geometry::cross(u[i], u[j], u[k]);
                if (c < 0) edge = false;
                else if (c == 0) {
                    const double t = (u[k].x - u[i].x) * dx + (u[k].y - u[i].y) * dy;
                    if (t < 0 || t > dx * dx + dy * dy) edge = false;
                }
            }
            if (edge) {
                verts.insert(u[i]);
                twice += u[i].x * u[j].y - u[j].x * u[i].y;
            }
        }
    }
    return {verts, std::max(0.0, twice / 2.0)};
}

struct Args {
    fs::path work_dir = "acceptance_work";
    std::string cli = CURIO_CLI_PATH;
    int parallelism = 0;
};

Args parse_args(int argc, char** argv) {
    Args a;
    for (int i = 1; i < argc; ++i) {
        const std::string s = argv[i];
        auto next = [&]() -> std::string {
            if (i + 1 >= argc) throw std::invalid_argument(s + " needs a value");
            return argv[++i];
        };
        if (s == "--work-dir") a.work_dir = next();
        else if (s == "--cli") a.cli = next();
        else if (s == "--parallelism") a.parallelism = std::stoi(next());
        else throw std::invalid_argument("unknown argument " + s);
    }
    if (a.parallelism <= 0) a.parallelism = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return a;
}

Verdict gradients() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int latent : {8, 16}) {
        models::ModelConfig mc;
        mc.latent_dim = latent;
        Rng rng(derive_seed(101, static_cast<std::uint64_t>(latent)));
        for (const auto& spec : {models::forward_architecture(mc), models::inverse_architecture(mc)}) {
            const auto net = nn::init_network(spec, rng);
            nn::Vector x(static_cast<Eigen::Index>(net.in_dim())), t(static_cast<Eigen::Index>(net.out_dim()));
            for (auto& v : x) v = uniform(rng, -1, 1);
            for (auto& v : t) v = uniform(rng, -1, 1);
            worst = std::max(worst, nn::gradcheck(net, x, t, 1e-5));
        }
    }
    const double secs = seconds_since(start);
    return {worst < 1e-4 && secs < 60.0, "max relative error " + fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

Verdict learning_progress_suite() {
    using big = boost::multiprecision::cpp_dec_float_50;
    Rng rng(202);
    double worst = 0.0;
    bool in_range = true;
    for (int i = 0; i < 100; ++i) {
        const double prev = uniform(rng, 0.0, 10.0), now = uniform(rng, 0.0, 10.0);
        motivation::Goal g;
        g.last_pe = prev;
        motivation::update_lp(g, now);
        const double ref = static_cast<double>(boost::multiprecision::tanh(boost::multiprecision::abs(big(now) - big(prev))));
        worst = std::max(worst, std::abs(g.lp - ref));
        in_range = in_range && g.lp >= 0.0 && g.lp < 1.0;
    }
    for (double d : {0.0, 1e-300, 19.0, 25.0, 1e6}) {
        const double lp = motivation::learning_progress(0.0, d);
        in_range = in_range && lp >= 0.0 && lp < 1.0;
    }
    return {worst < 1e-12 && in_range, "max |lp - tanh| " + fmt(worst) + (in_range ? ", range ok" : ", out of range")};
}

Verdict memory_statistics() {
    const auto start = std::chrono::steady_clock::now();
    const int inserts = 100000;
    std::string detail;
    bool ok = true;
    for (double p : {0.01, 0.1}) {
        Rng rng(derive_seed(303, static_cast<std::uint64_t>(p * 1000)));
        memory::EpisodicMemory m(10, 16);
        models::SensorimotorSample s{{0.5, 0.5}, nn::Vector::Zero(2)};
        for (std::size_t i = 0; i < m.capacity(); ++i) m.insert(s, p, rng);
        double total = 0.0;
        for (int i = 0; i < inserts; ++i) total += static_cast<double>(m.insert(s, p, rng).replaced_indices.size());
        const double mean = total / inserts, expected = 160 * p + std::pow(1 - p, 160);
        const double rel = std::abs(mean - expected) / expected;
        ok = ok && rel < 0.01;
        detail += "p=" + fmt(p) + " mean " + fmt(mean, 6) + " vs " + fmt(expected, 6) + "; ";
    }
    Rng rng(304);
    memory::EpisodicMemory m(10, 16);
    models::SensorimotorSample s{{0.5, 0.5}, nn::Vector::Zero(2)};
    for (std::size_t i = 0; i < m.capacity(); ++i) m.insert(s, 0.0, rng);
    std::vector<double> counts(m.capacity(), 0.0);
    bool exactly_one = true;
    for (int i = 0; i < inserts; ++i) {
        const auto rep = m.insert(s, 0.0, rng);
        exactly_one = exactly_one && rep.replaced_indices.size() == 1;
        if (!rep.replaced_indices.empty()) counts[rep.replaced_indices[0]] += 1;
    }
    const double pchi = chi_square_p(counts);
    const double secs = seconds_since(start);
    ok = ok && exactly_one && pchi > 0.01 && secs < 60.0;
    detail += "p=0 single victim " + std::string(exactly_one ? "yes" : "no") + ", chi-square p " + fmt(pchi) + ", " +
              fmt(secs, 3) + " s";
    return {ok, detail};
}

struct GridData {
    experiment::GridResult main;   // mem {0, 10, 20} at p_em 0.1
    experiment::GridResult low;    // mem 10 at p_em 0.01
    double seconds = 0.0;
};

std::vector<double> finals(const experiment::CellResult& c, bool fwd) {
    std::vector<double> out;
    for (const auto& r : c.runs) out.push_back(fwd ? r.evals.back().fwd_mse : r.evals.back().inv_mse);
    return out;
}

Verdict forgetting(const GridData& g) {
    const auto& m0 = g.main.find(0, 0.1);
    const auto& m20 = g.main.find(20, 0.1);
    bool ok = true;
    std::string detail;
    for (bool fwd : {true, false}) {
        const auto a = finals(m20, fwd), b = finals(m0, fwd);
        const double p = stats::mann_whitney_less(a, b);
        const bool strict = stats::mean(a) < stats::mean(b);
        ok = ok && strict && p < 0.1;
        detail += std::string(fwd ? "fwd" : "inv") + " mem20 " + fmt(stats::mean(a)) + "+-" + fmt(stats::stddev(a)) +
                  " vs mem0 " + fmt(stats::mean(b)) + "+-" + fmt(stats::stddev(b)) + " (MW p " + fmt(p, 3) + "); ";
    }
    detail += "grid " + fmt(g.seconds, 4) + " s";
    return {ok, detail};
}

Verdict ordering(const GridData& g) {
    const double f0 = stats::mean(finals(g.main.find(0, 0.1), true));
    const double f10 = stats::mean(finals(g.main.find(10, 0.1), true));
    const double f20 = stats::mean(finals(g.main.find(20, 0.1), true));
    const bool full = f20 <= f10 && f10 <= f0;
    return {f20 < f0, "fwd mem20 " + fmt(f20) + ", mem10 " + fmt(f10) + ", mem0 " + fmt(f0) + "; full ordering " +
                          (full ? "holds" : "does not hold")};
}

Verdict plasticity(const GridData& g, int mark) {
    auto at_mark = [&](const experiment::CellResult& c) {
        for (std::size_t i = 0; i < c.curve.ticks.size(); ++i)
            if (c.curve.ticks[i] == mark) return c.curve.fwd_mean[i];
        return std::nan("");
    };
    const double hi = at_mark(g.main.find(10, 0.1)), lo = at_mark(g.low.find(10, 0.01));
    return {hi < lo, "fwd at iteration " + std::to_string(mark) + ": p_em 0.1 " + fmt(hi) + " vs p_em 0.01 " + fmt(lo)};
}

Verdict goal_convergence(const GridData& g) {
    const auto& cell = g.main.find(20, 0.1);
    int seeds_ok = 0;
    std::string counts;
    for (const auto& run : cell.runs) {
        const std::size_t n = run.iterations.size(), window = n / 10;
        int converged = 0;
        for (std::size_t k = 0; k < run.goals.size(); ++k) {
            const auto truth = run.goals[k].truth;
            auto err = [&](std::size_t from, std::size_t to) {
                double s = 0.0;
                for (std::size_t i = from; i < to; ++i) {
                    const auto p = run.iterations[i].goal_predictions[k];
                    s += std::hypot(p.x - truth.x, p.y - truth.y);
                }
                return s / static_cast<double>(to - from);
            };
            if (err(n - window, n) < 0.5 * err(0, window)) ++converged;
        }
        if (converged >= 7) ++seeds_ok;
        counts += (counts.empty() ? "" : ",") + std::to_string(converged);
    }
    const int needed = static_cast<int>(cell.runs.size()) / 2 + 1;
    return {seeds_ok >= needed, "converged goals per seed [" + counts + "] of 9; " + std::to_string(seeds_ok) + "/" +
                                    std::to_string(cell.runs.size()) + " seeds with >= 7"};
}

Verdict concentration(const GridData& g) {
    const auto& cell = g.main.find(20, 0.1);
    int seeds_ok = 0;
    std::string detail;
    for (std::size_t r = 0; r < cell.runs.size(); ++r) {
        const auto& run = cell.runs[r];
        std::vector<Point> goals;
        for (const auto& gi : run.goals) goals.push_back({gi.truth.x, gi.truth.y});
        const auto rows = experiment::explore_rows(run);
        const double last = experiment::goal_concentration(rows, goals, 0.1).back();
        const double base = experiment::disk_union_coverage(goals, 0.1, 1000000, derive_seed(808, r));
        if (last > base) ++seeds_ok;
        detail += fmt(last, 3) + ">" + fmt(base, 3) + "? ";
    }
    bool monotone = true;
    for (const auto* grid : {&g.main, &g.low})
        for (const auto& c : grid->cells)
            for (const auto& run : c.runs) {
                std::vector<Point> pts;
                for (const auto& it : run.iterations) pts.push_back({it.executed.x, it.executed.y});
                const auto areas = geometry::cumulative_hull_area(pts);
                for (std::size_t i = 1; i < areas.size(); ++i) monotone = monotone && areas[i] >= areas[i - 1];
            }
    const int needed = static_cast<int>(cell.runs.size()) / 2 + 1;
    return {seeds_ok >= needed && monotone, "last-quintile concentration vs coverage: " + detail + "(" +
                                                std::to_string(seeds_ok) + " seeds); hull monotone " +
                                                (monotone ? "in every run" : "VIOLATED")};
}

Verdict determinism(const Args& args) {
    const fs::path dir = args.work_dir / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "small.cfg";
    {
        std::ofstream out(cfg);
        out << "world.grid_w = 20\nworld.grid_h = 20\nencoder.latent_dim = 8\nencoder.epochs = 3\n"
               "loop.iterations = 300\nmemory.batches = 4\n"
               "grid.mem_batches = 0, 4\ngrid.p_em = 0.1\ngrid.runs = 3\n";
    }
    auto sh = [&](const std::string& rest) {
        const std::string cmd = "\"" + args.cli + "\" " + rest + " > \"" + (dir / "cli.log").string() + "\" 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const std::string c = "--config \"" + cfg.string() + "\"";
    bool ok = sh("run " + c + " --seed 5 --out \"" + (dir / "run_a").string() + "\"") &&
              sh("run " + c + " --seed 5 --out \"" + (dir / "run_b").string() + "\"");
    if (!ok) return {false, "cli run failed, see " + (dir / "cli.log").string()};
    const auto ra = tree(dir / "run_a"), rb = tree(dir / "run_b");
    std::size_t csvs = 0;
    for (const auto& [name, body] : ra) {
        if (fs::path(name).extension() != ".csv") continue;
        ++csvs;
        if (!rb.count(name) || rb.at(name) != body) ok = false;
    }
    const bool run_same = ok && csvs > 0 && ra == rb;

    const bool grids_ran = sh("grid " + c + " --parallelism 1 --out \"" + (dir / "grid_p1").string() + "\"") &&
                           sh("grid " + c + " --parallelism " + std::to_string(std::max(2, args.parallelism)) +
                              " --out \"" + (dir / "grid_pn").string() + "\"");
    if (!grids_ran) return {false, "cli grid failed, see " + (dir / "cli.log").string()};
    const auto ga = tree(dir / "grid_p1"), gb = tree(dir / "grid_pn");
    const bool grid_same = !ga.empty() && ga == gb;
    return {run_same && grid_same, "run: " + std::to_string(csvs) + " CSVs " + (run_same ? "identical" : "DIFFER") +
                                       "; grid parallelism 1 vs " + std::to_string(std::max(2, args.parallelism)) +
                                       ": " + std::to_string(ga.size()) + " files " +
                                       (grid_same ? "identical" : "DIFFER")};
}

Verdict autoencoder(const agent::Environment& env, double secs) {
    Rng rng(1010);
    const auto untrained = encoder::build_autoencoder(env.world->img_w, env.world->img_h, env.autoencoder->latent_dim, rng);
    const double base = encoder::reconstruction_mse(untrained, env.world->images);
    const double trained = encoder::reconstruction_mse(*env.autoencoder, env.world->images);
    const bool ok = trained < 0.5 * base && env.heldout_mse < 2.0 * env.train_mse && secs < 300.0;
    return {ok, "mse " + fmt(trained) + " vs untrained " + fmt(base) + "; train " + fmt(env.train_mse) + ", held-out " +
                    fmt(env.heldout_mse) + "; " + fmt(secs, 3) + " s"};
}

Verdict hulls() {
    Rng rng(1111);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + uniform_index(rng, 50);
        std::vector<Point> pts;
        const int mode = trial % 5;
        for (std::size_t i = 0; i < n; ++i) {
            switch (mode) {
                case 0: pts.push_back({uniform01(rng), uniform01(rng)}); break;
                case 1: pts.push_back({static_cast<double>(uniform_index(rng, 5)) / 4, static_cast<double>(uniform_index(rng, 5)) / 4}); break;
                case 2: {
                    const double t = static_cast<double>(uniform_index(rng, 9)) / 8;
                    pts.push_back({t, 0.25 + 0.5 * t});
                    break;
                }
                case 3: pts.push_back({0.5, static_cast<double>(uniform_index(rng, 3)) / 2}); break;
                default: pts.push_back(i % 4 == 0 || pts.empty() ? Point{uniform01(rng), uniform01(rng)} : pts.back());
            }
        }
        const auto fast = geometry::convex_hull(pts);
        const auto [verts, area] = brute_force_hull(pts);
        const std::set<Point> got(fast.vertices.begin(), fast.vertices.end());
        if (got != verts || got.size() != fast.vertices.size() || std::abs(fast.area - area) > 1e-12) ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 point sets"};
}

}  // namespace

int main(int argc, char** argv) {
    Args args;
    try {
        args = parse_args(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << "\n";
        return 2;
    }
    fs::create_directories(args.work_dir);

    const std::vector<Criterion> criteria{
        {1, "gradient check on model architectures", true},
        {2, "learning progress against high-precision tanh", true},
        {3, "episodic memory replacement statistics", true},
        {4, "episodic memory reduces final forward and inverse MSE", true},
        {5, "memory-size ordering of final forward MSE", true},
        {6, "faster replacement learns faster early (report only)", false},
        {7, "inverse predictions converge to goal positions", true},
        {8, "exploration concentrates on goals; hull area monotone", true},
        {9, "runs and grids are reproducible", true},
        {10, "autoencoder pretraining", true},
        {11, "convex hull against brute force", true},
    };

    std::map<int, Verdict> verdicts;
    auto guarded = [&](int id, const std::function<Verdict()>& f) {
        try {
            verdicts[id] = f();
        } catch (const std::exception& e) {
            verdicts[id] = {false, std::string("error: ") + e.what()};
        }
    };

    guarded(1, gradients);
    guarded(2, learning_progress_suite);
    guarded(3, memory_statistics);
    guarded(11, hulls);
    guarded(9, [&] { return determinism(args); });

    std::optional<agent::Environment> env;
    const agent::RunConfig base;  // 50x50 world, 16x16 images, L = 16, 2000 iterations
    double env_secs = 0.0;
    guarded(10, [&] {
        const auto start = std::chrono::steady_clock::now();
        env = agent::prepare_environment(base);
        env_secs = seconds_since(start);
        return autoencoder(*env, env_secs);
    });

    if (env) {
        GridData grid;
        try {
            const auto start = std::chrono::steady_clock::now();
            experiment::GridConfig main;
            main.base = base;
            main.mem_batches_values = {0, 10, 20};
            main.p_em_values = {0.1};
            main.runs_per_cell = 5;
            main.output_root = args.work_dir / "grid";
            grid.main = experiment::run_grid(main, args.parallelism, &*env);
            experiment::GridConfig low = main;
            low.mem_batches_values = {10};
            low.p_em_values = {0.01};
            low.output_root = args.work_dir / "grid_low";
            grid.low = experiment::run_grid(low, args.parallelism, &*env);
            grid.seconds = seconds_since(start);
            guarded(4, [&] { return forgetting(grid); });
            guarded(5, [&] { return ordering(grid); });
            guarded(6, [&] { return plasticity(grid, base.iterations / 10); });
            guarded(7, [&] { return goal_convergence(grid); });
            guarded(8, [&] { return concentration(grid); });
        } catch (const std::exception& e) {
            for (int id : {4, 5, 6, 7, 8}) verdicts[id] = {false, std::string("grid error: ") + e.what()};
        }
    } else {
        for (int id : {4, 5, 6, 7, 8}) verdicts[id] = {false, "environment unavailable"};
    }

    bool gating_failed = false;
    for (const auto& c : criteria) {
        const auto& v = verdicts[c.id];
        std::cout << "criterion " << std::setw(2) << c.id << " " << (v.pass ? "PASS" : "FAIL") << "  " << c.title
                  << " | " << v.detail << "\n";
        if (c.gating && !v.pass) gating_failed = true;
    }
    std::cout.flush();
    return gating_failed ? 1 : 0;
}
