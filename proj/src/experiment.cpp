#include "curio/experiment.hpp"

#include "curio/config.hpp"
#include "curio/csv.hpp"
#include "curio/stats.hpp"
#include "curio/svg.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

namespace curio::experiment {

namespace {

std::string run_dir_name(int run) { return "run" + std::to_string(run); }

struct Job {
    std::size_t cell;
    int run;
};

std::vector<ExploreRow> rows_from_csv(const csv::Table& t) {
    const auto it = t.column("iteration"), gid = t.column("goal_id"), rnd = t.column("was_random"),
               ex = t.column("exec_x"), ey = t.column("exec_y");
    std::vector<ExploreRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows)
        rows.push_back({static_cast<int>(r[it]), static_cast<int>(r[gid]), r[rnd] != 0.0, {r[ex], r[ey]}});
    return rows;
}

std::vector<agent::EvalRecord> evals_from_csv(const csv::Table& t) {
    const auto it = t.column("iteration"), f = t.column("fwd_mse"), i = t.column("inv_mse");
    std::vector<agent::EvalRecord> out;
    for (const auto& r : t.rows) out.push_back({static_cast<int>(r[it]), r[f], r[i]});
    return out;
}

svg::Series band(const std::string& name, const std::vector<int>& ticks, const std::vector<double>& mean,
                 const std::vector<double>& sd) {
    svg::Series s;
    s.name = name;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        s.x.push_back(ticks[i]);
        s.y.push_back(mean[i]);
        s.lo.push_back(mean[i] - sd[i]);
        s.hi.push_back(mean[i] + sd[i]);
    }
    return s;
}

void write_pair(const std::filesystem::path& out_dir, const std::string& stem, const std::string& svg_text,
                const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    svg::write_file(out_dir / (stem + ".svg"), svg_text);
    csv::write(out_dir / (stem + ".csv"), header, rows);
}

}  // namespace

void GridConfig::validate() const {
    if (mem_batches_values.empty() || p_em_values.empty()) throw GridError("grid value lists must be non-empty");
    if (runs_per_cell < 1) throw GridError("runs_per_cell must be >= 1");
    for (int m : mem_batches_values)
        if (m < 0) throw GridError("memory sizes must be non-negative");
    for (double p : p_em_values)
        if (!(p >= 0.0 && p <= 1.0)) throw GridError("p_em values must lie in [0,1]");
    base.validate();
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, int mem_batches, double p_em, int run_index) {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(mem_batches)));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(p_em));
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(run_index)));
    return h;
}

std::string cell_name(const GridCell& cell) {
    return "mem" + std::to_string(cell.mem_batches) + "_pem" + config::format_double(cell.p_em);
}

AggregateCurve aggregate(std::span<const std::vector<agent::EvalRecord>> runs) {
    AggregateCurve c;
    c.runs = runs.size();
    if (runs.empty()) return c;
    const auto& first = runs.front();
    for (const auto& r : runs) {
        if (r.size() != first.size()) throw GridError("aggregate: runs have different evaluation counts");
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i].iteration != first[i].iteration) throw GridError("aggregate: evaluation ticks differ");
    }
    std::vector<double> f(runs.size()), v(runs.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (std::size_t k = 0; k < runs.size(); ++k) {
            f[k] = runs[k][i].fwd_mse;
            v[k] = runs[k][i].inv_mse;
        }
        c.ticks.push_back(first[i].iteration);
        c.fwd_mean.push_back(stats::mean(f));
        c.fwd_std.push_back(stats::stddev(f));
        c.inv_mean.push_back(stats::mean(v));
        c.inv_std.push_back(stats::stddev(v));
    }
    return c;
}

const CellResult& GridResult::find(int mem_batches, double p_em) const {
    for (const auto& c : cells)
        if (c.cell.mem_batches == mem_batches && c.cell.p_em == p_em) return c;
    throw GridError("no grid cell mem=" + std::to_string(mem_batches) + " p_em=" + config::format_double(p_em));
}

GridResult run_grid(const GridConfig& cfg, int parallelism, const agent::Environment* env) {
    cfg.validate();
    agent::Environment own;
    if (!env) {
        own = agent::prepare_environment(cfg.base);
        env = &own;
    }

    GridResult result;
    std::vector<Job> jobs;
    for (int m : cfg.mem_batches_values) {
        for (double p : cfg.p_em_values) {
            CellResult cell;
            cell.cell = {m, p};
            for (int r = 0; r < cfg.runs_per_cell; ++r) cell.seeds.push_back(derive_run_seed(cfg.base_seed, m, p, r));
            cell.runs.resize(static_cast<std::size_t>(cfg.runs_per_cell));
            for (int r = 0; r < cfg.runs_per_cell; ++r) jobs.push_back({result.cells.size(), r});
            result.cells.push_back(std::move(cell));
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_job = jobs.size();
    std::string error_text;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            CellResult& cell = result.cells[jobs[j].cell];
            const int r = jobs[j].run;
            try {
                agent::RunConfig rc = cfg.base;
                rc.mem_batches = cell.cell.mem_batches;
                rc.p_em = cell.cell.p_em;
                rc.seed = cell.seeds[static_cast<std::size_t>(r)];
                cell.runs[static_cast<std::size_t>(r)] = agent::run_session(rc, env);
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (j < error_job) {
                    error_job = j;
                    error_text = cell_name(cell.cell) + "/" + run_dir_name(r) + ": " + e.what();
                }
            }
        }
    };
    const int threads = std::clamp(parallelism, 1, static_cast<int>(jobs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error_job < jobs.size()) {
        std::string where = cfg.output_root.empty() ? "" : " (output root " + cfg.output_root.string() + ")";
        throw GridError("grid run failed at " + error_text + where);
    }

    for (auto& cell : result.cells) {
        std::vector<std::vector<agent::EvalRecord>> evals;
        for (const auto& run : cell.runs) evals.push_back(run.evals);
        cell.curve = aggregate(evals);
    }
    if (!cfg.output_root.empty()) write_grid_outputs(result, cfg.output_root);
    return result;
}

void write_grid_outputs(const GridResult& result, const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    std::vector<std::vector<double>> manifest;
    for (const auto& cell : result.cells) {
        const std::string name = cell_name(cell.cell);
        for (std::size_t r = 0; r < cell.runs.size(); ++r) {
            const auto& run = cell.runs[r];
            agent::write_run_outputs(run, root / name / run_dir_name(static_cast<int>(r)));
            const double ff = run.evals.empty() ? std::nan("") : run.evals.back().fwd_mse;
            const double fi = run.evals.empty() ? std::nan("") : run.evals.back().inv_mse;
            manifest.push_back({static_cast<double>(cell.cell.mem_batches), cell.cell.p_em, static_cast<double>(r),
                                static_cast<double>(cell.seeds[r] >> 11), ff, fi});
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < cell.curve.ticks.size(); ++i)
            rows.push_back({static_cast<double>(cell.curve.ticks[i]), cell.curve.fwd_mean[i], cell.curve.fwd_std[i],
                            cell.curve.inv_mean[i], cell.curve.inv_std[i]});
        csv::write(root / ("aggregate_" + name + ".csv"), {"iteration", "fwd_mean", "fwd_std", "inv_mean", "inv_std"},
                   rows);
    }
    // seed_hi is the run seed shifted right by 11 bits so it stays exact as a double.
    csv::write(root / "grid.csv", {"mem_batches", "p_em", "run", "seed_hi", "final_fwd_mse", "final_inv_mse"},
               manifest);
}

std::vector<ExploreRow> explore_rows(const agent::RunLog& log) {
    std::vector<ExploreRow> rows;
    rows.reserve(log.iterations.size());
    for (const auto& r : log.iterations)
        rows.push_back({r.iteration, r.goal_id, r.was_random, {r.executed.x, r.executed.y}});
    return rows;
}

std::vector<double> goal_concentration(std::span<const ExploreRow> rows, std::span<const geometry::Point> goals,
                                       double radius, int bins) {
    if (!(radius > 0.0)) throw std::invalid_argument("goal_concentration: radius must be positive");
    if (bins < 1) throw std::invalid_argument("goal_concentration: bins must be >= 1");
    std::vector<const ExploreRow*> directed;
    for (const auto& r : rows)
        if (!r.was_random) directed.push_back(&r);
    std::vector<double> out(static_cast<std::size_t>(bins), std::nan(""));
    const std::size_t n = directed.size();
    for (int b = 0; b < bins; ++b) {
        const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(bins);
        const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(bins);
        if (hi <= lo) continue;
        std::size_t near = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& row = *directed[i];
            const auto& g = goals[static_cast<std::size_t>(row.goal_id)];
            if (std::hypot(row.executed.x - g.x, row.executed.y - g.y) <= radius) ++near;
        }
        out[static_cast<std::size_t>(b)] = static_cast<double>(near) / static_cast<double>(hi - lo);
    }
    return out;
}

double disk_union_coverage(std::span<const geometry::Point> centres, double radius, std::size_t samples,
                           std::uint64_t seed) {
    if (samples == 0) throw std::invalid_argument("disk_union_coverage: need samples");
    Rng rng(seed);
    std::size_t inside = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double x = uniform01(rng), y = uniform01(rng);
        for (const auto& c : centres) {
            if ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= radius * radius) {
                ++inside;
                break;
            }
        }
    }
    return static_cast<double>(inside) / static_cast<double>(samples);
}

void emit_reports(const std::filesystem::path& grid_root, const std::filesystem::path& out_dir) {
    const csv::Table manifest = csv::read(grid_root / "grid.csv");
    std::filesystem::create_directories(out_dir);

    struct CellRuns {
        GridCell cell;
        std::vector<int> runs;
    };
    std::vector<CellRuns> cells;
    const auto mc = manifest.column("mem_batches"), pc = manifest.column("p_em"), rc = manifest.column("run");
    for (const auto& row : manifest.rows) {
        const GridCell c{static_cast<int>(row[mc]), row[pc]};
        auto it = std::find_if(cells.begin(), cells.end(), [&](const CellRuns& x) {
            return x.cell.mem_batches == c.mem_batches && x.cell.p_em == c.p_em;
        });
        if (it == cells.end()) {
            cells.push_back({c, {}});
            it = cells.end() - 1;
        }
        it->runs.push_back(static_cast<int>(row[rc]));
    }

    std::map<std::string, AggregateCurve> curves;
    std::vector<std::vector<double>> summary;
    for (const auto& cr : cells) {
        const std::string name = cell_name(cr.cell);
        std::vector<std::vector<agent::EvalRecord>> evals;
        std::vector<double> hull_areas;
        std::vector<std::vector<double>> conc;
        for (int r : cr.runs) {
            const auto dir = grid_root / name / run_dir_name(r);
            evals.push_back(evals_from_csv(csv::read(dir / "mse.csv")));
            const auto rows = rows_from_csv(csv::read(dir / "explore.csv"));
            const auto goal_table = csv::read(dir / "goal_set.csv");
            std::vector<geometry::Point> goals;
            for (const auto& g : goal_table.rows)
                goals.push_back({g[goal_table.column("true_x")], g[goal_table.column("true_y")]});
            std::vector<geometry::Point> pts;
            for (const auto& row : rows) pts.push_back(row.executed);
            hull_areas.push_back(geometry::convex_hull(pts).area);
            conc.push_back(goal_concentration(rows, goals, 0.1));

            if (r == cr.runs.front()) {
                // Exploration scatter, all points and goal-directed only.
                for (bool directed_only : {false, true}) {
                    svg::ScatterChart sc;
                    sc.title = name + " run " + std::to_string(r) + (directed_only ? " (goal-directed moves)" : " (all moves)");
                    svg::ScatterLayer explored{"explored", {}, "#2ca02c", 1.5};
                    for (const auto& row : rows)
                        if (!directed_only || !row.was_random) explored.points.push_back(row.executed);
                    sc.hull = geometry::convex_hull(explored.points).vertices;
                    sc.layers.push_back(explored);
                    sc.layers.push_back({"goals", goals, "#d62728", 4.0});
                    std::vector<std::vector<double>> data;
                    for (const auto& p : explored.points) data.push_back({0, p.x, p.y});
                    for (const auto& p : goals) data.push_back({1, p.x, p.y});
                    for (const auto& p : sc.hull) data.push_back({2, p.x, p.y});
                    write_pair(out_dir, std::string(directed_only ? "explore_directed_" : "explore_") + name + "_run" + std::to_string(r),
                               svg::render(sc), {"layer", "x", "y"}, data);
                }

                // Learning-progress dynamics.
                const auto lp = csv::read(dir / "lp.csv");
                svg::LineChart lc;
                lc.title = "learning progress, " + name + " run " + std::to_string(r);
                lc.x_label = "iteration";
                lc.y_label = "LP";
                for (std::size_t g = 0; g < goals.size(); ++g) {
                    svg::Series s;
                    s.name = "goal " + std::to_string(g);
                    s.x = lp.values("iteration");
                    s.y = lp.values("lp_" + std::to_string(g));
                    lc.series.push_back(std::move(s));
                }
                write_pair(out_dir, "lp_" + name + "_run" + std::to_string(r), svg::render(lc), lp.header, lp.rows);

                // Inverse-model prediction error per goal over time.
                const auto gp = csv::read(dir / "goals.csv");
                svg::LineChart gc;
                gc.title = "goal prediction error, " + name + " run " + std::to_string(r);
                gc.x_label = "iteration";
                gc.y_label = "|pred - truth|";
                gc.y_min = 0.0;
                std::vector<std::vector<double>> data;
                std::vector<svg::Series> per_goal(goals.size());
                for (std::size_t g = 0; g < goals.size(); ++g) per_goal[g].name = "goal " + std::to_string(g);
                for (const auto& row : gp.rows) {
                    const auto g = static_cast<std::size_t>(row[gp.column("goal_id")]);
                    const double err = std::hypot(row[gp.column("pred_x")] - row[gp.column("true_x")],
                                                  row[gp.column("pred_y")] - row[gp.column("true_y")]);
                    per_goal.at(g).x.push_back(row[gp.column("iteration")]);
                    per_goal.at(g).y.push_back(err);
                    data.push_back({row[gp.column("iteration")], static_cast<double>(g), err});
                }
                gc.series = std::move(per_goal);
                write_pair(out_dir, "goalpred_" + name + "_run" + std::to_string(r), svg::render(gc),
                           {"iteration", "goal_id", "error"}, data);
            }
        }
        const AggregateCurve curve = aggregate(evals);
        curves[name] = curve;

        svg::LineChart lc;
        lc.title = "MSE, " + name + " (" + std::to_string(curve.runs) + " runs)";
        lc.x_label = "iteration";
        lc.y_label = "MSE";
        lc.series.push_back(band("forward", curve.ticks, curve.fwd_mean, curve.fwd_std));
        lc.series.push_back(band("inverse", curve.ticks, curve.inv_mean, curve.inv_std));
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < curve.ticks.size(); ++i)
            rows.push_back({static_cast<double>(curve.ticks[i]), curve.fwd_mean[i], curve.fwd_std[i],
                            curve.inv_mean[i], curve.inv_std[i]});
        write_pair(out_dir, "mse_" + name, svg::render(lc), {"iteration", "fwd_mean", "fwd_std", "inv_mean", "inv_std"},
                   rows);

        std::vector<double> srow{static_cast<double>(cr.cell.mem_batches), cr.cell.p_em,
                                 static_cast<double>(cr.runs.size())};
        if (!curve.ticks.empty()) {
            srow.insert(srow.end(), {curve.fwd_mean.back(), curve.fwd_std.back(), curve.inv_mean.back(),
                                     curve.inv_std.back()});
        } else {
            srow.insert(srow.end(), 4, std::nan(""));
        }
        srow.push_back(stats::mean(hull_areas));
        for (int q = 0; q < 5; ++q) {
            std::vector<double> v;
            for (const auto& c : conc)
                if (!std::isnan(c[static_cast<std::size_t>(q)])) v.push_back(c[static_cast<std::size_t>(q)]);
            srow.push_back(v.empty() ? std::nan("") : stats::mean(v));
        }
        summary.push_back(std::move(srow));
    }
    csv::write(out_dir / "summary.csv",
               {"mem_batches", "p_em", "runs", "final_fwd_mean", "final_fwd_std", "final_inv_mean", "final_inv_std",
                "hull_area_mean", "conc_q1", "conc_q2", "conc_q3", "conc_q4", "conc_q5"},
               summary);

    // Comparison charts: memory sizes at fixed p_em, and p_em values at fixed memory size.
    auto compare = [&](const std::string& stem, const std::string& title, const std::vector<GridCell>& group) {
        if (group.size() < 2) return;
        for (int metric = 0; metric < 2; ++metric) {
            svg::LineChart lc;
            lc.title = title + (metric == 0 ? " - forward MSE" : " - inverse MSE");
            lc.x_label = "iteration";
            lc.y_label = "MSE";
            std::vector<std::string> header{"iteration"};
            std::vector<std::vector<double>> rows;
            for (const auto& c : group) {
                const auto& cv = curves.at(cell_name(c));
                lc.series.push_back(band(cell_name(c), cv.ticks, metric == 0 ? cv.fwd_mean : cv.inv_mean,
                                         metric == 0 ? cv.fwd_std : cv.inv_std));
                header.push_back(cell_name(c) + "_mean");
                header.push_back(cell_name(c) + "_std");
            }
            const auto& ticks = curves.at(cell_name(group.front())).ticks;
            for (std::size_t i = 0; i < ticks.size(); ++i) {
                std::vector<double> row{static_cast<double>(ticks[i])};
                for (const auto& c : group) {
                    const auto& cv = curves.at(cell_name(c));
                    row.push_back(metric == 0 ? cv.fwd_mean.at(i) : cv.inv_mean.at(i));
                    row.push_back(metric == 0 ? cv.fwd_std.at(i) : cv.inv_std.at(i));
                }
                rows.push_back(std::move(row));
            }
            write_pair(out_dir, stem + (metric == 0 ? "_fwd" : "_inv"), svg::render(lc), header, rows);
        }
    };
    std::vector<double> pems;
    std::vector<int> mems;
    for (const auto& cr : cells) {
        if (std::find(pems.begin(), pems.end(), cr.cell.p_em) == pems.end()) pems.push_back(cr.cell.p_em);
        if (std::find(mems.begin(), mems.end(), cr.cell.mem_batches) == mems.end()) mems.push_back(cr.cell.mem_batches);
    }
    for (double p : pems) {
        std::vector<GridCell> g;
        for (const auto& cr : cells)
            if (cr.cell.p_em == p) g.push_back(cr.cell);
        compare("compare_pem" + config::format_double(p), "p_em = " + config::format_double(p), g);
    }
    for (int m : mems) {
        if (m == 0) continue;
        std::vector<GridCell> g;
        for (const auto& cr : cells)
            if (cr.cell.mem_batches == m) g.push_back(cr.cell);
        compare("compare_mem" + std::to_string(m), "memory = " + std::to_string(m) + " batches", g);
    }
}

}  // namespace curio::experiment
