#pragma once

// Experiment grid over (memory size, p_em, run), multi-seed aggregation and
// the exploration analyses used by the reports.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "curio/agent.hpp"
#include "curio/geometry.hpp"

namespace curio::experiment {

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    std::vector<int> mem_batches_values{0, 10, 20};
    std::vector<double> p_em_values{0.1, 0.01};
    int runs_per_cell = 5;
    std::uint64_t base_seed = 1;
    agent::RunConfig base;
    std::filesystem::path output_root;  // empty: keep results in memory only

    void validate() const;
};

struct GridCell {
    int mem_batches = 0;
    double p_em = 0.0;
};

/// Stable seed for one run of one cell.
std::uint64_t derive_run_seed(std::uint64_t base_seed, int mem_batches, double p_em, int run_index);

/// Directory name of a cell, e.g. "mem20_pem0.1".
std::string cell_name(const GridCell& cell);

struct AggregateCurve {
    std::vector<int> ticks;
    std::vector<double> fwd_mean, fwd_std, inv_mean, inv_std;
    std::size_t runs = 0;
};

/// Mean and population stddev across runs at every evaluation tick. All runs
/// must share the same ticks.
AggregateCurve aggregate(std::span<const std::vector<agent::EvalRecord>> runs);

struct CellResult {
    GridCell cell;
    std::vector<std::uint64_t> seeds;
    std::vector<agent::RunLog> runs;
    AggregateCurve curve;
};

struct GridResult {
    std::vector<CellResult> cells;

    const CellResult& find(int mem_batches, double p_em) const;
};

/// Runs every cell of the grid with up to `parallelism` concurrent runs. The
/// world and encoder are built once from cfg.base and shared read-only.
/// Results do not depend on `parallelism`.
GridResult run_grid(const GridConfig& cfg, int parallelism, const agent::Environment* env = nullptr);

/// Writes <root>/grid.csv, <root>/aggregate_<cell>.csv and every run's logs
/// under <root>/<cell>/run<k>/.
void write_grid_outputs(const GridResult& result, const std::filesystem::path& root);

struct ExploreRow {
    int iteration = 0;
    int goal_id = 0;
    bool was_random = false;
    geometry::Point executed;
};

std::vector<ExploreRow> explore_rows(const agent::RunLog& log);

/// For each of `bins` consecutive, equally sized chunks of the goal-directed
/// (non-random) rows: the fraction of executed positions within `radius` of
/// the selected goal's ground-truth position.
std::vector<double> goal_concentration(std::span<const ExploreRow> rows, std::span<const geometry::Point> goals,
                                       double radius, int bins = 5);

/// Monte-Carlo estimate of the share of [0,1]^2 covered by the union of the
/// radius-`radius` disks around `centres`.
double disk_union_coverage(std::span<const geometry::Point> centres, double radius, std::size_t samples,
                           std::uint64_t seed);

/// Renders charts (SVG) with sibling CSVs from a grid directory written by
/// write_grid_outputs.
void emit_reports(const std::filesystem::path& grid_root, const std::filesystem::path& out_dir);

}  // namespace curio::experiment
