#pragma once

// Synthetic top-down camera world: a grid of camera positions, each mapped to
// a small grayscale image of a field of Gaussian "plants". Stands in for a
// pre-recorded full scan of the robot's (x, y) workspace.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "curio/rng.hpp"

namespace curio::world {

class WorldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normalized motor command; each axis spans [0, 1].
struct MotorCommand {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const MotorCommand&) const = default;
};

MotorCommand clamp_unit(MotorCommand m);

struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;  // row-major, values in [0, 1]

    float at(int row, int col) const { return pixels[static_cast<std::size_t>(row * width + col)]; }
    bool operator==(const Image&) const = default;
};

struct Extent {
    double x_min = 0.0, x_max = 245.0;
    double y_min = 0.0, y_max = 245.0;

    double width_mm() const { return x_max - x_min; }
    double height_mm() const { return y_max - y_min; }
    bool operator==(const Extent&) const = default;
};

struct GridCell {
    int ix = 0;
    int iy = 0;

    bool operator==(const GridCell&) const = default;
};

struct WorldDataset {
    int grid_w = 0;
    int grid_h = 0;
    int img_w = 0;
    int img_h = 0;
    Extent extent;
    std::vector<Image> images;  // y-major: index = iy * grid_w + ix

    std::size_t cell_count() const { return static_cast<std::size_t>(grid_w) * static_cast<std::size_t>(grid_h); }
    std::size_t index(GridCell c) const { return static_cast<std::size_t>(c.iy) * grid_w + c.ix; }
    GridCell cell(std::size_t index) const {
        return {static_cast<int>(index % grid_w), static_cast<int>(index / grid_w)};
    }
    const Image& image(GridCell c) const { return images.at(index(c)); }
    /// Normalized motor position of a grid cell's centre.
    MotorCommand position(GridCell c) const;

    bool operator==(const WorldDataset&) const = default;
};

struct Blob {
    double x = 0.0;  // world coordinates, same units as the normalized motor space
    double y = 0.0;
    double radius = 0.05;  // Gaussian standard deviation
    double amplitude = 1.0;
};

struct WorldConfig {
    int grid_w = 50;
    int grid_h = 50;
    int img_w = 16;
    int img_h = 16;
    Extent extent;
    int blob_count = 10;
    double blob_radius_min = 0.15;
    double blob_radius_max = 0.3;
    double amplitude_min = 0.5;
    double amplitude_max = 1.0;
    /// Side of the square camera window, as a fraction of the workspace.
    double window_fraction = 0.8;
};

/// Renders every grid cell's image of an explicit blob field.
WorldDataset render_world(const WorldConfig& cfg, const std::vector<Blob>& blobs);

/// Seeded random blob field. Blobs are scattered over the workspace plus half
/// a window margin so edge views are populated too.
WorldDataset generate_world(const WorldConfig& cfg, Rng& rng);

/// Nearest grid cell; exact midpoints go to the lower index.
GridCell snap_to_grid(MotorCommand pos, const WorldDataset& world);

/// Points from `from` to `to` inclusive with spacing <= step_mm along the segment.
std::vector<MotorCommand> interpolate_trajectory(MotorCommand from, MotorCommand to, double step_mm,
                                                 const WorldDataset& world);

struct Observation {
    MotorCommand position;
    GridCell cell;
    Image image;
};

struct SimState {
    const WorldDataset* world = nullptr;
    MotorCommand position{0.5, 0.5};
};

/// Moves to the clamped `target`, returning `samples_per_move` evenly spaced
/// observations that end at the target.
std::vector<Observation> execute_move(SimState& state, MotorCommand target, int samples_per_move);

void save_dataset(const WorldDataset& world, const std::filesystem::path& path);
WorldDataset load_dataset(const std::filesystem::path& path);

}  // namespace curio::world
