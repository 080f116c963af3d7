#include "curio/world.hpp"

#include "curio/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace curio::world {

namespace {

constexpr char kDatasetMagic[9] = {'C', 'U', 'R', 'I', 'O', 'W', 'L', 'D', '1'};

void check_dims(int grid_w, int grid_h, int img_w, int img_h) {
    if (grid_w <= 0 || grid_h <= 0 || img_w <= 0 || img_h <= 0)
        throw WorldError("world dimensions must be positive");
}

double axis_position(int index, int count) {
    return count == 1 ? 0.5 : static_cast<double>(index) / static_cast<double>(count - 1);
}

int snap_axis(double v, int count) {
    if (count == 1) return 0;
    const double f = std::clamp(v, 0.0, 1.0) * static_cast<double>(count - 1);
    // Nearest index with .5 ties resolved downward.
    const int i = static_cast<int>(std::ceil(f - 0.5));
    return std::clamp(i, 0, count - 1);
}

}  // namespace

MotorCommand clamp_unit(MotorCommand m) {
    return {std::clamp(m.x, 0.0, 1.0), std::clamp(m.y, 0.0, 1.0)};
}

MotorCommand WorldDataset::position(GridCell c) const {
    return {axis_position(c.ix, grid_w), axis_position(c.iy, grid_h)};
}

WorldDataset render_world(const WorldConfig& cfg, const std::vector<Blob>& blobs) {
    check_dims(cfg.grid_w, cfg.grid_h, cfg.img_w, cfg.img_h);
    if (!(cfg.window_fraction > 0.0)) throw WorldError("window_fraction must be positive");
    if (!(cfg.extent.width_mm() > 0.0) || !(cfg.extent.height_mm() > 0.0))
        throw WorldError("world extent must have positive size");

    WorldDataset w;
    w.grid_w = cfg.grid_w;
    w.grid_h = cfg.grid_h;
    w.img_w = cfg.img_w;
    w.img_h = cfg.img_h;
    w.extent = cfg.extent;
    w.images.reserve(w.cell_count());

    const double win = cfg.window_fraction;
    for (int iy = 0; iy < cfg.grid_h; ++iy) {
        for (int ix = 0; ix < cfg.grid_w; ++ix) {
            const MotorCommand centre = w.position({ix, iy});
            Image img{cfg.img_w, cfg.img_h, std::vector<float>(static_cast<std::size_t>(cfg.img_w * cfg.img_h))};
            for (int r = 0; r < cfg.img_h; ++r) {
                const double py = centre.y - win / 2 + (r + 0.5) * win / cfg.img_h;
                for (int c = 0; c < cfg.img_w; ++c) {
                    const double px = centre.x - win / 2 + (c + 0.5) * win / cfg.img_w;
                    double v = 0.0;
                    for (const auto& b : blobs) {
                        const double dx = px - b.x, dy = py - b.y;
                        v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
                    }
                    img.pixels[static_cast<std::size_t>(r * cfg.img_w + c)] =
                        static_cast<float>(std::clamp(v, 0.0, 1.0));
                }
            }
            w.images.push_back(std::move(img));
        }
    }
    return w;
}

WorldDataset generate_world(const WorldConfig& cfg, Rng& rng) {
    check_dims(cfg.grid_w, cfg.grid_h, cfg.img_w, cfg.img_h);
    if (cfg.blob_count < 0) throw WorldError("blob_count must be non-negative");
    if (cfg.blob_radius_min <= 0.0 || cfg.blob_radius_max < cfg.blob_radius_min)
        throw WorldError("invalid blob radius range");
    const double margin = cfg.window_fraction / 2;
    std::vector<Blob> blobs;
    blobs.reserve(static_cast<std::size_t>(cfg.blob_count));
    for (int i = 0; i < cfg.blob_count; ++i) {
        Blob b;
        b.x = uniform(rng, -margin, 1.0 + margin);
        b.y = uniform(rng, -margin, 1.0 + margin);
        b.radius = uniform(rng, cfg.blob_radius_min, cfg.blob_radius_max);
        b.amplitude = uniform(rng, cfg.amplitude_min, cfg.amplitude_max);
        blobs.push_back(b);
    }
    return render_world(cfg, blobs);
}

GridCell snap_to_grid(MotorCommand pos, const WorldDataset& world) {
    return {snap_axis(pos.x, world.grid_w), snap_axis(pos.y, world.grid_h)};
}

std::vector<MotorCommand> interpolate_trajectory(MotorCommand from, MotorCommand to, double step_mm,
                                                 const WorldDataset& world) {
    if (!(step_mm > 0.0)) throw WorldError("trajectory step must be positive");
    const double dx = (to.x - from.x) * world.extent.width_mm();
    const double dy = (to.y - from.y) * world.extent.height_mm();
    const double length = std::hypot(dx, dy);
    if (length == 0.0) return {from};
    // Tolerate rounding so that an exact multiple of the step is not split once more.
    const auto segments = static_cast<std::size_t>(std::max(1.0, std::ceil(length / step_mm - 1e-9)));
    std::vector<MotorCommand> points;
    points.reserve(segments + 1);
    points.push_back(from);
    for (std::size_t i = 1; i < segments; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(segments);
        points.push_back({from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)});
    }
    points.push_back(to);
    return points;
}

std::vector<Observation> execute_move(SimState& state, MotorCommand target, int samples_per_move) {
    if (!state.world) throw WorldError("simulator has no world attached");
    if (samples_per_move < 1) throw WorldError("samples_per_move must be >= 1");
    const MotorCommand from = state.position;
    const MotorCommand to = clamp_unit(target);
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(samples_per_move));
    for (int k = 1; k <= samples_per_move; ++k) {
        MotorCommand p = to;
        if (k < samples_per_move) {
            const double t = static_cast<double>(k) / samples_per_move;
            p = {from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)};
        }
        const GridCell cell = snap_to_grid(p, *state.world);
        out.push_back({p, cell, state.world->image(cell)});
    }
    state.position = to;
    return out;
}

void save_dataset(const WorldDataset& world, const std::filesystem::path& path) {
    check_dims(world.grid_w, world.grid_h, world.img_w, world.img_h);
    if (world.images.size() != world.cell_count()) throw WorldError("image count does not match the grid");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw WorldError("cannot open " + path.string() + " for writing");
    out.write(kDatasetMagic, sizeof(kDatasetMagic));
    io::write_u32(out, static_cast<std::uint32_t>(world.grid_w));
    io::write_u32(out, static_cast<std::uint32_t>(world.grid_h));
    io::write_u32(out, static_cast<std::uint32_t>(world.img_w));
    io::write_u32(out, static_cast<std::uint32_t>(world.img_h));
    for (double v : {world.extent.x_min, world.extent.x_max, world.extent.y_min, world.extent.y_max})
        io::write_f64(out, v);
    for (const auto& img : world.images) {
        if (img.width != world.img_w || img.height != world.img_h)
            throw WorldError("image dimensions differ from the dataset header");
        for (float p : img.pixels) io::write_f32(out, p);
    }
    if (!out) throw WorldError("write failed for " + path.string());
}

WorldDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WorldError("cannot open " + path.string());
    try {
        char magic[sizeof(kDatasetMagic)];
        io::read_exact(in, magic, sizeof(magic));
        if (!std::equal(std::begin(magic), std::end(magic), std::begin(kDatasetMagic)))
            throw WorldError("bad magic");
        WorldDataset w;
        const std::uint32_t dims[4] = {io::read_u32(in), io::read_u32(in), io::read_u32(in), io::read_u32(in)};
        for (auto d : dims)
            if (d == 0 || d > 100000) throw WorldError("implausible dimension " + std::to_string(d));
        w.grid_w = static_cast<int>(dims[0]);
        w.grid_h = static_cast<int>(dims[1]);
        w.img_w = static_cast<int>(dims[2]);
        w.img_h = static_cast<int>(dims[3]);
        w.extent.x_min = io::read_f64(in);
        w.extent.x_max = io::read_f64(in);
        w.extent.y_min = io::read_f64(in);
        w.extent.y_max = io::read_f64(in);
        if (!(w.extent.width_mm() > 0.0) || !(w.extent.height_mm() > 0.0))
            throw WorldError("degenerate extent");
        const std::size_t pixels = static_cast<std::size_t>(w.img_w) * static_cast<std::size_t>(w.img_h);
        w.images.reserve(w.cell_count());
        for (std::size_t i = 0; i < w.cell_count(); ++i) {
            Image img{w.img_w, w.img_h, std::vector<float>(pixels)};
            for (auto& p : img.pixels) {
                p = io::read_f32(in);
                if (!(p >= 0.0f && p <= 1.0f))
                    throw WorldError("pixel out of [0,1] in cell " + std::to_string(i));
            }
            w.images.push_back(std::move(img));
        }
        if (in.peek() != std::char_traits<char>::eof()) throw WorldError("trailing bytes");
        return w;
    } catch (const io::IoError& e) {
        throw WorldError("dataset " + path.string() + ": " + e.what());
    } catch (const WorldError& e) {
        throw WorldError("dataset " + path.string() + ": " + e.what());
    }
}

}  // namespace curio::world
