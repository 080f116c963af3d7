#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curio/world.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace curio;
using namespace curio::world;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "curio_test_world";
    std::filesystem::create_directories(dir);
    return dir / name;
}

WorldConfig small_config() {
    WorldConfig cfg;
    cfg.grid_w = 12;
    cfg.grid_h = 9;
    cfg.img_w = 6;
    cfg.img_h = 5;
    return cfg;
}

double mean_abs_diff(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
    return s / static_cast<double>(a.pixels.size());
}

}  // namespace

TEST_CASE("grid positions") {
    Rng rng(1);
    const auto w = generate_world(small_config(), rng);
    CHECK(w.position({0, 0}) == MotorCommand{0.0, 0.0});
    CHECK(w.position({11, 8}) == MotorCommand{1.0, 1.0});
    CHECK(w.position({3, 4}).x == doctest::Approx(3.0 / 11.0));
    CHECK(w.position({3, 4}).y == doctest::Approx(0.5));
    CHECK(w.cell(w.index({7, 5})) == GridCell{7, 5});
}

TEST_CASE("snap_to_grid") {
    WorldConfig cfg;
    cfg.blob_count = 0;
    Rng rng(1);
    const auto w = generate_world(cfg, rng);
    CHECK(snap_to_grid({0, 0}, w) == GridCell{0, 0});
    CHECK(snap_to_grid({1, 1}, w) == GridCell{49, 49});
    const double step = 1.0 / 49.0;
    CHECK(snap_to_grid({0.5 * step, 0.5 * step}, w) == GridCell{0, 0});
    CHECK(snap_to_grid({10.5 * step, 30.5 * step}, w) == GridCell{10, 30});
    CHECK(snap_to_grid({10.51 * step, 30.49 * step}, w) == GridCell{11, 30});
    for (int i = 0; i < 50; ++i) CHECK(snap_to_grid(w.position({i, 49 - i}), w) == GridCell{i, 49 - i});
}

TEST_CASE("interpolate_trajectory examples") {
    WorldConfig cfg;
    cfg.blob_count = 0;
    Rng rng(1);
    const auto w = generate_world(cfg, rng);
    const double mm = 1.0 / 245.0;

    const auto pts = interpolate_trajectory({0, 0}, {0, 10 * mm}, 5.0, w);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0] == MotorCommand{0, 0});
    CHECK(pts[1].x == 0.0);
    CHECK(pts[1].y == doctest::Approx(5 * mm).epsilon(1e-12));
    CHECK(pts[2] == MotorCommand{0, 10 * mm});

    const auto same = interpolate_trajectory({0.3, 0.4}, {0.3, 0.4}, 5.0, w);
    REQUIRE(same.size() == 1);
    CHECK(same[0] == MotorCommand{0.3, 0.4});

    const auto two = interpolate_trajectory({0.1, 0.1}, {0.11, 0.12}, 100.0, w);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == MotorCommand{0.1, 0.1});
    CHECK(two[1] == MotorCommand{0.11, 0.12});

    CHECK_THROWS_AS(interpolate_trajectory({0, 0}, {1, 1}, 0.0, w), WorldError);
}

TEST_CASE("interpolate_trajectory properties") {
    WorldConfig cfg;
    cfg.blob_count = 0;
    Rng rng(2);
    const auto w = generate_world(cfg, rng);
    for (int trial = 0; trial < 200; ++trial) {
        const MotorCommand a{uniform01(rng), uniform01(rng)}, b{uniform01(rng), uniform01(rng)};
        const double step = uniform(rng, 0.5, 60.0);
        const auto pts = interpolate_trajectory(a, b, step, w);
        REQUIRE(pts.size() >= 2);
        CHECK(pts.front() == a);
        CHECK(pts.back() == b);
        const double dx = b.x - a.x, dy = b.y - a.y;
        double prev_t = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double px = pts[i].x - a.x, py = pts[i].y - a.y;
            CHECK(std::abs(px * dy - py * dx) < 1e-12);
            const double t = (px * dx + py * dy) / (dx * dx + dy * dy);
            CHECK(t > prev_t);
            prev_t = t;
            if (i > 0) {
                const double seg = std::hypot((pts[i].x - pts[i - 1].x) * 245.0, (pts[i].y - pts[i - 1].y) * 245.0);
                CHECK(seg <= step * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("execute_move") {
    WorldConfig cfg = small_config();
    Rng rng(3);
    const auto w = generate_world(cfg, rng);

    SimState s{&w, {0, 0}};
    const auto obs = execute_move(s, {1, 0}, 3);
    REQUIRE(obs.size() == 3);
    CHECK(obs[0].position.x == doctest::Approx(1.0 / 3.0));
    CHECK(obs[1].position.x == doctest::Approx(2.0 / 3.0));
    CHECK(obs[2].position == MotorCommand{1, 0});
    CHECK(s.position == MotorCommand{1, 0});
    for (const auto& o : obs) {
        CHECK(o.cell == snap_to_grid(o.position, w));
        CHECK(o.image == w.image(o.cell));
    }

    SimState t{&w, {0.5, 0.5}};
    const auto one = execute_move(t, {1.7, -0.2}, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].position == MotorCommand{1, 0});
    CHECK(one[0].cell == GridCell{11, 0});

    SimState u1{&w, {0.2, 0.9}}, u2{&w, {0.2, 0.9}};
    const auto o1 = execute_move(u1, {0.7, 0.1}, 4);
    const auto o2 = execute_move(u2, {0.7, 0.1}, 4);
    REQUIRE(o1.size() == o2.size());
    for (std::size_t i = 0; i < o1.size(); ++i) {
        CHECK(o1[i].position == o2[i].position);
        CHECK(o1[i].image == o2[i].image);
    }
}

TEST_CASE("generate_world basics") {
    WorldConfig cfg = small_config();
    cfg.blob_count = 0;
    Rng rng(4);
    const auto empty = generate_world(cfg, rng);
    CHECK(empty.images.size() == empty.cell_count());
    for (const auto& img : empty.images)
        for (float p : img.pixels) CHECK(p == 0.0f);

    cfg = small_config();
    Rng a(5), b(5), c(6);
    const auto w1 = generate_world(cfg, a), w2 = generate_world(cfg, b), w3 = generate_world(cfg, c);
    CHECK(w1 == w2);
    CHECK_FALSE(w1 == w3);
    for (const auto& img : w1.images) {
        CHECK(img.width == 6);
        CHECK(img.height == 5);
        for (float p : img.pixels) {
            CHECK(p >= 0.0f);
            CHECK(p <= 1.0f);
        }
    }

    WorldConfig bad = small_config();
    bad.grid_w = 0;
    CHECK_THROWS_AS(generate_world(bad, a), WorldError);
    bad = small_config();
    bad.img_h = -2;
    CHECK_THROWS_AS(generate_world(bad, a), WorldError);
    bad = small_config();
    bad.window_fraction = 0.0;
    CHECK_THROWS_AS(generate_world(bad, a), WorldError);
}

TEST_CASE("single centred blob seen through a full-world window") {
    WorldConfig cfg;
    cfg.grid_w = cfg.grid_h = 51;
    cfg.img_w = cfg.img_h = 15;
    cfg.window_fraction = 1.0;
    const Blob blob{0.5, 0.5, 0.1, 0.8};
    const auto w = render_world(cfg, {blob});
    const Image& img = w.image({25, 25});
    CHECK(w.position({25, 25}) == MotorCommand{0.5, 0.5});

    int best_r = -1, best_c = -1;
    float best = -1.0f;
    for (int r = 0; r < 15; ++r)
        for (int c = 0; c < 15; ++c) {
            if (img.at(r, c) > best) best = img.at(r, c), best_r = r, best_c = c;
            // Pixel centres of a unit window centred at 0.5 sit at (k + 0.5) / 15.
            const double px = (c + 0.5) / 15.0, py = (r + 0.5) / 15.0;
            const double expected =
                0.8 * std::exp(-((px - 0.5) * (px - 0.5) + (py - 0.5) * (py - 0.5)) / (2 * 0.01));
            CHECK(img.at(r, c) == doctest::Approx(expected).epsilon(1e-6));
        }
    CHECK(best_r == 7);
    CHECK(best_c == 7);
}

TEST_CASE("neighbouring views are more alike than distant ones") {
    WorldConfig cfg;
    Rng rng(7);
    const auto w = generate_world(cfg, rng);
    Rng pick(8);
    double near = 0.0, far = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const int x = static_cast<int>(uniform_index(pick, 49)), y = static_cast<int>(uniform_index(pick, 50));
        near += mean_abs_diff(w.image({x, y}), w.image({x + 1, y}));
        GridCell a{static_cast<int>(uniform_index(pick, 50)), static_cast<int>(uniform_index(pick, 50))};
        GridCell b{static_cast<int>(uniform_index(pick, 50)), static_cast<int>(uniform_index(pick, 50))};
        far += mean_abs_diff(w.image(a), w.image(b));
    }
    CHECK(near / n < 0.5 * far / n);
}

TEST_CASE("dataset round trip and corrupt files") {
    WorldConfig cfg = small_config();
    cfg.extent = {10.0, 255.5, -3.0, 120.25};
    Rng rng(9);
    const auto w = generate_world(cfg, rng);
    const auto path = temp_path("world.dat");
    save_dataset(w, path);
    const auto back = load_dataset(path);
    CHECK(back == w);
    const std::size_t expected = 9 + 16 + 32 + w.cell_count() * 30 * 4;
    CHECK(std::filesystem::file_size(path) == expected);

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto write = [](const std::filesystem::path& p, const std::string& data) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << data;
    };

    std::string magic = bytes;
    magic[3] = 'x';
    write(temp_path("magic.dat"), magic);
    CHECK_THROWS_AS(load_dataset(temp_path("magic.dat")), WorldError);

    write(temp_path("short.dat"), bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(load_dataset(temp_path("short.dat")), WorldError);

    write(temp_path("long.dat"), bytes + "zz");
    CHECK_THROWS_AS(load_dataset(temp_path("long.dat")), WorldError);

    std::string pixel = bytes;
    const float too_bright = 1.5f;
    std::memcpy(pixel.data() + 57 + 4 * 17, &too_bright, 4);
    write(temp_path("pixel.dat"), pixel);
    CHECK_THROWS_AS(load_dataset(temp_path("pixel.dat")), WorldError);

    std::string zero_dim = bytes;
    std::memset(zero_dim.data() + 9, 0, 4);
    write(temp_path("zero.dat"), zero_dim);
    CHECK_THROWS_AS(load_dataset(temp_path("zero.dat")), WorldError);

    CHECK_THROWS_AS(load_dataset(temp_path("does_not_exist.dat")), WorldError);
}
