#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "metanet/vision.hpp"
#include "oracles.hpp"

using namespace metanet;

namespace {

std::string fixture(const char* name) { return std::string(METANET_FIXTURES) + "/" + name; }

SimulationConfig euler(double dt = 0.1) {
    SimulationConfig s;
    s.dt = dt;
    return s;
}

// Dyadic grey levels keep 1 - (1 - p) == p exact.
Frame dyadic_pattern(int w, int h) {
    Frame f{w, h, std::vector<double>(static_cast<std::size_t>(w) * h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f.pixels[static_cast<std::size_t>(y) * w + x] = ((x * 3 + y * 5) % 8) / 8.0;
    return f;
}

std::filesystem::path scratch(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "metanet_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Detector, NeighbourhoodSizes) {
    EXPECT_EQ(neighbour_offsets(1).size(), 8u);
    EXPECT_EQ(neighbour_offsets(2).size(), 24u);
}

TEST(Detector, MetaconnectionCounts) {
    const DetectorModel m = build_detector(3, 3, DetectorConfig{});
    for (int t = 0; t < 2; ++t)
        for (std::size_t c : m.connection[t]) {
            int excite = 0, inhibit = 0;
            for (const auto& in : m.spec.vars[c].incoming) (in.coef > 0 ? excite : inhibit)++;
            EXPECT_EQ(excite, 8);
            EXPECT_EQ(inhibit, 8);
        }
}

TEST(Detector, TorusWraps) {
    DetectorConfig cfg;
    const DetectorModel m = build_detector(4, 3, cfg);
    // pixel (0, 0) reaches the connection of pixel (w-1, h-1)
    EXPECT_TRUE(m.spec.lookup({1, 12, 12}, 0).has_value());
    cfg.torus = false;
    const DetectorModel flat = build_detector(4, 3, cfg);
    EXPECT_FALSE(flat.spec.lookup({1, 12, 12}, 0).has_value());
}

TEST(Detector, RejectsTinyFrames) {
    DetectorConfig cfg;
    cfg.connection_range = 2;
    EXPECT_THROW(build_detector(3, 3, cfg), Error);
}

TEST(Detector, StencilMatchesGenericModel) {
    DetectorConfig cfg;
    cfg.steps_per_frame = 1;
    for (bool torus : {true, false}) {
        cfg.torus = torus;
        const Frame f = dyadic_pattern(5, 4);
        DetectorModel m = build_detector(5, 4, cfg);
        for (int p = 0; p < 20; ++p) {
            m.spec.external_input[m.input[0][p]] = f.pixels[p];
            m.spec.external_input[m.input[1][p]] = 1.0 - f.pixels[p];
        }
        const SimulationConfig sim = euler(0.05);
        Detector d(5, 4, cfg, sim);
        PotentialState s = zero_state(m.spec);
        for (int step = 0; step < 40; ++step) {
            d.step(f);
            s = step_euler(s, m.spec, m.weights, sim.dt);
            const auto x = d.model_state(m);
            for (std::size_t v = 0; v < x.size(); ++v) ASSERT_NEAR(x[v], s.values[v], 1e-12) << m.spec.label(v);
        }
    }
}

TEST(Detector, ShiftEquivariantOnTorus) {
    DetectorConfig cfg;
    cfg.steps_per_frame = 15;
    const Frame f = dyadic_pattern(7, 6);
    const Frame g = shift(f, 2, -1);
    const auto a = Detector(7, 6, cfg, euler()).run(f);
    const auto b = Detector(7, 6, cfg, euler()).run(g);
    EXPECT_EQ(shift(Frame{7, 6, a.uncertainty_map}, 2, -1).pixels, b.uncertainty_map);
    EXPECT_EQ(shift(Frame{7, 6, a.white_map}, 2, -1).pixels, b.white_map);
}

TEST(Detector, TypeSwapUnderInversion) {
    DetectorConfig cfg;
    cfg.steps_per_frame = 15;
    const Frame f = dyadic_pattern(6, 6);
    const auto a = Detector(6, 6, cfg, euler()).run(f);
    const auto b = Detector(6, 6, cfg, euler()).run(invert(f));
    EXPECT_EQ(a.white_map, b.black_map);
    EXPECT_EQ(a.black_map, b.white_map);
    EXPECT_EQ(a.uncertainty_map, b.uncertainty_map);
}

TEST(Detector, ThreadCountDoesNotChangeMaps) {
    DetectorConfig cfg;
    const Frame f = load_frame(fixture("triangle.pgm"));
    SimulationConfig one = euler(), many = euler();
    many.threads = 4;
    const auto a = Detector(f.width, f.height, cfg, one).run(f);
    const auto b = Detector(f.width, f.height, cfg, many).run(f);
    EXPECT_EQ(a.white_map, b.white_map);
    EXPECT_EQ(a.black_map, b.black_map);
    EXPECT_EQ(a.uncertainty_map, b.uncertainty_map);
}

TEST(Detector, RejectsRk4AndSizeMismatch) {
    SimulationConfig sim;
    sim.integrator = Integrator::rk4;
    EXPECT_THROW(Detector(8, 8, DetectorConfig{}, sim), Error);
    Detector d(8, 8, DetectorConfig{}, euler());
    EXPECT_THROW(d.step(uniform_frame(9, 8, 0.5)), Error);
}

TEST(Detector, StatePersistsAcrossFrames) {
    DetectorConfig cfg;
    cfg.steps_per_frame = 3;
    const Frame f = dyadic_pattern(6, 6);
    Detector d(6, 6, cfg, euler());
    d.run(f);
    const auto second = d.run(f);
    cfg.steps_per_frame = 6;
    const auto once = Detector(6, 6, cfg, euler()).run(f);
    EXPECT_EQ(second.white_map, once.white_map);
    EXPECT_EQ(d.steps(), 6);
}

TEST(Pgm, BinaryNormalization) {
    std::string bytes = "P5\n100 100\n255\n";
    for (int i = 0; i < 10000; ++i) bytes.push_back(static_cast<char>(i % 256));
    const Frame f = parse_pgm(bytes);
    ASSERT_EQ(f.width, 100);
    ASSERT_EQ(f.height, 100);
    for (int i = 0; i < 10000; ++i) ASSERT_EQ(f.pixels[i], (i % 256) / 255.0);
}

TEST(Pgm, AsciiWithCommentsMatchesBinary) {
    const Frame a = parse_pgm("P2\n# a comment\n3 2 # trailing\n# another\n4\n0 1 2\n3 4 0\n");
    std::string b = "P5 3 2 4\n";
    for (int v : {0, 1, 2, 3, 4, 0}) b.push_back(static_cast<char>(v));
    EXPECT_EQ(a.pixels, parse_pgm(b).pixels);
    EXPECT_EQ(a.pixels[4], 1.0);
}

TEST(Pgm, SixteenBitBigEndian) {
    std::string b = "P5\n2 1\n65535\n";
    b += std::string("\xff\xff\x80\x00", 4);
    const Frame f = parse_pgm(b);
    EXPECT_EQ(f.pixels[0], 1.0);
    EXPECT_EQ(f.pixels[1], 32768.0 / 65535.0);
}

TEST(Pgm, ErrorsCarryByteOffsets) {
    auto message = [](const std::string& bytes) {
        try {
            parse_pgm(bytes);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::parse_error);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("P6\n1 1\n255\n").find("byte 0"), std::string::npos);
    EXPECT_NE(message("P5\n2 2\n255\nab").find("truncated"), std::string::npos);
    EXPECT_NE(message("P2\n2 1\n3\n1 9\n").find("exceeds maxval"), std::string::npos);
    EXPECT_NE(message("P2\n2 1\n3\n1").find("truncated"), std::string::npos);
    EXPECT_NE(message("P5\nx 2\n255\n").find("width"), std::string::npos);
    EXPECT_THROW(load_frame(fixture("truncated.pgm")), Error);
}

TEST(Pgm, FixtureGreyLevels) {
    const Frame half = load_frame(fixture("edge_half.pgm"));
    EXPECT_EQ(half.at(0, 0), 1.0);
    EXPECT_EQ(half.at(19, 0), 0.5);
    const Frame high = load_frame(fixture("edge_high.pgm"));
    EXPECT_EQ(high.at(0, 5), 1.0);
    EXPECT_EQ(high.at(19, 5), 0.0);
}

TEST(Frames, TriangleFixtureMatchesGenerator) {
    const Frame file = load_frame(fixture("triangle.pgm"));
    const Frame gen = triangle_frame(24, 24, {{{4, 20}, {20, 20}, {12, 4}}});
    EXPECT_EQ(file.pixels, gen.pixels);
}

TEST(Frames, PngMatchesPgm) {
    EXPECT_EQ(load_frame(fixture("triangle.png")).pixels, load_frame(fixture("triangle.pgm")).pixels);
}

TEST(Frames, SaveAndReload) {
    const Frame f = dyadic_pattern(5, 3);
    const auto path = scratch("roundtrip.pgm");
    save_pgm(f, path.string());
    const Frame g = load_frame(path.string());
    for (std::size_t i = 0; i < f.pixels.size(); ++i) EXPECT_NEAR(g.pixels[i], f.pixels[i], 0.5 / 255.0);
    const auto map_path = scratch("map.pgm");
    const double scale = save_map({0.0, 2.0, 4.0, 1.0}, 2, 2, map_path.string());
    EXPECT_DOUBLE_EQ(scale, 255.0 / 4.0);
    EXPECT_TRUE(std::filesystem::exists(map_path.string() + ".json"));
    EXPECT_EQ(load_frame(map_path.string()).pixels[2], 1.0);
}

TEST(Frames, Helpers) {
    const Frame f = dyadic_pattern(8, 8);
    const Frame d = box_downsample(f, 2);
    EXPECT_EQ(d.width, 4);
    EXPECT_DOUBLE_EQ(d.at(0, 0), (f.at(0, 0) + f.at(1, 0) + f.at(0, 1) + f.at(1, 1)) / 4);
    const Frame c = crop(f, 2, 3, 4, 4);
    EXPECT_EQ(c.at(1, 0), f.at(3, 3));
    EXPECT_EQ(shift(shift(f, 3, 5), -3, -5).pixels, f.pixels);
    EXPECT_EQ(invert(invert(f)).pixels, f.pixels);
}

TEST(Tracker, BlankSequenceKeepsGaze) {
    TrackerConfig tc;
    tc.fovea_width = tc.fovea_height = 8;
    tc.downsample = 2;
    Tracker t(32, 32, DetectorConfig{}, tc, euler());
    const auto start = t.gaze();
    for (int i = 0; i < 5; ++i) EXPECT_EQ(t.step(uniform_frame(32, 32, 0.0)).gaze, start);
}

TEST(Tracker, LocksOntoStaticDot) {
    TrackerConfig tc;
    tc.fovea_width = tc.fovea_height = 8;
    tc.downsample = 1;
    tc.max_step = 4;
    Frame f = uniform_frame(32, 32, 0.0);
    for (int y = 5; y < 9; ++y)
        for (int x = 23; x < 27; ++x) f.pixels[static_cast<std::size_t>(y) * 32 + x] = 1.0;
    Tracker t(32, 32, DetectorConfig{}, tc, euler());
    std::vector<std::array<int, 2>> gaze;
    for (int i = 0; i < 16; ++i) gaze.push_back(t.step(f).gaze);
    const auto& g = gaze.back();
    EXPECT_LE(std::abs(g[0] - 25), tc.fovea_width / 2);
    EXPECT_LE(std::abs(g[1] - 7), tc.fovea_height / 2);
    for (std::size_t i = gaze.size() - 5; i < gaze.size(); ++i) {
        EXPECT_LE(std::abs(gaze[i][0] - gaze[i - 1][0]), 1);
        EXPECT_LE(std::abs(gaze[i][1] - gaze[i - 1][1]), 1);
    }
}
