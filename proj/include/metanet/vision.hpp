#pragma once

#include <array>
#include <string>
#include <vector>

#include "metanet/dynamics.hpp"

namespace metanet {

// Row-major grid of white amounts in [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

void validate(const Frame& f);

struct DetectorConfig {
    int connection_range = 1;
    double potential_min = 0.05;
    double potential_max = 3.0;
    int steps_per_frame = 20;
    bool torus = true;
    // A unit counts as broadcasting when more than this many outputs sit in the potential range.
    int broadcast_count = 1;
};

void validate(const DetectorConfig& c);

struct AttentionFrame {
    int width = 0;
    int height = 0;
    std::vector<double> white_map;
    std::vector<double> black_map;
    std::vector<double> uncertainty_map;
    long step = 0;
};

struct DetectorModel {
    ModelSpec spec;
    WeightSet weights;
    // [type][pixel] -> variable; type 0 is white, 1 is black.
    std::array<std::vector<std::size_t>, 2> input;
    std::array<std::vector<std::size_t>, 2> output;
    std::array<std::vector<std::size_t>, 2> connection;
};

DetectorModel build_detector(int width, int height, const DetectorConfig& cfg);

// Neighbour offsets (dx, dy) within the range, row-major, centre excluded.
std::vector<std::array<int, 2>> neighbour_offsets(int range);

// Cellular integration of the detector equations; state persists across frames.
class Detector {
public:
    Detector(int width, int height, DetectorConfig cfg, SimulationConfig sim);

    void step(const Frame& f);
    AttentionFrame run(const Frame& f);
    AttentionFrame snapshot() const;
    long steps() const { return steps_; }
    int width() const { return w_; }
    int height() const { return h_; }

    // Flat state in the variable order of build_detector, for cross-checks.
    std::vector<double> model_state(const DetectorModel& m) const;

private:
    struct Layer {
        std::vector<double> u, c, o, m;
    };
    void derivative(const std::array<Layer, 2>& s, std::array<Layer, 2>& d, const std::array<std::vector<double>, 2>& in) const;
    void rows(int y0, int y1, const std::array<Layer, 2>& s, std::array<Layer, 2>& d,
              const std::array<std::vector<double>, 2>& in) const;
    long neighbour(int x, int y, int k) const;

    int w_, h_;
    DetectorConfig cfg_;
    SimulationConfig sim_;
    std::vector<std::array<int, 2>> off_;
    std::array<Layer, 2> s_;
    long steps_ = 0;
};

std::vector<AttentionFrame> detect(const std::vector<Frame>& frames, const DetectorConfig& cfg,
                                   const SimulationConfig& sim);

struct TrackerConfig {
    int fovea_width = 16;
    int fovea_height = 16;
    int downsample = 4;
    // Largest gaze move per frame along each axis, in full-resolution pixels.
    int max_step = 6;
};

struct TrackStep {
    std::array<int, 2> gaze{};
    std::array<int, 2> target{};
    AttentionFrame periphery;
    AttentionFrame fovea;
};

class Tracker {
public:
    Tracker(int width, int height, DetectorConfig cfg, TrackerConfig tc, SimulationConfig sim);

    TrackStep step(const Frame& f);
    std::array<int, 2> gaze() const { return gaze_; }
    int frame_width() const { return w_; }
    int frame_height() const { return h_; }
    const Detector& periphery() const { return periphery_; }
    const Detector& fovea() const { return fovea_; }

private:
    std::array<int, 2> clamp_gaze(std::array<int, 2> g) const;

    int w_, h_;
    TrackerConfig tc_;
    Detector periphery_;
    Detector fovea_;
    std::array<int, 2> gaze_{};
};

std::vector<TrackStep> track(const std::vector<Frame>& frames, const DetectorConfig& cfg, const TrackerConfig& tc,
                             const SimulationConfig& sim);

Frame box_downsample(const Frame& f, int factor);
Frame crop(const Frame& f, int x0, int y0, int w, int h);
Frame shift(const Frame& f, int dx, int dy);
Frame invert(const Frame& f);

Frame load_frame(const std::string& path);
Frame parse_pgm(const std::string& bytes);
void save_pgm(const Frame& f, const std::string& path);
// Writes the map as a PGM scaled to [0, 255] and a JSON sidecar (path + ".json") with the scale.
double save_map(const std::vector<double>& map, int width, int height, const std::string& path);

// Synthetic fixtures.
Frame uniform_frame(int w, int h, double omega);
Frame edge_frame(int w, int h, double left, double right);
Frame triangle_frame(int w, int h, const std::array<std::array<double, 2>, 3>& vertices, double fg = 1.0,
                     double bg = 0.0);
struct RotatingTriangle {
    std::vector<Frame> frames;
    // Leading-corner position per frame.
    std::vector<std::array<double, 2>> apex;
};
RotatingTriangle rotating_triangle(int size, int count, double degrees_per_frame);

}  // namespace metanet
