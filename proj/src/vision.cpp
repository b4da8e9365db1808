#include "metanet/vision.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <png.h>

namespace metanet {

void validate(const Frame& f) {
    require(f.width > 0 && f.height > 0, "frame dimensions must be positive");
    require(f.pixels.size() == static_cast<std::size_t>(f.width) * f.height, "frame pixel count mismatch");
    for (double v : f.pixels) require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "frame pixels must lie in [0, 1]");
}

void validate(const DetectorConfig& c) {
    require(c.connection_range >= 1, "connection_range must be positive");
    require(c.potential_min < c.potential_max, "potential_min must be below potential_max");
    require(c.steps_per_frame >= 1, "steps_per_frame must be positive");
    require(c.broadcast_count >= 0, "broadcast_count must be nonnegative");
}

std::vector<std::array<int, 2>> neighbour_offsets(int range) {
    std::vector<std::array<int, 2>> off;
    for (int dy = -range; dy <= range; ++dy)
        for (int dx = -range; dx <= range; ++dx)
            if (dx != 0 || dy != 0) off.push_back({dx, dy});
    return off;
}

namespace {

void check_dimensions(int width, int height, const DetectorConfig& cfg) {
    validate(cfg);
    require(width >= 3 && height >= 3, "detector needs at least 3x3 pixels");
    if (cfg.torus)
        require(width >= 2 * cfg.connection_range + 1 && height >= 2 * cfg.connection_range + 1,
                "frame is too small for the connection range on a torus");
}

long wrap_index(int x, int y, int w, int h, bool torus) {
    if (torus) {
        x = ((x % w) + w) % w;
        y = ((y % h) + h) % h;
    } else if (x < 0 || y < 0 || x >= w || y >= h) {
        return -1;
    }
    return static_cast<long>(y) * w + x;
}

bool in_range(double v, const DetectorConfig& c) { return v >= c.potential_min && v <= c.potential_max; }

}  // namespace

DetectorModel build_detector(int width, int height, const DetectorConfig& cfg) {
    check_dimensions(width, height, cfg);
    const int P = width * height;
    const auto off = neighbour_offsets(cfg.connection_range);
    ModelBuilder b(Family::mm12, Labeling::feedforward, {P, P});
    b.set_paired(true);
    DetectorModel m;
    for (int t = 0; t < 2; ++t) {
        m.input[t].resize(P);
        m.output[t].resize(P);
        m.connection[t].resize(P);
        for (int p = 0; p < P; ++p) m.input[t][p] = b.add_unit({p + 1, 0, 0}, true, t);
        for (int p = 0; p < P; ++p) m.output[t][p] = b.add_unit({0, 0, p + 1}, false, t);
        for (int p = 0; p < P; ++p) m.connection[t][p] = b.add_connection(m.input[t][p], m.output[t][p], {p + 1, 0, p + 1}, t);
    }
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, 2> metas;
    for (int t = 0; t < 2; ++t)
        for (int p = 0; p < P; ++p) {
            const int x = p % width, y = p / width;
            for (const auto& o : off) {
                const long q = wrap_index(x + o[0], y + o[1], width, height, cfg.torus);
                if (q < 0) continue;
                const std::size_t id =
                    b.add_metaconnection(m.input[t][p], m.connection[t][q], {p + 1, static_cast<int>(q) + 1, static_cast<int>(q) + 1}, t);
                metas[t].push_back({id, static_cast<std::size_t>(q)});
            }
        }
    for (int t = 0; t < 2; ++t)
        for (auto [id, q] : metas[t]) b.add_influence(m.connection[1 - t][q], id, -1.0);
    m.spec = b.build();
    m.weights = default_weights(m.spec, 1.0);
    return m;
}

// State layout per type t: u[P] c[P] o[P] m[P*K], where m[p*K + n] is the metaconnection from p onto the
// connection of its n-th neighbour.
Detector::Detector(int width, int height, DetectorConfig cfg, SimulationConfig sim)
    : w_(width), h_(height), cfg_(cfg), sim_(sim), off_(neighbour_offsets(cfg.connection_range)) {
    check_dimensions(width, height, cfg);
    validate(sim_);
    require(sim_.integrator != Integrator::rk4, "the cellular detector integrates with forward Euler");
    const std::size_t P = static_cast<std::size_t>(w_) * h_, K = off_.size();
    for (auto& L : s_) {
        L.u.assign(P, 0.0);
        L.c.assign(P, 0.0);
        L.o.assign(P, 0.0);
        L.m.assign(P * K, 0.0);
    }
}

long Detector::neighbour(int x, int y, int k) const {
    return wrap_index(x + off_[k][0], y + off_[k][1], w_, h_, cfg_.torus);
}

void Detector::rows(int y0, int y1, const std::array<Layer, 2>& s, std::array<Layer, 2>& d,
                    const std::array<std::vector<double>, 2>& in) const {
    const ActivationParams act{};
    const int K = static_cast<int>(off_.size());
    for (int t = 0; t < 2; ++t) {
        const Layer& S = s[t];
        const Layer& X = s[1 - t];
        Layer& D = d[t];
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x < w_; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * w_ + x;
                const double U = S.u[p];
                D.u[p] = -activation(U, act) + in[t][p];
                double hsum = S.c[p];
                int fan = 1;
                for (int k = 0; k < K; ++k)
                    if (neighbour(x, y, k) >= 0) {
                        hsum += S.m[p * K + k];
                        ++fan;
                    }
                double meta = 0.0;
                for (int k = 0; k < K; ++k) {
                    const long q = neighbour(x, y, k);
                    if (q < 0) continue;
                    // the neighbour's metaconnection onto p uses the opposite offset
                    const std::size_t mq = static_cast<std::size_t>(q) * K + (K - 1 - k);
                    meta += highway_activation(S.m[mq], S.u[q], act);
                    meta -= highway_activation(X.m[mq], X.u[q], act);
                }
                const double c = S.c[p];
                D.c[p] = -highway_activation(c, U, act) + meta + distribution(c, U, hsum, fan, act, sim_.denominator_guard);
                D.o[p] = -activation(S.o[p], act) + highway_activation(c, U, act);
                for (int k = 0; k < K; ++k) {
                    const double mv = S.m[p * K + k];
                    D.m[p * K + k] = neighbour(x, y, k) < 0
                                         ? 0.0
                                         : -highway_activation(mv, U, act) +
                                               distribution(mv, U, hsum, fan, act, sim_.denominator_guard);
                }
            }
    }
}

void Detector::derivative(const std::array<Layer, 2>& s, std::array<Layer, 2>& d,
                          const std::array<std::vector<double>, 2>& in) const {
    const int T = std::max(1, std::min(sim_.threads, h_));
    if (T == 1) {
        rows(0, h_, s, d, in);
        return;
    }
    std::vector<std::thread> pool;
    for (int i = 0; i < T; ++i) {
        const int y0 = h_ * i / T, y1 = h_ * (i + 1) / T;
        pool.emplace_back([&, y0, y1] { rows(y0, y1, s, d, in); });
    }
    for (auto& th : pool) th.join();
}

void Detector::step(const Frame& f) {
    require(f.width == w_ && f.height == h_, "frame dimensions differ from the detector");
    std::array<std::vector<double>, 2> in;
    in[0] = f.pixels;
    in[1].resize(f.pixels.size());
    for (std::size_t p = 0; p < f.pixels.size(); ++p) in[1][p] = 1.0 - f.pixels[p];
    std::array<Layer, 2> d = s_;
    derivative(s_, d, in);
    const double hstep = sim_.integrator == Integrator::paper_euler ? 1.0 : sim_.dt / sim_.tau_r;
    auto advance = [&](std::vector<double>& x, const std::vector<double>& dx) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = x[i] + hstep * dx[i];
            if (!(v > 0.0) && !std::isnan(v)) v = 0.0;
            if (!std::isfinite(v) || std::fabs(v) > sim_.ceiling) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "divergence: detector potential %g exceeds ceiling %g at step %ld", v,
                              sim_.ceiling, steps_ + 1);
                fail(ErrorCode::divergence, buf);
            }
            x[i] = v;
        }
    };
    for (int t = 0; t < 2; ++t) {
        advance(s_[t].u, d[t].u);
        advance(s_[t].c, d[t].c);
        advance(s_[t].o, d[t].o);
        advance(s_[t].m, d[t].m);
    }
    ++steps_;
}

AttentionFrame Detector::snapshot() const {
    AttentionFrame a;
    a.width = w_;
    a.height = h_;
    a.step = steps_;
    a.white_map = s_[0].o;
    a.black_map = s_[1].o;
    const std::size_t P = static_cast<std::size_t>(w_) * h_, K = off_.size();
    a.uncertainty_map.assign(P, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const int x = static_cast<int>(p % w_), y = static_cast<int>(p / w_);
        for (int t = 0; t < 2; ++t) {
            int count = in_range(s_[t].c[p], cfg_) ? 1 : 0;
            for (std::size_t k = 0; k < K; ++k)
                if (neighbour(x, y, static_cast<int>(k)) >= 0 && in_range(s_[t].m[p * K + k], cfg_)) ++count;
            if (count > cfg_.broadcast_count) a.uncertainty_map[p] += count;
        }
    }
    return a;
}

AttentionFrame Detector::run(const Frame& f) {
    for (int i = 0; i < cfg_.steps_per_frame; ++i) step(f);
    return snapshot();
}

std::vector<double> Detector::model_state(const DetectorModel& m) const {
    std::vector<double> x(m.spec.size(), 0.0);
    const std::size_t P = static_cast<std::size_t>(w_) * h_;
    const int K = static_cast<int>(off_.size());
    for (int t = 0; t < 2; ++t)
        for (std::size_t p = 0; p < P; ++p) {
            x[m.input[t][p]] = s_[t].u[p];
            x[m.connection[t][p]] = s_[t].c[p];
            x[m.output[t][p]] = s_[t].o[p];
            const int px = static_cast<int>(p % w_), py = static_cast<int>(p / w_);
            for (int k = 0; k < K; ++k) {
                const long q = neighbour(px, py, k);
                if (q < 0) continue;
                const std::size_t v = m.spec.find({static_cast<int>(p) + 1, static_cast<int>(q) + 1, static_cast<int>(q) + 1}, t);
                x[v] = s_[t].m[p * K + k];
            }
        }
    return x;
}

std::vector<AttentionFrame> detect(const std::vector<Frame>& frames, const DetectorConfig& cfg,
                                   const SimulationConfig& sim) {
    require(!frames.empty(), "detect needs at least one frame");
    for (const auto& f : frames) {
        validate(f);
        require(f.width == frames[0].width && f.height == frames[0].height, "all frames must share dimensions");
    }
    Detector d(frames[0].width, frames[0].height, cfg, sim);
    std::vector<AttentionFrame> out;
    for (const auto& f : frames) out.push_back(d.run(f));
    return out;
}

Frame box_downsample(const Frame& f, int factor) {
    require(factor >= 1, "downsample factor must be positive");
    Frame g;
    g.width = f.width / factor;
    g.height = f.height / factor;
    require(g.width >= 1 && g.height >= 1, "frame too small to downsample");
    g.pixels.assign(static_cast<std::size_t>(g.width) * g.height, 0.0);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            double s = 0.0;
            for (int dy = 0; dy < factor; ++dy)
                for (int dx = 0; dx < factor; ++dx) s += f.at(x * factor + dx, y * factor + dy);
            g.pixels[static_cast<std::size_t>(y) * g.width + x] = s / (factor * factor);
        }
    return g;
}

Frame crop(const Frame& f, int x0, int y0, int w, int h) {
    require(x0 >= 0 && y0 >= 0 && x0 + w <= f.width && y0 + h <= f.height, "crop window outside the frame");
    Frame g{w, h, {}};
    g.pixels.reserve(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) g.pixels.push_back(f.at(x0 + x, y0 + y));
    return g;
}

Frame shift(const Frame& f, int dx, int dy) {
    Frame g = f;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const int sx = (((x - dx) % f.width) + f.width) % f.width;
            const int sy = (((y - dy) % f.height) + f.height) % f.height;
            g.pixels[static_cast<std::size_t>(y) * f.width + x] = f.at(sx, sy);
        }
    return g;
}

Frame invert(const Frame& f) {
    Frame g = f;
    for (double& v : g.pixels) v = 1.0 - v;
    return g;
}

namespace {

Detector make_periphery(int width, int height, const DetectorConfig& cfg, const TrackerConfig& tc,
                        const SimulationConfig& sim) {
    require(tc.fovea_width >= 3 && tc.fovea_height >= 3 && tc.fovea_width <= width && tc.fovea_height <= height,
            "fovea must fit inside the frame");
    require(tc.downsample >= 1 && tc.max_step >= 1, "downsample and max_step must be positive");
    return Detector(width / tc.downsample, height / tc.downsample, cfg, sim);
}

}  // namespace

Tracker::Tracker(int width, int height, DetectorConfig cfg, TrackerConfig tc, SimulationConfig sim)
    : w_(width),
      h_(height),
      tc_(tc),
      periphery_(make_periphery(width, height, cfg, tc, sim)),
      fovea_(tc.fovea_width, tc.fovea_height, cfg, sim) {
    gaze_ = clamp_gaze({w_ / 2, h_ / 2});
}

std::array<int, 2> Tracker::clamp_gaze(std::array<int, 2> g) const {
    g[0] = std::clamp(g[0], tc_.fovea_width / 2, w_ - (tc_.fovea_width - tc_.fovea_width / 2));
    g[1] = std::clamp(g[1], tc_.fovea_height / 2, h_ - (tc_.fovea_height - tc_.fovea_height / 2));
    return g;
}

TrackStep Tracker::step(const Frame& f) {
    validate(f);
    require(f.width == w_ && f.height == h_, "frame dimensions differ from the tracker");
    TrackStep st;
    st.gaze = gaze_;
    st.periphery = periphery_.run(box_downsample(f, tc_.downsample));
    st.fovea = fovea_.run(crop(f, gaze_[0] - tc_.fovea_width / 2, gaze_[1] - tc_.fovea_height / 2, tc_.fovea_width,
                               tc_.fovea_height));
    const auto& att = st.periphery.uncertainty_map;
    const int pw = st.periphery.width, ph = st.periphery.height;
    const double best = *std::max_element(att.begin(), att.end());
    const int gx = std::min(gaze_[0] / tc_.downsample, pw - 1), gy = std::min(gaze_[1] / tc_.downsample, ph - 1);
    std::array<int, 2> target = gaze_;
    if (best > 0.0 && att[static_cast<std::size_t>(gy) * pw + gx] < best) {
        const auto idx = static_cast<int>(std::find(att.begin(), att.end(), best) - att.begin());
        target = {(idx % pw) * tc_.downsample + tc_.downsample / 2, (idx / pw) * tc_.downsample + tc_.downsample / 2};
    }
    st.target = target;
    for (int a = 0; a < 2; ++a) gaze_[a] += std::clamp(target[a] - gaze_[a], -tc_.max_step, tc_.max_step);
    gaze_ = clamp_gaze(gaze_);
    return st;
}

std::vector<TrackStep> track(const std::vector<Frame>& frames, const DetectorConfig& cfg, const TrackerConfig& tc,
                             const SimulationConfig& sim) {
    require(!frames.empty(), "track needs at least one frame");
    for (const auto& f : frames)
        require(f.width == frames[0].width && f.height == frames[0].height, "all frames must share dimensions");
    Tracker t(frames[0].width, frames[0].height, cfg, tc, sim);
    std::vector<TrackStep> out;
    for (const auto& f : frames) out.push_back(t.step(f));
    return out;
}

namespace {

[[noreturn]] void pgm_fail(const std::string& what, std::size_t offset) {
    fail(ErrorCode::parse_error, "pgm: " + what + " at byte " + std::to_string(offset));
}

struct PngReader {
    const std::string* bytes;
    std::size_t pos;
    std::string error;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->bytes->size()) png_error(png, "unexpected end of data");
    std::memcpy(out, r->bytes->data() + r->pos, n);
    r->pos += n;
}

void png_on_error(png_structp png, png_const_charp msg) {
    auto* r = static_cast<PngReader*>(png_get_io_ptr(png));
    if (r) r->error = msg;
    png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

Frame parse_png(const std::string& bytes) {
    PngReader reader{&bytes, 0, {}};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_on_error, png_on_warning);
    if (!png) fail(ErrorCode::internal, "png: cannot allocate reader");
    png_infop info = png_create_info_struct(png);
    Frame f;
    std::vector<png_bytep> rows;
    std::vector<unsigned char> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::parse_error, "png: " + reader.error + " at byte " + std::to_string(reader.pos));
    }
    png_set_read_fn(png, &reader, png_read_mem);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);
    const auto w = png_get_image_width(png, info), h = png_get_image_height(png, info);
    const auto stride = png_get_rowbytes(png, info);
    data.resize(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    f.pixels.resize(static_cast<std::size_t>(w) * h);
    for (png_uint_32 y = 0; y < h; ++y)
        for (png_uint_32 x = 0; x < w; ++x) f.pixels[y * w + x] = data[y * stride + x] / 255.0;
    return f;
}

}  // namespace

Frame parse_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    auto skip = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto number = [&](const char* what) {
        skip();
        const std::size_t start = pos;
        long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1000000000L) pgm_fail(std::string(what) + " is too large", start);
            ++pos;
        }
        if (pos == start) pgm_fail(std::string("expected ") + what, start);
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) pgm_fail("expected P2 or P5", 0);
    const bool binary = bytes[1] == '5';
    pos = 2;
    const long w = number("width"), h = number("height"), maxval = number("maxval");
    if (w <= 0 || h <= 0) pgm_fail("dimensions must be positive", pos);
    if (maxval <= 0 || maxval > 65535) pgm_fail("maxval must lie in [1, 65535]", pos);
    Frame f;
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    f.pixels.resize(n);
    if (binary) {
        if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
            pgm_fail("expected whitespace after maxval", pos);
        ++pos;
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        if (bytes.size() - pos < n * bpp) pgm_fail("truncated pixel data", bytes.size());
        for (std::size_t i = 0; i < n; ++i) {
            long v = static_cast<unsigned char>(bytes[pos]);
            if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + 1]);
            if (v > maxval) pgm_fail("pixel exceeds maxval", pos);
            f.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
            pos += bpp;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            skip();
            if (pos >= bytes.size()) pgm_fail("truncated pixel data", pos);
            const std::size_t at = pos;
            const long v = number("pixel value");
            if (v > maxval) pgm_fail("pixel exceeds maxval", at);
            f.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    return f;
}

Frame load_frame(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_error, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    try {
        if (bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0) return parse_png(bytes);
        return parse_pgm(bytes);
    } catch (const Error& e) {
        fail(e.code(), path + ": " + e.what());
    }
}

void save_pgm(const Frame& f, const std::string& path) {
    validate(f);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write " + path);
    out << "P5\n" << f.width << ' ' << f.height << "\n255\n";
    for (double v : f.pixels) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    if (!out) fail(ErrorCode::io_error, "write failed for " + path);
}

double save_map(const std::vector<double>& map, int width, int height, const std::string& path) {
    require(map.size() == static_cast<std::size_t>(width) * height, "map size mismatch");
    const double hi = map.empty() ? 0.0 : *std::max_element(map.begin(), map.end());
    const double scale = hi > 0.0 ? 255.0 / hi : 0.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write " + path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    for (double v : map) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v * scale, 0.0, 255.0)))));
    if (!out) fail(ErrorCode::io_error, "write failed for " + path);
    nlohmann::json j;
    j["format_version"] = 1;
    j["width"] = width;
    j["height"] = height;
    j["scale"] = scale;
    j["max"] = hi;
    std::ofstream side(path + ".json");
    if (!side) fail(ErrorCode::io_error, "cannot write " + path + ".json");
    side << j.dump(2) << '\n';
    return scale;
}

Frame uniform_frame(int w, int h, double omega) {
    return Frame{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, omega)};
}

Frame edge_frame(int w, int h, double left, double right) {
    Frame f = uniform_frame(w, h, left);
    for (int y = 0; y < h; ++y)
        for (int x = w / 2; x < w; ++x) f.pixels[static_cast<std::size_t>(y) * w + x] = right;
    return f;
}

Frame triangle_frame(int w, int h, const std::array<std::array<double, 2>, 3>& v, double fg, double bg) {
    Frame f = uniform_frame(w, h, bg);
    auto side = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double x, double y) {
        return (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const double s0 = side(v[0], v[1], px, py), s1 = side(v[1], v[2], px, py), s2 = side(v[2], v[0], px, py);
            const bool neg = s0 < 0 || s1 < 0 || s2 < 0, pos = s0 > 0 || s1 > 0 || s2 > 0;
            if (!(neg && pos)) f.pixels[static_cast<std::size_t>(y) * w + x] = fg;
        }
    return f;
}

RotatingTriangle rotating_triangle(int size, int count, double degrees_per_frame) {
    require(size >= 12 && count >= 1, "rotating triangle needs size >= 12 and at least one frame");
    RotatingTriangle r;
    const double c = size / 2.0, ra = 0.38 * size, rb = 0.22 * size;
    const double pi = std::acos(-1.0);
    for (int i = 0; i < count; ++i) {
        const double th = i * degrees_per_frame * pi / 180.0;
        const std::array<double, 2> apex{c + ra * std::cos(th), c + ra * std::sin(th)};
        const std::array<double, 2> b1{c + rb * std::cos(th + 2.4), c + rb * std::sin(th + 2.4)};
        const std::array<double, 2> b2{c + rb * std::cos(th - 2.4), c + rb * std::sin(th - 2.4)};
        r.frames.push_back(triangle_frame(size, size, {apex, b1, b2}));
        r.apex.push_back(apex);
    }
    return r;
}

}  // namespace metanet
