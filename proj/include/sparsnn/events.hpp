#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsnn/errors.hpp"
#include "sparsnn/surrogate.hpp"
#include "sparsnn/tensor.hpp"

namespace sparsnn {

struct Event {
  uint64_t t = 0;  // microseconds
  int x = 0;
  int y = 0;
  int polarity = 0;  // {0, 1}

  bool operator==(const Event&) const = default;
};

// Address-event stream: records ordered by time, bounded by sensor dims.
struct EventStream {
  std::vector<Event> records;
  int width = 0;
  int height = 0;
  uint64_t duration_us = 0;
  int label = -1;  // optional class label

  void validate() const {
    uint64_t prev = 0;
    for (size_t i = 0; i < records.size(); ++i) {
      const Event& e = records[i];
      if (e.t < prev) throw parse_error("event stream: non-monotone timestamp at record " + std::to_string(i));
      if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
        throw parse_error("event stream: pixel out of bounds at record " + std::to_string(i));
      if (e.polarity != 0 && e.polarity != 1)
        throw parse_error("event stream: bad polarity at record " + std::to_string(i));
      prev = e.t;
    }
  }

  bool operator==(const EventStream&) const = default;
};

enum class PolarityMode { TwoChannel, Merged };

struct RasterConfig {
  int timesteps = 8;
  int downsample = 1;
  PolarityMode polarity = PolarityMode::TwoChannel;

  void validate() const {
    if (timesteps < 1 || downsample < 1) throw config_error("RasterConfig: timesteps and downsample must be >= 1");
  }
};

inline std::filesystem::path manifest_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

// CSV lines "t,x,y,p" plus a JSON sidecar manifest carrying width, height,
// duration and class label. Round-trips exactly.
inline void save_events(const EventStream& s, const std::filesystem::path& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw parse_error("save_events: cannot open " + csv_path.string());
  for (const Event& e : s.records)
    csv << e.t << ',' << e.x << ',' << e.y << ',' << e.polarity << '\n';

  nlohmann::json m;
  m["width"] = s.width;
  m["height"] = s.height;
  m["duration_us"] = s.duration_us;
  m["label"] = s.label;
  std::ofstream mf(manifest_path(csv_path));
  mf << m.dump(2) << '\n';
}

inline EventStream load_events(const std::filesystem::path& csv_path) {
  std::ifstream mf(manifest_path(csv_path));
  if (!mf) throw parse_error("load_events: missing manifest " + manifest_path(csv_path).string());
  nlohmann::json m;
  try {
    mf >> m;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("load_events: bad manifest: ") + e.what());
  }

  EventStream s;
  s.width = m.at("width").get<int>();
  s.height = m.at("height").get<int>();
  s.duration_us = m.at("duration_us").get<uint64_t>();
  s.label = m.value("label", -1);

  std::ifstream csv(csv_path);
  if (!csv) throw parse_error("load_events: cannot open " + csv_path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    Event e;
    char c1, c2, c3;
    std::istringstream is(line);
    if (!(is >> e.t >> c1 >> e.x >> c2 >> e.y >> c3 >> e.polarity) || c1 != ',' || c2 != ',' || c3 != ',')
      throw parse_error("load_events: malformed record at line " + std::to_string(lineno));
    s.records.push_back(e);
  }
  s.validate();
  return s;
}

// Time-binned binary rasterization: event (t,x,y,p) sets bin floor(t*T/dur),
// channel p, pixel (y,x). Repeated events clip to 1.
inline SpikeTrain rasterize(const EventStream& stream, const RasterConfig& cfg) {
  cfg.validate();
  stream.validate();
  if (stream.duration_us == 0 && !stream.records.empty())
    throw config_error("rasterize: zero-duration stream with events");
  int channels = cfg.polarity == PolarityMode::TwoChannel ? 2 : 1;
  Shape shape{channels, stream.height / cfg.downsample, stream.width / cfg.downsample};
  SpikeTrain out(cfg.timesteps, shape);
  for (const Event& e : stream.records) {
    int bin = static_cast<int>(e.t * static_cast<uint64_t>(cfg.timesteps) / stream.duration_us);
    if (bin >= cfg.timesteps) bin = cfg.timesteps - 1;  // t == duration lands in the last bin
    int ch = cfg.polarity == PolarityMode::TwoChannel ? e.polarity : 0;
    int yy = e.y / cfg.downsample, xx = e.x / cfg.downsample;
    if (yy >= shape.h || xx >= shape.w) continue;  // truncated border when dims not divisible
    out.set(bin, (ch * shape.h + yy) * shape.w + xx);
  }
  return out;
}

// Synthetic 4-class stand-in for gesture workloads: a one-pixel-wide bar
// sweeps in one of four directions (0 right, 1 left, 2 down, 3 up) emitting
// Poisson-jittered events along its edge. The leading edge emits polarity 1,
// the trailing edge polarity 0, so direction is visible in the raster.
inline EventStream gen_moving_bar(int class_id, int width, int height, uint64_t duration_us,
                                  double rate, uint64_t seed) {
  if (class_id < 0 || class_id > 3) throw config_error("gen_moving_bar: class_id must be in 0..3");
  if (width < 8 || height < 8) throw config_error("gen_moving_bar: dims must be >= 8x8");
  if (!(rate >= 0.0)) throw config_error("gen_moving_bar: rate must be >= 0");

  EventStream s;
  s.width = width;
  s.height = height;
  s.duration_us = duration_us;
  s.label = class_id;
  if (rate == 0.0 || duration_us == 0) return s;

  std::mt19937_64 rng(detail::splitmix64(seed ^ (0x6261720000ULL + class_id)));
  const bool horizontal = class_id < 2;        // sweeps along x
  const bool forward = (class_id % 2) == 0;    // increasing coordinate
  const int travel = horizontal ? width : height;
  const int steps = 64;
  std::poisson_distribution<int> pois(rate);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);

  for (int step = 0; step < steps; ++step) {
    double frac = (step + 0.5) / steps;
    int pos = static_cast<int>(frac * travel);
    if (pos >= travel) pos = travel - 1;
    if (!forward) pos = travel - 1 - pos;
    uint64_t t0 = duration_us * step / steps;
    uint64_t t1 = duration_us * (step + 1) / steps;

    std::vector<Event> step_events;
    const int span = horizontal ? height : width;
    for (int edge = 0; edge < 2; ++edge) {
      // leading edge at pos, trailing one pixel behind
      int offset = edge == 0 ? 0 : (forward ? -1 : 1);
      int epos = pos + offset;
      if (epos < 0 || epos >= travel) continue;
      for (int j = 0; j < span; ++j) {
        int n = pois(rng);
        for (int k = 0; k < n; ++k) {
          Event e;
          e.t = t0 + static_cast<uint64_t>(jitter(rng) * static_cast<double>(t1 - t0));
          if (e.t >= duration_us) e.t = duration_us - 1;
          e.x = horizontal ? epos : j;
          e.y = horizontal ? j : epos;
          e.polarity = edge == 0 ? 1 : 0;
          step_events.push_back(e);
        }
      }
    }
    std::sort(step_events.begin(), step_events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    s.records.insert(s.records.end(), step_events.begin(), step_events.end());
  }
  s.validate();
  return s;
}

// Bernoulli rate coding of a static image in [0,1].
inline SpikeTrain poisson_encode(const Vec& image, Shape shape, int T, double max_rate, uint64_t seed) {
  if (static_cast<int>(image.size()) != shape.size()) throw shape_error("poisson_encode: image size != shape");
  if (!(max_rate >= 0.0 && max_rate <= 1.0)) throw config_error("poisson_encode: max_rate must be in [0,1]");
  for (double v : image)
    if (!(v >= 0.0 && v <= 1.0)) throw config_error("poisson_encode: pixel values must be in [0,1]");
  std::mt19937_64 rng(detail::splitmix64(seed ^ 0x706f6973736f6eULL));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpikeTrain out(T, shape);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < shape.size(); ++i)
      if (u(rng) < image[i] * max_rate) out.set(t, i);
  return out;
}

}  // namespace sparsnn
