#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "sparsnn/errors.hpp"

namespace sparsnn {

// Channels x height x width. Fully-connected activations use {n, 1, 1}.
struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;

  int size() const { return c * h * w; }
  bool operator==(const Shape&) const = default;

  std::string str() const {
    return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }
};

using Vec = std::vector<double>;

inline void check_finite(const Vec& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw numeric_error(std::string("non-finite value in ") + what);
  }
}

// Binary activations over discrete timesteps. Values are strictly {0,1} by
// construction; per-(timestep, channel) spike counts are cached on write so
// workload formulas can read them without rescanning the raster.
class SpikeTrain {
 public:
  SpikeTrain() = default;
  SpikeTrain(int timesteps, Shape shape)
      : T_(timesteps),
        shape_(shape),
        bits_(static_cast<size_t>(timesteps) * shape.size(), 0),
        counts_(static_cast<size_t>(timesteps) * shape.c, 0) {
    if (timesteps < 1 || shape.size() < 1) throw shape_error("SpikeTrain: empty shape or T < 1");
  }

  int timesteps() const { return T_; }
  const Shape& shape() const { return shape_; }

  // idx is the flat index within one frame (c-major, then h, then w).
  void set(int t, int idx, bool on = true) {
    uint8_t& b = bits_[flat(t, idx)];
    int c = idx / (shape_.h * shape_.w);
    counts_[static_cast<size_t>(t) * shape_.c + c] += (on ? 1 : 0) - (b ? 1 : 0);
    b = on ? 1 : 0;
  }

  uint8_t at(int t, int idx) const { return bits_[flat(t, idx)]; }

  const uint8_t* frame(int t) const { return bits_.data() + static_cast<size_t>(t) * shape_.size(); }

  // Cached spike count for channel c at timestep t (the S_i[t] of the
  // conv workload model).
  int channel_count(int t, int c) const { return counts_[static_cast<size_t>(t) * shape_.c + c]; }

  long total_spikes() const { return std::accumulate(counts_.begin(), counts_.end(), 0L); }

  long frame_spikes(int t) const {
    long n = 0;
    for (int c = 0; c < shape_.c; ++c) n += channel_count(t, c);
    return n;
  }

  Vec frame_as_vec(int t) const {
    const uint8_t* f = frame(t);
    return Vec(f, f + shape_.size());
  }

  bool operator==(const SpikeTrain& o) const { return T_ == o.T_ && shape_ == o.shape_ && bits_ == o.bits_; }

 private:
  size_t flat(int t, int idx) const {
    if (t < 0 || t >= T_ || idx < 0 || idx >= shape_.size()) throw shape_error("SpikeTrain index out of range");
    return static_cast<size_t>(t) * shape_.size() + idx;
  }

  int T_ = 0;
  Shape shape_;
  std::vector<uint8_t> bits_;
  std::vector<int> counts_;
};

}  // namespace sparsnn
