#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sparsnn/errors.hpp"
#include "sparsnn/network.hpp"

namespace sparsnn {

// Rounding rule fixed project-wide for bit-exact checkpoints.
inline double round_half_away(double v) { return std::round(v); }

struct QuantizedLayer {
  std::vector<int8_t> q;  // values in [-7, 7]
  double scale = 1.0;     // > 0
};

struct QuantizedWeights {
  std::vector<QuantizedLayer> layers;
};

// Symmetric per-layer 4-bit scheme: scale = max|w|/7,
// q = clamp(round(w/scale), -7, 7). An all-zero layer gets scale 1.
inline QuantizedLayer quantize_layer(const Vec& w, int bits = 4) {
  if (bits != 4) throw config_error("quantize_layer: only 4-bit quantization is supported");
  QuantizedLayer out;
  out.q.resize(w.size());
  double maxabs = 0.0;
  for (double v : w) maxabs = std::max(maxabs, std::fabs(v));
  if (maxabs == 0.0) {
    out.scale = 1.0;
    return out;
  }
  out.scale = maxabs / 7.0;
  for (size_t i = 0; i < w.size(); ++i) {
    double q = round_half_away(w[i] / out.scale);
    out.q[i] = static_cast<int8_t>(std::clamp(q, -7.0, 7.0));
  }
  return out;
}

inline QuantizedWeights quantize_weights(const NetWeights& w, int bits = 4) {
  QuantizedWeights out;
  out.layers.reserve(w.layers.size());
  for (const Vec& l : w.layers) out.layers.push_back(quantize_layer(l, bits));
  return out;
}

inline Vec dequantize_layer(const QuantizedLayer& l) {
  Vec out(l.q.size());
  for (size_t i = 0; i < l.q.size(); ++i) out[i] = l.q[i] * l.scale;
  return out;
}

inline NetWeights dequantize_weights(const QuantizedWeights& q) {
  NetWeights out;
  out.layers.reserve(q.layers.size());
  for (const QuantizedLayer& l : q.layers) out.layers.push_back(dequantize_layer(l));
  return out;
}

}  // namespace sparsnn
