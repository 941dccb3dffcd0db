#pragma once

#include <cstdint>
#include <vector>

#include "sparsnn/neuron.hpp"
#include "sparsnn/tensor.hpp"
#include "sparsnn/topology.hpp"

namespace sparsnn {

// Per-weighted-layer flat weight storage.
// Conv layout: [c_out][c_in][ky][kx]; FC layout: [out][in].
struct NetWeights {
  std::vector<Vec> layers;
};

// Dense convolution (or matrix product for FC) of one input frame against
// the layer weights. This is the exact reference the event-driven simulator
// is checked against; inputs may be real-valued (relaxed training mode).
inline Vec dense_synaptic_forward(const Vec& in, const Vec& w, const LayerSpec& spec) {
  if (static_cast<int>(in.size()) != spec.in_shape.size())
    throw shape_error("dense_synaptic_forward: input size != layer in_shape");
  if (static_cast<int>(w.size()) != weight_count(spec))
    throw shape_error("dense_synaptic_forward: weight size mismatch");

  Vec out(spec.out_shape.size(), 0.0);
  if (spec.kind == LayerKind::FullyConnected) {
    const int n_in = spec.in_shape.size();
    for (int o = 0; o < spec.out_features; ++o) {
      double acc = 0.0;
      const double* row = w.data() + static_cast<size_t>(o) * n_in;
      for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
      out[o] = acc;
    }
    return out;
  }

  const int ci = spec.in_shape.c, hi = spec.in_shape.h, wi = spec.in_shape.w;
  const int co = spec.out_channels, ho = spec.out_shape.h, wo = spec.out_shape.w;
  const int F = spec.kernel, s = spec.stride, p = spec.padding;
  for (int oc = 0; oc < co; ++oc) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        for (int ic = 0; ic < ci; ++ic) {
          for (int ky = 0; ky < F; ++ky) {
            int iy = oy * s - p + ky;
            if (iy < 0 || iy >= hi) continue;
            for (int kx = 0; kx < F; ++kx) {
              int ix = ox * s - p + kx;
              if (ix < 0 || ix >= wi) continue;
              acc += w[((static_cast<size_t>(oc) * ci + ic) * F + ky) * F + kx] *
                     in[(static_cast<size_t>(ic) * hi + iy) * wi + ix];
            }
          }
        }
        out[(static_cast<size_t>(oc) * ho + oy) * wo + ox] = acc;
      }
    }
  }
  return out;
}

inline Vec conv_forward_dense(const uint8_t* spikes_in, const Vec& w, const LayerSpec& spec) {
  Vec in(spikes_in, spikes_in + spec.in_shape.size());
  return dense_synaptic_forward(in, w, spec);
}

// Spiking max-pool: binary OR over each ZxZ window. For real-valued inputs
// the same routine is a plain max; `argmax_out`, when given, records the flat
// input index that won each window (first maximum on ties).
inline Vec maxpool_forward(const Vec& in, const LayerSpec& spec, std::vector<int>* argmax_out = nullptr) {
  if (static_cast<int>(in.size()) != spec.in_shape.size())
    throw shape_error("maxpool_forward: input size != layer in_shape");
  const int c = spec.in_shape.c, hi = spec.in_shape.h, wi = spec.in_shape.w;
  const int Z = spec.window, ho = spec.out_shape.h, wo = spec.out_shape.w;
  Vec out(spec.out_shape.size(), 0.0);
  if (argmax_out) argmax_out->assign(out.size(), 0);
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double best = in[(static_cast<size_t>(ch) * hi + oy * Z) * wi + ox * Z];
        int best_idx = (ch * hi + oy * Z) * wi + ox * Z;
        for (int dy = 0; dy < Z; ++dy) {
          for (int dx = 0; dx < Z; ++dx) {
            int idx = (ch * hi + oy * Z + dy) * wi + ox * Z + dx;
            if (in[idx] > best) {
              best = in[idx];
              best_idx = idx;
            }
          }
        }
        out[(static_cast<size_t>(ch) * ho + oy) * wo + ox] = best;
        if (argmax_out) (*argmax_out)[(static_cast<size_t>(ch) * ho + oy) * wo + ox] = best_idx;
      }
    }
  }
  return out;
}

inline SpikeTrain maxpool_spikes(const SpikeTrain& in, int window) {
  LayerSpec spec;
  spec.kind = LayerKind::MaxPool;
  spec.window = window;
  spec.in_shape = in.shape();
  spec.out_shape = derive_out_shape(spec);
  SpikeTrain out(in.timesteps(), spec.out_shape);
  for (int t = 0; t < in.timesteps(); ++t) {
    Vec o = maxpool_forward(in.frame_as_vec(t), spec);
    for (int i = 0; i < spec.out_shape.size(); ++i)
      if (o[i] > 0.0) out.set(t, i);
  }
  return out;
}

enum class NeuronType { Lif, Lapicque };

struct NeuronConfig {
  NeuronType type = NeuronType::Lif;
  LifParams lif{};
  LapParams lap{};

  double decay() const { return type == NeuronType::Lif ? lif.beta : lap.decay(); }
  double input_scale() const { return type == NeuronType::Lif ? 1.0 : lap.input_scale(); }
  double theta() const { return type == NeuronType::Lif ? lif.theta : lap.theta; }
  ResetMode reset() const { return type == NeuronType::Lif ? lif.reset : lap.reset; }

  void validate() const {
    if (type == NeuronType::Lif) lif.validate();
    else lap.validate();
  }
};

struct ForwardResult {
  std::vector<SpikeTrain> layer_spikes;  // one per topology layer
  std::vector<Vec> final_membranes;      // per weighted layer
};

// Floating-point reference forward pass: at each timestep spikes flow through
// the whole layer stack (no inter-layer delay); membranes start at zero.
inline ForwardResult forward_network(const Topology& topo, const SpikeTrain& input,
                                     const NetWeights& weights, const NeuronConfig& neuron) {
  if (!(input.shape() == topo.input) || input.timesteps() != topo.timesteps)
    throw shape_error("forward_network: input does not match topology");
  neuron.validate();

  const int T = topo.timesteps;
  ForwardResult res;
  res.layer_spikes.reserve(topo.layers.size());
  for (const LayerSpec& l : topo.layers) res.layer_spikes.emplace_back(T, l.out_shape);

  std::vector<Vec> membranes;
  std::vector<int> widx;  // weight index per layer, -1 for pools
  int wi = 0;
  for (const LayerSpec& l : topo.layers) {
    if (has_weights(l)) {
      membranes.emplace_back(l.out_shape.size(), 0.0);
      widx.push_back(wi++);
    } else {
      widx.push_back(-1);
    }
  }
  if (static_cast<size_t>(wi) != weights.layers.size())
    throw shape_error("forward_network: weight layer count mismatch");

  for (int t = 0; t < T; ++t) {
    Vec cur = input.frame_as_vec(t);
    int mi = 0;
    for (size_t li = 0; li < topo.layers.size(); ++li) {
      const LayerSpec& l = topo.layers[li];
      if (l.kind == LayerKind::MaxPool) {
        cur = maxpool_forward(cur, l);
      } else {
        Vec syn = dense_synaptic_forward(cur, weights.layers[widx[li]], l);
        std::vector<uint8_t> sp =
            detail::membrane_step(membranes[mi], syn, neuron.decay(), neuron.input_scale(),
                                  neuron.theta(), neuron.reset());
        cur.assign(sp.begin(), sp.end());
        ++mi;
      }
      for (int i = 0; i < l.out_shape.size(); ++i)
        if (cur[i] > 0.0) res.layer_spikes[li].set(t, i);
    }
  }
  res.final_membranes = std::move(membranes);
  return res;
}

}  // namespace sparsnn
