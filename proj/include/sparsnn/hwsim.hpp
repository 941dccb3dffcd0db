#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sparsnn/metrics.hpp"
#include "sparsnn/network.hpp"
#include "sparsnn/quantize.hpp"
#include "sparsnn/tensor.hpp"
#include "sparsnn/topology.hpp"

namespace sparsnn {

struct OpCosts {
  long shift = 1;
  long add = 1;
  long compare = 1;
  long mul = 2;
};

struct HwConfig {
  int P = 1;                        // parallelization factor
  long c_ovhd = 10;                 // control overhead, cycles per layer per timestep
  long penc_cycles_per_active = 1;
  long t_accum = 1;                 // cycles per weight-accumulate
  OpCosts op_costs;
  double frequency_mhz = 100.0;
  int frac_bits = 8;                // membrane fixed point: signed 16-bit, frac_bits fractional

  void validate() const {
    if (P < 1) throw config_error("HwConfig: P must be >= 1");
    if (c_ovhd < 0 || penc_cycles_per_active < 0 || t_accum < 0) throw config_error("HwConfig: negative cycle cost");
    if (frac_bits < 1 || frac_bits > 14) throw config_error("HwConfig: frac_bits out of range");
  }
};

namespace fx {

inline int32_t saturate16(int64_t v, bool* saturated = nullptr) {
  if (v > 32767) {
    if (saturated) *saturated = true;
    return 32767;
  }
  if (v < -32768) {
    if (saturated) *saturated = true;
    return -32768;
  }
  return static_cast<int32_t>(v);
}

inline int32_t to_fixed(double v, int frac) {
  return saturate16(std::llround(v * static_cast<double>(1L << frac)));
}

// Detects beta = 2^-s so the decay can use an exact arithmetic shift.
inline bool power_of_two_shift(double beta, int* shift_out) {
  for (int s = 1; s <= 14; ++s) {
    if (beta == std::ldexp(1.0, -s)) {
      *shift_out = s;
      return true;
    }
  }
  return false;
}

}  // namespace fx

// Fixed-point neuron parameters shared by the dense reference and the
// event-driven path, so the two produce bit-identical spikes.
struct FxNeuron {
  NeuronType type = NeuronType::Lif;
  ResetMode reset = ResetMode::Subtract;
  int frac = 8;
  int32_t theta_fx = 0;
  int32_t decay_fx = 0;      // round(decay * 2^frac)
  int32_t in_scale_fx = 0;   // Lapicque input coupling
  bool decay_identity = false;
  bool decay_is_shift = false;
  int shift_amount = 0;
  bool scale_input = false;  // false: syn passes through unscaled (LIF)

  static FxNeuron from(const NeuronConfig& n, int frac_bits) {
    n.validate();
    FxNeuron f;
    f.type = n.type;
    f.reset = n.reset();
    f.frac = frac_bits;
    f.theta_fx = fx::to_fixed(n.theta(), frac_bits);
    double d = n.decay();
    f.decay_identity = (d == 1.0);
    f.decay_is_shift = !f.decay_identity && fx::power_of_two_shift(d, &f.shift_amount);
    f.decay_fx = fx::to_fixed(d, frac_bits);
    f.scale_input = n.type == NeuronType::Lapicque;
    f.in_scale_fx = fx::to_fixed(n.input_scale(), frac_bits);
    return f;
  }

  int32_t decay_membrane(int32_t u) const {
    if (decay_identity) return u;
    if (decay_is_shift) return u >> shift_amount;
    return static_cast<int32_t>((static_cast<int64_t>(u) * decay_fx) >> frac);
  }

  int64_t scale_syn(int64_t syn) const {
    if (!scale_input) return syn;
    return (syn * in_scale_fx) >> frac;
  }

  // One membrane update; returns whether the neuron spiked.
  bool step(int32_t& u, int64_t syn, bool* saturated) const {
    int64_t v = static_cast<int64_t>(decay_membrane(u)) + scale_syn(syn);
    int32_t vf = fx::saturate16(v, saturated);
    if (vf >= theta_fx) {
      u = (reset == ResetMode::Subtract) ? fx::saturate16(static_cast<int64_t>(vf) - theta_fx, saturated) : 0;
      return true;
    }
    u = vf;
    return false;
  }

  // Per-update cycle cost under the configured op costs (decay + integrate +
  // compare; Lapicque pays two multiplies for the RC constants).
  long update_cost(const OpCosts& c) const {
    if (type == NeuronType::Lapicque) return 2 * c.mul + c.add + c.compare;
    long decay_cost = decay_identity ? 0 : (decay_is_shift ? c.shift : c.mul);
    return decay_cost + c.add + c.compare;
  }
};

// Fixed-point weights: round(q * scale * 2^frac) per weight.
inline std::vector<int32_t> weights_to_fixed(const QuantizedLayer& l, int frac) {
  std::vector<int32_t> out(l.q.size());
  for (size_t i = 0; i < l.q.size(); ++i)
    out[i] = static_cast<int32_t>(std::llround(l.q[i] * l.scale * static_cast<double>(1L << frac)));
  return out;
}

// Indices of set bits in ascending order; models the priority encoder that
// skips inactive neurons. Cycle cost is count * penc_cycles_per_active.
inline std::vector<int> penc_scan(const uint8_t* frame, int n) {
  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (frame[i]) active.push_back(i);
  return active;
}

inline std::vector<int> penc_scan(const std::vector<uint8_t>& bits) {
  return penc_scan(bits.data(), static_cast<int>(bits.size()));
}

// Number of output neurons whose receptive field covers one active input
// (boundary-clipped); for FC layers every output is affected.
inline int agu_target_count(int active_index, const LayerSpec& spec) {
  if (active_index < 0 || active_index >= spec.in_shape.size())
    throw shape_error("agu_target_count: index out of input shape");
  if (spec.kind == LayerKind::FullyConnected) return spec.out_features;
  if (spec.kind == LayerKind::MaxPool) return 1;
  const int hi = spec.in_shape.h, wi = spec.in_shape.w;
  const int F = spec.kernel, s = spec.stride, p = spec.padding;
  int rem = active_index % (hi * wi);
  int iy = rem / wi, ix = rem % wi;
  int count = 0;
  for (int ky = 0; ky < F; ++ky) {
    int num = iy + p - ky;
    if (num < 0 || num % s != 0 || num / s >= spec.out_shape.h) continue;
    for (int kx = 0; kx < F; ++kx) {
      int numx = ix + p - kx;
      if (numx < 0 || numx % s != 0 || numx / s >= spec.out_shape.w) continue;
      ++count;
    }
  }
  return count * spec.out_channels;
}

struct LayerSimReport {
  std::string token;  // grammar token of the layer
  long cycles = 0;
  long n_active = 0;
  long accumulates = 0;
  long updates = 0;
  long mem_reads = 0;
  long mem_writes = 0;
  long weight_fetches = 0;
  bool saturated = false;
  std::vector<long> out_channel_spikes;  // per output channel, summed over T
  // per-timestep breakdown for the CSV report
  std::vector<long> cycles_t, active_t, accumulates_t, updates_t, out_spikes_t;
};

struct SimReport {
  std::vector<LayerSimReport> layers;
  long total_cycles = 0;
  double latency_ms = 0.0;
  double activity = 0.0;
  OpCounts ops;
  double energy = 0.0;
  double edp = 0.0;
  std::vector<SpikeTrain> layer_spikes;
};

// Eq-shape coarse latency model: ceil((C_ovHD + N_active * T_accum) / P).
inline long analytic_latency(long n_active, const HwConfig& hw) {
  if (n_active < 0) throw config_error("analytic_latency: N_active must be >= 0");
  long raw = hw.c_ovhd + n_active * hw.t_accum;
  return (raw + hw.P - 1) / hw.P;
}

// Conv workload: W = F * C_out * sum(S_i), F being the kernel area.
inline long conv_workload(long kernel_area, long c_out, const std::vector<long>& channel_spike_counts) {
  long total = 0;
  for (long s : channel_spike_counts) {
    if (s < 0) throw config_error("conv_workload: negative spike count");
    total += s;
  }
  return kernel_area * c_out * total;
}

namespace detail {

inline long ceil_div(long a, long p) { return (a + p - 1) / p; }

struct LayerState {
  std::vector<int32_t> membranes;
  std::vector<int32_t> wfx;
};

// One timestep of one weighted layer in the event-driven path. Scatters
// active inputs through the AGU, then updates neurons. Membrane state is
// advanced for every neuron (the functional semantics of the dense
// reference); hardware traffic counters are charged only for neurons that
// received at least one accumulate.
inline void event_step(const LayerSpec& spec, const std::vector<int>& active, LayerState& st,
                       const FxNeuron& neuron, const HwConfig& hw, LayerSimReport& rep,
                       std::vector<uint8_t>& spikes_out) {
  const int n_out = spec.out_shape.size();
  std::vector<int64_t> syn(n_out, 0);
  std::vector<uint8_t> touched(n_out, 0);
  long accum = 0;

  std::vector<uint8_t> channel_active(spec.in_shape.c, 0);
  const int plane = spec.in_shape.h * spec.in_shape.w;

  if (spec.kind == LayerKind::FullyConnected) {
    const int n_in = spec.in_shape.size();
    for (int idx : active) {
      channel_active[idx / plane] = 1;
      for (int o = 0; o < spec.out_features; ++o) {
        syn[o] += st.wfx[static_cast<size_t>(o) * n_in + idx];
        touched[o] = 1;
      }
      accum += spec.out_features;
    }
  } else {
    const int hi = spec.in_shape.h, wi = spec.in_shape.w;
    const int ho = spec.out_shape.h, wo = spec.out_shape.w;
    const int ci = spec.in_shape.c, co = spec.out_channels;
    const int F = spec.kernel, s = spec.stride, p = spec.padding;
    for (int idx : active) {
      int ic = idx / plane;
      channel_active[ic] = 1;
      int rem = idx % plane;
      int iy = rem / wi, ix = rem % wi;
      for (int ky = 0; ky < F; ++ky) {
        int num = iy + p - ky;
        if (num < 0 || num % s != 0) continue;
        int oy = num / s;
        if (oy >= ho) continue;
        for (int kx = 0; kx < F; ++kx) {
          int numx = ix + p - kx;
          if (numx < 0 || numx % s != 0) continue;
          int ox = numx / s;
          if (ox >= wo) continue;
          for (int oc = 0; oc < co; ++oc) {
            size_t oofs = (static_cast<size_t>(oc) * ho + oy) * wo + ox;
            syn[oofs] += st.wfx[((static_cast<size_t>(oc) * ci + ic) * F + ky) * F + kx];
            touched[oofs] = 1;
            ++accum;
          }
        }
      }
    }
  }

  // Weights are fetched only for input channels with at least one active
  // spike this timestep.
  long fetch = 0;
  for (int c = 0; c < spec.in_shape.c; ++c) {
    if (!channel_active[c]) continue;
    fetch += spec.kind == LayerKind::FullyConnected
                 ? static_cast<long>(spec.out_features) * plane
                 : static_cast<long>(spec.kernel) * spec.kernel * spec.out_channels;
  }

  long updates = 0;
  bool sat = false;
  spikes_out.assign(n_out, 0);
  for (int i = 0; i < n_out; ++i) {
    bool spiked = neuron.step(st.membranes[i], syn[i], &sat);
    spikes_out[i] = spiked ? 1 : 0;
    if (touched[i]) ++updates;
  }

  long n_active = static_cast<long>(active.size());
  long cycles = hw.c_ovhd + n_active * hw.penc_cycles_per_active +
                ceil_div(accum * hw.t_accum, hw.P) +
                ceil_div(updates * neuron.update_cost(hw.op_costs), hw.P);

  rep.cycles += cycles;
  rep.n_active += n_active;
  rep.accumulates += accum;
  rep.updates += updates;
  rep.mem_reads += updates;
  rep.mem_writes += updates;
  rep.weight_fetches += fetch;
  rep.saturated = rep.saturated || sat;
  rep.cycles_t.push_back(cycles);
  rep.active_t.push_back(n_active);
  rep.accumulates_t.push_back(accum);
  rep.updates_t.push_back(updates);
  long out_spikes = 0;
  const int out_plane = spec.out_shape.h * spec.out_shape.w;
  for (int i = 0; i < n_out; ++i) {
    if (spikes_out[i]) {
      ++out_spikes;
      ++rep.out_channel_spikes[i / out_plane];
    }
  }
  rep.out_spikes_t.push_back(out_spikes);
}

inline void pool_step(const LayerSpec& spec, const std::vector<int>& active, const HwConfig& hw,
                      LayerSimReport& rep, std::vector<uint8_t>& spikes_out) {
  const int hi = spec.in_shape.h, wi = spec.in_shape.w;
  const int ho = spec.out_shape.h, wo = spec.out_shape.w;
  const int Z = spec.window;
  spikes_out.assign(spec.out_shape.size(), 0);
  for (int idx : active) {
    int c = idx / (hi * wi);
    int rem = idx % (hi * wi);
    int oy = (rem / wi) / Z, ox = (rem % wi) / Z;
    spikes_out[(static_cast<size_t>(c) * ho + oy) * wo + ox] = 1;
  }
  long n_active = static_cast<long>(active.size());
  long cycles = hw.c_ovhd + n_active * hw.penc_cycles_per_active;
  rep.cycles += cycles;
  rep.n_active += n_active;
  rep.cycles_t.push_back(cycles);
  rep.active_t.push_back(n_active);
  rep.accumulates_t.push_back(0);
  rep.updates_t.push_back(0);
  long out_spikes = 0;
  const int out_plane = ho * wo;
  for (size_t i = 0; i < spikes_out.size(); ++i) {
    if (spikes_out[i]) {
      ++out_spikes;
      ++rep.out_channel_spikes[i / out_plane];
    }
  }
  rep.out_spikes_t.push_back(out_spikes);
}

inline std::string layer_token(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Conv:
      return std::to_string(l.out_channels) + "C" + std::to_string(l.kernel);
    case LayerKind::MaxPool:
      return "MP" + std::to_string(l.window);
    case LayerKind::FullyConnected:
      return "FC" + std::to_string(l.out_features);
  }
  return "?";
}

}  // namespace detail

struct LayerSimResult {
  LayerSimReport report;
  SpikeTrain spikes;
};

// Event-driven simulation of one weighted layer over all timesteps.
inline LayerSimResult simulate_layer(const LayerSpec& spec, const SpikeTrain& input,
                                     const QuantizedLayer& weights, const NeuronConfig& neuron,
                                     const HwConfig& hw) {
  hw.validate();
  if (!(input.shape() == spec.in_shape)) throw shape_error("simulate_layer: input shape mismatch");
  if (static_cast<int>(weights.q.size()) != weight_count(spec))
    throw shape_error("simulate_layer: weight size mismatch");
  FxNeuron fxn = FxNeuron::from(neuron, hw.frac_bits);
  detail::LayerState st;
  st.membranes.assign(spec.out_shape.size(), 0);
  st.wfx = weights_to_fixed(weights, hw.frac_bits);

  LayerSimResult res{{}, SpikeTrain(input.timesteps(), spec.out_shape)};
  res.report.token = detail::layer_token(spec);
  res.report.out_channel_spikes.assign(spec.out_shape.c, 0);
  std::vector<uint8_t> out;
  for (int t = 0; t < input.timesteps(); ++t) {
    std::vector<int> active = penc_scan(input.frame(t), spec.in_shape.size());
    detail::event_step(spec, active, st, fxn, hw, res.report, out);
    for (size_t i = 0; i < out.size(); ++i)
      if (out[i]) res.spikes.set(t, static_cast<int>(i));
  }
  return res;
}

// Full-network event-driven simulation: layers execute sequentially within
// each timestep; spike outputs are bit-identical to dense_fixed_forward.
inline SimReport simulate_network(const Topology& topo, const SpikeTrain& input,
                                  const QuantizedWeights& qw, const NeuronConfig& neuron,
                                  const HwConfig& hw) {
  hw.validate();
  if (!(input.shape() == topo.input) || input.timesteps() != topo.timesteps)
    throw shape_error("simulate_network: input does not match topology");
  FxNeuron fxn = FxNeuron::from(neuron, hw.frac_bits);

  const int n_stages = static_cast<int>(topo.layers.size());
  std::vector<int> widx(n_stages, -1);
  int wi = 0;
  for (int i = 0; i < n_stages; ++i)
    if (has_weights(topo.layers[i])) widx[i] = wi++;
  if (static_cast<size_t>(wi) != qw.layers.size())
    throw shape_error("simulate_network: weight layer count mismatch");

  std::vector<detail::LayerState> states(wi);
  for (int i = 0; i < n_stages; ++i) {
    if (widx[i] < 0) continue;
    states[widx[i]].membranes.assign(topo.layers[i].out_shape.size(), 0);
    states[widx[i]].wfx = weights_to_fixed(qw.layers[widx[i]], hw.frac_bits);
  }

  SimReport rep;
  rep.layers.resize(n_stages);
  for (int i = 0; i < n_stages; ++i) {
    rep.layers[i].token = detail::layer_token(topo.layers[i]);
    rep.layers[i].out_channel_spikes.assign(topo.layers[i].out_shape.c, 0);
    rep.layer_spikes.emplace_back(topo.timesteps, topo.layers[i].out_shape);
  }

  for (int t = 0; t < topo.timesteps; ++t) {
    const uint8_t* frame = input.frame(t);
    std::vector<uint8_t> cur(frame, frame + topo.input.size());
    for (int li = 0; li < n_stages; ++li) {
      const LayerSpec& l = topo.layers[li];
      std::vector<int> active = penc_scan(cur);
      std::vector<uint8_t> out;
      if (l.kind == LayerKind::MaxPool) {
        detail::pool_step(l, active, hw, rep.layers[li], out);
      } else {
        detail::event_step(l, active, states[widx[li]], fxn, hw, rep.layers[li], out);
      }
      for (size_t i = 0; i < out.size(); ++i)
        if (out[i]) rep.layer_spikes[li].set(t, static_cast<int>(i));
      cur = std::move(out);
    }
  }

  long n_neurons = 0;
  for (int i = 0; i < n_stages; ++i) {
    rep.total_cycles += rep.layers[i].cycles;
    n_neurons += topo.layers[i].out_shape.size();
  }
  rep.latency_ms = static_cast<double>(rep.total_cycles) / (hw.frequency_mhz * 1000.0);
  rep.activity = activity_density(rep.layer_spikes, topo.timesteps, n_neurons);

  for (const LayerSimReport& l : rep.layers) {
    rep.ops.adds += l.accumulates + l.updates;  // weight accumulates + membrane integrate
    rep.ops.compares += l.updates;
    if (fxn.type == NeuronType::Lapicque) {
      rep.ops.muls += 2 * l.updates;
    } else if (!fxn.decay_identity) {
      if (fxn.decay_is_shift) rep.ops.shifts += l.updates;
      else rep.ops.muls += l.updates;
    }
    rep.ops.mem_accesses += l.mem_reads + l.mem_writes + l.weight_fetches;
  }
  rep.energy = estimate_energy(rep.ops) * 1e-6;
  rep.edp = rep.energy * rep.latency_ms;
  return rep;
}

// Dense fixed-point reference: same arithmetic, no event skipping. Used as
// the oracle for the event-driven path.
inline std::vector<SpikeTrain> dense_fixed_forward(const Topology& topo, const SpikeTrain& input,
                                                   const QuantizedWeights& qw, const NeuronConfig& neuron,
                                                   int frac_bits = 8) {
  if (!(input.shape() == topo.input) || input.timesteps() != topo.timesteps)
    throw shape_error("dense_fixed_forward: input does not match topology");
  FxNeuron fxn = FxNeuron::from(neuron, frac_bits);

  const int n_stages = static_cast<int>(topo.layers.size());
  std::vector<int> widx(n_stages, -1);
  int wi = 0;
  for (int i = 0; i < n_stages; ++i)
    if (has_weights(topo.layers[i])) widx[i] = wi++;

  std::vector<std::vector<int32_t>> membranes(wi);
  std::vector<std::vector<int32_t>> wfx(wi);
  for (int i = 0; i < n_stages; ++i) {
    if (widx[i] < 0) continue;
    membranes[widx[i]].assign(topo.layers[i].out_shape.size(), 0);
    wfx[widx[i]] = weights_to_fixed(qw.layers[widx[i]], frac_bits);
  }

  std::vector<SpikeTrain> out;
  for (int i = 0; i < n_stages; ++i) out.emplace_back(topo.timesteps, topo.layers[i].out_shape);

  for (int t = 0; t < topo.timesteps; ++t) {
    const uint8_t* frame = input.frame(t);
    std::vector<uint8_t> cur(frame, frame + topo.input.size());
    for (int li = 0; li < n_stages; ++li) {
      const LayerSpec& l = topo.layers[li];
      std::vector<uint8_t> next(l.out_shape.size(), 0);
      if (l.kind == LayerKind::MaxPool) {
        const int hi = l.in_shape.h, wi_ = l.in_shape.w;
        const int ho = l.out_shape.h, wo = l.out_shape.w;
        for (int c = 0; c < l.in_shape.c; ++c)
          for (int y = 0; y < hi; ++y)
            for (int x = 0; x < wi_; ++x)
              if (cur[(static_cast<size_t>(c) * hi + y) * wi_ + x])
                next[(static_cast<size_t>(c) * ho + y / l.window) * wo + x / l.window] = 1;
      } else {
        // dense synaptic accumulation in integer fixed point
        std::vector<int64_t> syn(l.out_shape.size(), 0);
        const std::vector<int32_t>& w = wfx[widx[li]];
        if (l.kind == LayerKind::FullyConnected) {
          const int n_in = l.in_shape.size();
          for (int i2 = 0; i2 < n_in; ++i2) {
            if (!cur[i2]) continue;
            for (int o = 0; o < l.out_features; ++o) syn[o] += w[static_cast<size_t>(o) * n_in + i2];
          }
        } else {
          const int ci = l.in_shape.c, hi = l.in_shape.h, wi_ = l.in_shape.w;
          const int co = l.out_channels, ho = l.out_shape.h, wo = l.out_shape.w;
          const int F = l.kernel, s = l.stride, p = l.padding;
          for (int oc = 0; oc < co; ++oc)
            for (int oy = 0; oy < ho; ++oy)
              for (int ox = 0; ox < wo; ++ox) {
                int64_t acc = 0;
                for (int ic = 0; ic < ci; ++ic)
                  for (int ky = 0; ky < F; ++ky) {
                    int iy = oy * s - p + ky;
                    if (iy < 0 || iy >= hi) continue;
                    for (int kx = 0; kx < F; ++kx) {
                      int ix = ox * s - p + kx;
                      if (ix < 0 || ix >= wi_) continue;
                      if (cur[(static_cast<size_t>(ic) * hi + iy) * wi_ + ix])
                        acc += w[((static_cast<size_t>(oc) * ci + ic) * F + ky) * F + kx];
                    }
                  }
                syn[(static_cast<size_t>(oc) * ho + oy) * wo + ox] = acc;
              }
        }
        std::vector<int32_t>& u = membranes[widx[li]];
        for (size_t i2 = 0; i2 < u.size(); ++i2)
          if (fxn.step(u[i2], syn[i2], nullptr)) next[i2] = 1;
      }
      for (size_t i2 = 0; i2 < next.size(); ++i2)
        if (next[i2]) out[li].set(t, static_cast<int>(i2));
      cur = std::move(next);
    }
  }
  return out;
}

}  // namespace sparsnn
