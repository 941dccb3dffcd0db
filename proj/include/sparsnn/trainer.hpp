#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sparsnn/metrics.hpp"
#include "sparsnn/network.hpp"
#include "sparsnn/quantize.hpp"
#include "sparsnn/surrogate.hpp"

namespace sparsnn {

struct TrainConfig {
  std::string grammar = "8C3-MP2-16C3-MP2-FC32-FC4";
  Shape input{2, 12, 12};
  int timesteps = 8;

  NeuronType neuron_type = NeuronType::Lif;
  double beta = 0.5;
  double threshold = 1.0;
  ResetMode reset = ResetMode::Subtract;

  SurrogateSpec surrogate = SurrogateSpec::fast_sigmoid(5.0);

  // Init scale multiplier on the Kaiming fan-in bound. Binary spike inputs
  // drive membranes far more weakly than real-valued activations, so unit
  // gain leaves deep layers below threshold and silent; a larger gain keeps
  // every layer firing at initialization.
  double init_gain = 3.0;

  int epochs = 50;
  int batch_size = 16;
  double lr0 = 0.02;
  double lr_min = 0.005;
  double momentum = 0.9;
  int patience = 20;
  uint64_t seed = 1;

  void validate() const {
    if (epochs < 0 || batch_size < 1 || timesteps < 1) throw config_error("TrainConfig: counts must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw config_error("TrainConfig: beta out of (0,1]");
    if (!(threshold > 0.0)) throw config_error("TrainConfig: threshold must be > 0");
    if (!(init_gain > 0.0)) throw config_error("TrainConfig: init_gain must be > 0");
    surrogate.validate();
  }
};

// Lapicque parameters for a target decay factor via the equivalent
// capacitance C = -1/ln(beta), with R = 1 and T_step = C*(1-beta) so that
// the discrete decay equals beta and the input coupling T/C equals 1-beta.
inline LapParams lap_from_beta(double beta, double theta, ResetMode reset = ResetMode::Subtract) {
  LapParams p;
  p.C = beta_to_capacitance(beta);
  p.R = 1.0;
  p.T_step = p.C * (1.0 - beta);
  p.theta = theta;
  p.reset = reset;
  return p;
}

inline NeuronConfig neuron_from_config(const TrainConfig& cfg) {
  NeuronConfig n;
  n.type = cfg.neuron_type;
  if (cfg.neuron_type == NeuronType::Lif) {
    n.lif = LifParams{cfg.beta, cfg.threshold, cfg.reset};
  } else {
    n.lap = lap_from_beta(cfg.beta, cfg.threshold, cfg.reset);
  }
  return n;
}

struct Sample {
  SpikeTrain x;
  int label = 0;
};

using Dataset = std::vector<Sample>;

struct SpikingNet {
  Topology topo;
  NetWeights w;
  NeuronConfig neuron;
};

// Kaiming-style uniform fan-in init, seed-controlled.
inline NetWeights init_weights(const Topology& topo, uint64_t seed, double gain = 1.0) {
  std::mt19937_64 rng(seed);
  NetWeights w;
  for (const LayerSpec& l : topo.layers) {
    if (!has_weights(l)) continue;
    int fan_in = l.kind == LayerKind::Conv ? l.in_shape.c * l.kernel * l.kernel : l.in_shape.size();
    double bound = gain * std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Vec layer(weight_count(l));
    for (double& v : layer) v = dist(rng);
    w.layers.push_back(std::move(layer));
  }
  return w;
}

inline SpikingNet make_net(const TrainConfig& cfg) {
  SpikingNet net;
  net.topo = Topology::parse(cfg.grammar, cfg.input, cfg.timesteps);
  net.w = init_weights(net.topo, cfg.seed, cfg.init_gain);
  net.neuron = neuron_from_config(cfg);
  return net;
}

// Cross-entropy over softmax of per-class spike counts.
inline double rate_loss(const Vec& counts, int label) {
  if (label < 0 || label >= static_cast<int>(counts.size())) throw config_error("rate_loss: bad label");
  double m = *std::max_element(counts.begin(), counts.end());
  double z = 0.0;
  for (double c : counts) z += std::exp(c - m);
  return std::log(z) - (counts[label] - m);
}

inline Vec rate_loss_grad(const Vec& counts, int label) {
  double m = *std::max_element(counts.begin(), counts.end());
  double z = 0.0;
  for (double c : counts) z += std::exp(c - m);
  Vec g(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) g[i] = std::exp(counts[i] - m) / z;
  g[label] -= 1.0;
  return g;
}

inline double cosine_lr(int epoch, int total_epochs, double lr0, double lr_min) {
  if (epoch < 0 || epoch > total_epochs || total_epochs < 1) throw config_error("cosine_lr: bad epoch");
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(M_PI * epoch / total_epochs));
}

enum class ForwardMode { Spiking, Relaxed };

struct BpttOptions {
  ForwardMode mode = ForwardMode::Spiking;
  // When set, gradients flow through the reset term; default is the
  // detached reset. Relaxed-mode finite-difference checks need it attached.
  bool attach_reset_grad = false;
};

struct BpttResult {
  std::vector<Vec> grads;  // per weighted layer, same layout as weights
  double loss = 0.0;
  Vec out_counts;                  // per-class accumulated outputs
  std::vector<long> layer_spikes;  // spiking mode: spike totals per layer
};

namespace detail {

struct StageTrace {
  Vec input;  // activations entering the stage
  Vec a;      // pre-reset membrane (weighted stages)
  Vec s;      // stage output
  std::vector<int> argmax;  // pool routing
};

}  // namespace detail

// Backpropagation through time for one sample. The forward pass either emits
// heaviside spikes (surrogate substituted in the backward pass) or runs the
// fully-relaxed primitive end to end, in which case the returned gradients
// are the exact derivatives of the relaxed loss.
inline BpttResult bptt_single(const SpikingNet& net, const Sample& sample,
                              const SurrogateSpec& surrogate, const BpttOptions& opts = {}) {
  const Topology& topo = net.topo;
  if (!(sample.x.shape() == topo.input) || sample.x.timesteps() != topo.timesteps)
    throw shape_error("bptt: sample does not match topology");
  if (opts.mode == ForwardMode::Relaxed && surrogate.kind == SurrogateKind::Sso)
    throw config_error("bptt: SSO has no relaxed primitive");

  const int T = topo.timesteps;
  const int n_stages = static_cast<int>(topo.layers.size());
  const double decay = net.neuron.decay();
  const double in_scale = net.neuron.input_scale();
  const double theta = net.neuron.theta();
  const ResetMode reset = net.neuron.reset();

  std::vector<int> widx(n_stages, -1);
  int n_weighted = 0;
  for (int i = 0; i < n_stages; ++i)
    if (has_weights(topo.layers[i])) widx[i] = n_weighted++;

  std::vector<Vec> membranes;
  for (int i = 0; i < n_stages; ++i)
    if (widx[i] >= 0) membranes.emplace_back(topo.layers[i].out_shape.size(), 0.0);

  // ---- forward, recording traces ----
  std::vector<std::vector<detail::StageTrace>> trace(T, std::vector<detail::StageTrace>(n_stages));
  BpttResult res;
  res.out_counts.assign(topo.output_shape().size(), 0.0);
  res.layer_spikes.assign(n_stages, 0);

  for (int t = 0; t < T; ++t) {
    Vec cur = sample.x.frame_as_vec(t);
    for (int li = 0; li < n_stages; ++li) {
      const LayerSpec& l = topo.layers[li];
      detail::StageTrace& tr = trace[t][li];
      tr.input = cur;
      if (l.kind == LayerKind::MaxPool) {
        cur = maxpool_forward(cur, l, &tr.argmax);
        tr.s = cur;
        continue;
      }
      int wl = widx[li];
      Vec syn = dense_synaptic_forward(cur, net.w.layers[wl], l);
      Vec& u = membranes[wl];
      tr.a.resize(u.size());
      tr.s.resize(u.size());
      for (size_t i = 0; i < u.size(); ++i) {
        double a = decay * u[i] + syn[i] * in_scale;
        if (!std::isfinite(a))
          throw numeric_error("bptt: non-finite membrane at layer " + std::to_string(li) +
                              ", t=" + std::to_string(t));
        double s;
        if (opts.mode == ForwardMode::Spiking) {
          s = heaviside(a - theta);
        } else {
          s = relaxed_forward(surrogate, a - theta);
        }
        tr.a[i] = a;
        tr.s[i] = s;
        u[i] = (reset == ResetMode::Subtract) ? a - theta * s : a * (1.0 - s);
      }
      cur = tr.s;
      if (opts.mode == ForwardMode::Spiking)
        for (double s : cur) res.layer_spikes[li] += s > 0.0 ? 1 : 0;
    }
    for (size_t i = 0; i < cur.size(); ++i) res.out_counts[i] += cur[i];
  }

  res.loss = rate_loss(res.out_counts, sample.label);
  Vec dcounts = rate_loss_grad(res.out_counts, sample.label);

  // ---- backward through time ----
  res.grads.assign(n_weighted, Vec());
  for (int li = 0; li < n_stages; ++li)
    if (widx[li] >= 0) res.grads[widx[li]].assign(weight_count(topo.layers[li]), 0.0);

  // carry[wl] = dL/d(post-reset membrane at the end of the step being
  // processed), propagated from timestep t+1.
  std::vector<Vec> carry(n_weighted);
  for (int li = 0; li < n_stages; ++li)
    if (widx[li] >= 0) carry[widx[li]].assign(topo.layers[li].out_shape.size(), 0.0);

  for (int t = T - 1; t >= 0; --t) {
    Vec d = dcounts;  // dL/d(output of final stage at time t)
    for (int li = n_stages - 1; li >= 0; --li) {
      const LayerSpec& l = topo.layers[li];
      const detail::StageTrace& tr = trace[t][li];
      if (l.kind == LayerKind::MaxPool) {
        Vec din(l.in_shape.size(), 0.0);
        for (size_t o = 0; o < d.size(); ++o) din[tr.argmax[o]] += d[o];
        d = std::move(din);
        continue;
      }
      int wl = widx[li];
      Vec da(tr.a.size());
      for (size_t i = 0; i < tr.a.size(); ++i) {
        double x = tr.a[i] - theta;
        double g;
        if (opts.mode == ForwardMode::Relaxed) {
          g = surrogate_grad(surrogate, x);
        } else {
          g = surrogate_grad(surrogate, x, SsoKey{wl, t, static_cast<int>(i)});
        }
        double dres;  // d(post-reset u)/d(pre-reset a)
        if (reset == ResetMode::Subtract) {
          dres = 1.0 - (opts.attach_reset_grad ? theta * g : 0.0);
        } else {
          dres = (1.0 - tr.s[i]) - (opts.attach_reset_grad ? tr.a[i] * g : 0.0);
        }
        da[i] = d[i] * g + carry[wl][i] * dres;
      }
      // next carry: a[t] = decay * u''[t-1] + ...
      for (size_t i = 0; i < da.size(); ++i) carry[wl][i] = decay * da[i];

      // dL/dsyn = da * in_scale; scatter into weights and input.
      Vec dsyn(da.size());
      for (size_t i = 0; i < da.size(); ++i) dsyn[i] = da[i] * in_scale;

      Vec din(l.in_shape.size(), 0.0);
      Vec& gw = res.grads[wl];
      const Vec& w = net.w.layers[wl];
      if (l.kind == LayerKind::FullyConnected) {
        const int n_in = l.in_shape.size();
        for (int o = 0; o < l.out_features; ++o) {
          double go = dsyn[o];
          if (go == 0.0) continue;
          const double* row = w.data() + static_cast<size_t>(o) * n_in;
          double* grow = gw.data() + static_cast<size_t>(o) * n_in;
          for (int i = 0; i < n_in; ++i) {
            grow[i] += go * tr.input[i];
            din[i] += go * row[i];
          }
        }
      } else {
        const int ci = l.in_shape.c, hi = l.in_shape.h, wi_ = l.in_shape.w;
        const int co = l.out_channels, ho = l.out_shape.h, wo = l.out_shape.w;
        const int F = l.kernel, s = l.stride, p = l.padding;
        for (int oc = 0; oc < co; ++oc) {
          for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
              double go = dsyn[(static_cast<size_t>(oc) * ho + oy) * wo + ox];
              if (go == 0.0) continue;
              for (int ic = 0; ic < ci; ++ic) {
                for (int ky = 0; ky < F; ++ky) {
                  int iy = oy * s - p + ky;
                  if (iy < 0 || iy >= hi) continue;
                  for (int kx = 0; kx < F; ++kx) {
                    int ix = ox * s - p + kx;
                    if (ix < 0 || ix >= wi_) continue;
                    size_t wofs = ((static_cast<size_t>(oc) * ci + ic) * F + ky) * F + kx;
                    size_t iofs = (static_cast<size_t>(ic) * hi + iy) * wi_ + ix;
                    gw[wofs] += go * tr.input[iofs];
                    din[iofs] += go * w[wofs];
                  }
                }
              }
            }
          }
        }
      }
      d = std::move(din);
    }
  }
  return res;
}

// Mean gradients over a batch.
inline BpttResult bptt_gradients(const SpikingNet& net, const Dataset& batch,
                                 const SurrogateSpec& surrogate, const BpttOptions& opts = {}) {
  if (batch.empty()) throw config_error("bptt_gradients: empty batch");
  BpttResult acc;
  for (size_t bi = 0; bi < batch.size(); ++bi) {
    BpttResult r = bptt_single(net, batch[bi], surrogate, opts);
    if (bi == 0) {
      acc = std::move(r);
    } else {
      acc.loss += r.loss;
      for (size_t l = 0; l < acc.grads.size(); ++l)
        for (size_t i = 0; i < acc.grads[l].size(); ++i) acc.grads[l][i] += r.grads[l][i];
      for (size_t l = 0; l < acc.layer_spikes.size(); ++l) acc.layer_spikes[l] += r.layer_spikes[l];
    }
  }
  double inv = 1.0 / batch.size();
  acc.loss *= inv;
  for (Vec& g : acc.grads)
    for (double& v : g) v *= inv;
  return acc;
}

struct EvalResult {
  double accuracy = 0.0;
  double activity_density = 0.0;
};

inline EvalResult evaluate_net(const SpikingNet& net, const Dataset& data) {
  if (data.empty()) throw config_error("evaluate: empty dataset");
  long n_neurons = 0;
  for (const LayerSpec& l : net.topo.layers) n_neurons += l.out_shape.size();
  int correct = 0;
  double density_sum = 0.0;
  for (const Sample& s : data) {
    ForwardResult fr = forward_network(net.topo, s.x, net.w, net.neuron);
    Vec counts(net.topo.output_shape().size(), 0.0);
    long spikes = 0;
    for (size_t li = 0; li < fr.layer_spikes.size(); ++li) spikes += fr.layer_spikes[li].total_spikes();
    const SpikeTrain& out = fr.layer_spikes.back();
    for (int t = 0; t < out.timesteps(); ++t)
      for (int i = 0; i < out.shape().size(); ++i) counts[i] += out.at(t, i);
    int pred = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (pred == s.label) ++correct;
    density_sum += static_cast<double>(spikes) / (static_cast<double>(net.topo.timesteps) * n_neurons);
  }
  return {static_cast<double>(correct) / data.size(), density_sum / data.size()};
}

struct Checkpoint {
  std::string grammar;
  Shape input{};
  int timesteps = 1;
  NeuronType neuron_type = NeuronType::Lif;
  double beta = 0.5;
  double threshold = 1.0;
  ResetMode reset = ResetMode::Subtract;
  NetWeights weights;
  QuantizedWeights qweights;

  // metadata
  double final_accuracy = 0.0;
  int epochs_run = 0;
  uint64_t seed = 0;
  bool diverged = false;
};

inline SpikingNet net_from_checkpoint(const Checkpoint& cp, bool use_quantized = false) {
  SpikingNet net;
  net.topo = Topology::parse(cp.grammar, cp.input, cp.timesteps);
  net.w = use_quantized ? dequantize_weights(cp.qweights) : cp.weights;
  TrainConfig tmp;
  tmp.neuron_type = cp.neuron_type;
  tmp.beta = cp.beta;
  tmp.threshold = cp.threshold;
  tmp.reset = cp.reset;
  net.neuron = neuron_from_config(tmp);
  return net;
}

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_density = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
  bool diverged = false;
};

inline Checkpoint checkpoint_from(const TrainConfig& cfg, const SpikingNet& net, double accuracy,
                                  int epochs_run, bool diverged) {
  Checkpoint cp;
  cp.grammar = cfg.grammar;
  cp.input = cfg.input;
  cp.timesteps = cfg.timesteps;
  cp.neuron_type = cfg.neuron_type;
  cp.beta = cfg.beta;
  cp.threshold = cfg.threshold;
  cp.reset = cfg.reset;
  cp.weights = net.w;
  cp.qweights = quantize_weights(net.w);
  cp.final_accuracy = accuracy;
  cp.epochs_run = epochs_run;
  cp.seed = cfg.seed;
  cp.diverged = diverged;
  return cp;
}

// SGD with momentum, cosine-annealed learning rate, patience-based early
// stopping on validation accuracy. Fully determined by (config, data).
// Divergence retains the last finite weights in the checkpoint.
inline TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& val_set) {
  cfg.validate();
  SpikingNet net = make_net(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x7261696e5f6f7264ULL);

  TrainResult result;
  if (cfg.epochs == 0) {
    EvalResult ev = val_set.empty() ? EvalResult{} : evaluate_net(net, val_set);
    result.checkpoint = checkpoint_from(cfg, net, ev.accuracy, 0, false);
    return result;
  }
  if (train_set.empty()) throw config_error("train: empty training set");

  std::vector<Vec> velocity;
  for (const Vec& l : net.w.layers) velocity.emplace_back(l.size(), 0.0);

  std::vector<size_t> idx(train_set.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  NetWeights best_weights = net.w;
  double best_acc = -1.0;
  int best_epoch = -1;
  int epochs_run = 0;
  bool diverged = false;

  for (int epoch = 0; epoch < cfg.epochs && !diverged; ++epoch) {
    double lr = cosine_lr(epoch, cfg.epochs, cfg.lr0, cfg.lr_min);
    std::shuffle(idx.begin(), idx.end(), rng);
    double loss_sum = 0.0;
    int n_batches = 0;
    for (size_t start = 0; start < idx.size(); start += cfg.batch_size) {
      Dataset batch;
      for (size_t i = start; i < std::min(idx.size(), start + cfg.batch_size); ++i)
        batch.push_back(train_set[idx[i]]);
      BpttResult g;
      try {
        g = bptt_gradients(net, batch, cfg.surrogate);
      } catch (const numeric_error&) {
        diverged = true;
        break;
      }
      if (!std::isfinite(g.loss)) {
        diverged = true;
        break;
      }
      loss_sum += g.loss;
      ++n_batches;
      NetWeights before_update = net.w;
      bool finite = true;
      for (size_t l = 0; l < net.w.layers.size(); ++l) {
        for (size_t i = 0; i < net.w.layers[l].size(); ++i) {
          velocity[l][i] = cfg.momentum * velocity[l][i] - lr * g.grads[l][i];
          net.w.layers[l][i] += velocity[l][i];
          if (!std::isfinite(net.w.layers[l][i])) finite = false;
        }
      }
      // an exploding step is divergence too; keep the last finite weights so
      // the retained checkpoint stays usable
      if (!finite) {
        net.w = std::move(before_update);
        diverged = true;
        break;
      }
    }
    epochs_run = epoch + 1;

    EvalResult ev = val_set.empty() ? EvalResult{} : evaluate_net(net, val_set);
    result.log.push_back({epoch, lr, n_batches ? loss_sum / n_batches : 0.0, ev.accuracy, ev.activity_density});
    if (ev.accuracy > best_acc) {
      best_acc = ev.accuracy;
      best_weights = net.w;
      best_epoch = epoch;
    }
    if (!val_set.empty() && epoch - best_epoch >= cfg.patience) break;
  }

  if (!diverged && best_acc >= 0.0) net.w = best_weights;
  double final_acc = val_set.empty() ? 0.0 : evaluate_net(net, val_set).accuracy;
  result.checkpoint = checkpoint_from(cfg, net, final_acc, epochs_run, diverged);
  result.diverged = diverged;
  return result;
}

inline EvalResult evaluate(const Checkpoint& cp, const Dataset& data, bool use_quantized) {
  return evaluate_net(net_from_checkpoint(cp, use_quantized), data);
}

}  // namespace sparsnn
