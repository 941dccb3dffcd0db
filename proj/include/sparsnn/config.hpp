#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sparsnn/errors.hpp"
#include "sparsnn/events.hpp"
#include "sparsnn/hwsim.hpp"
#include "sparsnn/trainer.hpp"

namespace sparsnn {

using json = nlohmann::json;

inline std::string surrogate_type_name(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::FastSigmoid: return "fast_sigmoid";
    case SurrogateKind::Atan: return "atan";
    case SurrogateKind::SpikeRateEscape: return "spike_rate_escape";
    case SurrogateKind::Sso: return "SSO";
  }
  throw config_error("unknown surrogate kind");
}

inline SurrogateKind surrogate_kind_from(const std::string& name) {
  if (name == "fast_sigmoid") return SurrogateKind::FastSigmoid;
  if (name == "atan") return SurrogateKind::Atan;
  if (name == "spike_rate_escape") return SurrogateKind::SpikeRateEscape;
  if (name == "SSO") return SurrogateKind::Sso;
  throw config_error("unknown surrogate_type '" + name + "'");
}

inline std::string neuron_type_name(NeuronType t) {
  return t == NeuronType::Lif ? "lif" : "lapicque";
}

inline NeuronType neuron_type_from(const std::string& name) {
  if (name == "lif") return NeuronType::Lif;
  if (name == "lapicque") return NeuronType::Lapicque;
  throw config_error("unknown neuron_type '" + name + "'");
}

// The single sharpness knob of each surrogate, named "slope" in configs.
inline double surrogate_slope(const SurrogateSpec& s) {
  switch (s.kind) {
    case SurrogateKind::FastSigmoid: return s.fs_k;
    case SurrogateKind::Atan: return s.atan_alpha;
    case SurrogateKind::SpikeRateEscape: return s.sre_beta;
    case SurrogateKind::Sso: return 0.0;
  }
  return 0.0;
}

inline SurrogateSpec make_surrogate(SurrogateKind kind, double slope, double u_thr, uint64_t seed) {
  switch (kind) {
    case SurrogateKind::FastSigmoid: return SurrogateSpec::fast_sigmoid(slope);
    case SurrogateKind::Atan: return SurrogateSpec::atan(slope);
    case SurrogateKind::SpikeRateEscape: return SurrogateSpec::spike_rate_escape(slope, u_thr);
    case SurrogateKind::Sso: return SurrogateSpec::sso(0.0, 0.25, seed);
  }
  throw config_error("unknown surrogate kind");
}

inline json train_config_to_json(const TrainConfig& c) {
  json j;
  j["grammar"] = c.grammar;
  j["input"] = {c.input.c, c.input.h, c.input.w};
  j["timesteps"] = c.timesteps;
  j["neuron_type"] = neuron_type_name(c.neuron_type);
  j["beta"] = c.beta;
  j["threshold"] = c.threshold;
  j["reset"] = c.reset == ResetMode::Subtract ? "subtract" : "zero";
  j["surrogate_type"] = surrogate_type_name(c.surrogate.kind);
  j["slope"] = surrogate_slope(c.surrogate);
  if (c.surrogate.kind == SurrogateKind::Sso) {
    j["sso_mu"] = c.surrogate.sso_mu;
    j["sso_sigma2"] = c.surrogate.sso_sigma2;
  }
  j["init_gain"] = c.init_gain;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr0"] = c.lr0;
  j["lr_min"] = c.lr_min;
  j["momentum"] = c.momentum;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  return j;
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  try {
    c.grammar = j.value("grammar", c.grammar);
    if (j.contains("input")) {
      auto a = j.at("input");
      c.input = {a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>()};
    }
    c.timesteps = j.value("timesteps", c.timesteps);
    c.neuron_type = neuron_type_from(j.value("neuron_type", "lif"));
    c.beta = j.value("beta", c.beta);
    c.threshold = j.value("threshold", c.threshold);
    c.reset = j.value("reset", "subtract") == std::string("zero") ? ResetMode::Zero : ResetMode::Subtract;
    c.init_gain = j.value("init_gain", c.init_gain);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_min = j.value("lr_min", c.lr_min);
    c.momentum = j.value("momentum", c.momentum);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    SurrogateKind kind = surrogate_kind_from(j.value("surrogate_type", "fast_sigmoid"));
    double slope = j.value("slope", 5.0);
    c.surrogate = make_surrogate(kind, slope, c.threshold, c.seed);
    if (kind == SurrogateKind::Sso) {
      c.surrogate.sso_mu = j.value("sso_mu", 0.0);
      c.surrogate.sso_sigma2 = j.value("sso_sigma2", 0.25);
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

inline json hw_config_to_json(const HwConfig& h) {
  json j;
  j["P"] = h.P;
  j["c_ovhd"] = h.c_ovhd;
  j["penc_cycles_per_active"] = h.penc_cycles_per_active;
  j["t_accum"] = h.t_accum;
  j["op_costs"] = {{"shift", h.op_costs.shift}, {"add", h.op_costs.add},
                   {"compare", h.op_costs.compare}, {"mul", h.op_costs.mul}};
  j["frequency_mhz"] = h.frequency_mhz;
  j["frac_bits"] = h.frac_bits;
  return j;
}

inline HwConfig hw_config_from_json(const json& j) {
  HwConfig h;
  try {
    h.P = j.value("P", h.P);
    h.c_ovhd = j.value("c_ovhd", h.c_ovhd);
    h.penc_cycles_per_active = j.value("penc_cycles_per_active", h.penc_cycles_per_active);
    h.t_accum = j.value("t_accum", h.t_accum);
    if (j.contains("op_costs")) {
      const json& o = j.at("op_costs");
      h.op_costs.shift = o.value("shift", h.op_costs.shift);
      h.op_costs.add = o.value("add", h.op_costs.add);
      h.op_costs.compare = o.value("compare", h.op_costs.compare);
      h.op_costs.mul = o.value("mul", h.op_costs.mul);
    }
    h.frequency_mhz = j.value("frequency_mhz", h.frequency_mhz);
    h.frac_bits = j.value("frac_bits", h.frac_bits);
  } catch (const json::exception& e) {
    throw config_error(std::string("hw config: ") + e.what());
  }
  h.validate();
  return h;
}

inline json raster_config_to_json(const RasterConfig& r) {
  json j;
  j["timesteps"] = r.timesteps;
  j["downsample"] = r.downsample;
  j["polarity"] = r.polarity == PolarityMode::TwoChannel ? "two_channel" : "merged";
  return j;
}

inline RasterConfig raster_config_from_json(const json& j) {
  RasterConfig r;
  r.timesteps = j.value("timesteps", r.timesteps);
  r.downsample = j.value("downsample", r.downsample);
  r.polarity = j.value("polarity", "two_channel") == std::string("merged") ? PolarityMode::Merged
                                                                           : PolarityMode::TwoChannel;
  r.validate();
  return r;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw config_error("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

// Stable 64-bit FNV-1a over the canonical (sorted-key) JSON serialization;
// defines trial identity for sweep resume.
inline std::string config_hash(const json& j) {
  std::string s = j.dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace sparsnn
