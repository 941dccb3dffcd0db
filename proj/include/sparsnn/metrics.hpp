#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsnn/errors.hpp"
#include "sparsnn/tensor.hpp"

namespace sparsnn {

// Average spike rate per neuron per timestep: A = (1/(T*N)) * sum of spikes.
inline double activity_density(const std::vector<SpikeTrain>& layer_spikes, int T, long n_neurons) {
  if (T < 1 || n_neurons < 1) throw config_error("activity_density: T and N must be >= 1");
  long total = 0;
  for (const SpikeTrain& s : layer_spikes) total += s.total_spikes();
  return static_cast<double>(total) / (static_cast<double>(T) * n_neurons);
}

// Per-op-class energy constants (arbitrary units; non-physical, for relative
// comparisons only).
struct EnergyModel {
  double add = 1.0;
  double shift = 1.0;
  double compare = 1.0;
  double mul = 3.0;
  double mem_access = 5.0;
};

struct OpCounts {
  long adds = 0;
  long shifts = 0;
  long compares = 0;
  long muls = 0;
  long mem_accesses = 0;
};

inline double estimate_energy(const OpCounts& ops, const EnergyModel& m = {}) {
  return ops.adds * m.add + ops.shifts * m.shift + ops.compares * m.compare + ops.muls * m.mul +
         ops.mem_accesses * m.mem_access;
}

struct TrialRecord {
  std::string config_hash;
  double accuracy = 0.0;       // fraction
  long total_cycles = 0;
  double latency_ms = 0.0;
  double activity = 0.0;       // density fraction
  double energy = 0.0;         // model units
  double edp = 0.0;            // energy * latency
  std::string status = "ok";
};

// Non-dominated subset in (accuracy up, latency down). a dominates b iff
// acc(a) >= acc(b) and lat(a) <= lat(b), with at least one strict. Ties on
// both axes are all kept; output is ordered by config hash.
inline std::vector<TrialRecord> pareto_front(std::vector<TrialRecord> records) {
  if (records.empty()) throw config_error("pareto_front: need at least one record");
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
    return a.accuracy > b.accuracy;
  });
  std::vector<TrialRecord> front;
  double best_acc = -1.0;
  double best_acc_lat = 0.0;
  for (const TrialRecord& r : records) {
    if (r.accuracy > best_acc) {
      best_acc = r.accuracy;
      best_acc_lat = r.latency_ms;
      front.push_back(r);
    } else if (r.accuracy == best_acc && r.latency_ms == best_acc_lat) {
      front.push_back(r);  // tied on both axes
    }
  }
  std::sort(front.begin(), front.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.config_hash < b.config_hash; });
  return front;
}

}  // namespace sparsnn
