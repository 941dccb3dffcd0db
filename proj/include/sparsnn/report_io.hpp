#pragma once

#include <filesystem>
#include <fstream>

#include "sparsnn/config.hpp"
#include "sparsnn/hwsim.hpp"

namespace sparsnn {

inline json sim_report_to_json(const SimReport& rep) {
  json j;
  j["total_cycles"] = rep.total_cycles;
  j["latency_ms"] = rep.latency_ms;
  j["activity_density"] = rep.activity;
  j["energy"] = rep.energy;
  j["edp"] = rep.edp;
  j["ops"] = {{"adds", rep.ops.adds},       {"shifts", rep.ops.shifts},
              {"compares", rep.ops.compares}, {"muls", rep.ops.muls},
              {"mem_accesses", rep.ops.mem_accesses}};
  json layers = json::array();
  for (const LayerSimReport& l : rep.layers) {
    json lj;
    lj["layer"] = l.token;
    lj["cycles"] = l.cycles;
    lj["n_active"] = l.n_active;
    lj["accumulates"] = l.accumulates;
    lj["updates"] = l.updates;
    lj["mem_reads"] = l.mem_reads;
    lj["mem_writes"] = l.mem_writes;
    lj["weight_fetches"] = l.weight_fetches;
    lj["saturated"] = l.saturated;
    lj["out_channel_spikes"] = l.out_channel_spikes;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

// Flat per-(layer, timestep) breakdown. Column order is stable API:
// layer_index,layer,t,cycles,n_active,accumulates,updates,out_spikes
inline void write_sim_report_csv(const SimReport& rep, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path.string());
  f << "layer_index,layer,t,cycles,n_active,accumulates,updates,out_spikes\n";
  for (size_t li = 0; li < rep.layers.size(); ++li) {
    const LayerSimReport& l = rep.layers[li];
    for (size_t t = 0; t < l.cycles_t.size(); ++t) {
      f << li << ',' << l.token << ',' << t << ',' << l.cycles_t[t] << ',' << l.active_t[t] << ','
        << l.accumulates_t[t] << ',' << l.updates_t[t] << ',' << l.out_spikes_t[t] << '\n';
    }
  }
}

}  // namespace sparsnn
