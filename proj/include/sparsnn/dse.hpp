#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sparsnn/checkpoint_io.hpp"
#include "sparsnn/config.hpp"
#include "sparsnn/dataset.hpp"
#include "sparsnn/report_io.hpp"
#include "sparsnn/trainer.hpp"

namespace sparsnn {

enum class SweepPhase { Surrogate, Neuron };

// Two-phase exploration grid: Phase 1 sweeps surrogate kind x slope with the
// neuron fixed; Phase 2 sweeps (neuron model, beta, theta) with the surrogate
// fixed. Every grid point runs once per seed.
struct SweepSpec {
  std::string name = "sweep";
  SweepPhase phase = SweepPhase::Surrogate;

  std::vector<SurrogateKind> surrogate_kinds{SurrogateKind::FastSigmoid};
  std::vector<double> slopes{5.0};

  std::vector<NeuronType> neuron_types{NeuronType::Lif};
  std::vector<double> betas{0.5};
  std::vector<double> thetas{1.0};

  std::vector<uint64_t> seeds{1};
  TrainConfig base_train;
  HwConfig hw;
  DatasetSpec dataset;
  int sim_samples = 4;  // test inputs averaged for the latency figure
  bool enforce_bounds = false;  // restrict the grid to the validated ranges

  void validate() const {
    if (name.empty()) throw config_error("sweep: empty name");
    if (seeds.empty()) throw config_error("sweep: no seeds");
    if (phase == SweepPhase::Surrogate && (surrogate_kinds.empty() || slopes.empty()))
      throw config_error("sweep: empty surrogate grid");
    if (phase == SweepPhase::Neuron && (neuron_types.empty() || betas.empty() || thetas.empty()))
      throw config_error("sweep: empty neuron grid");
    if (enforce_bounds) {
      for (double s : slopes)
        if (s < 1.0 || s > 48.0) throw config_error("sweep: slope outside [1,48]");
      for (double b : betas)
        if (b < 0.1 || b > 1.0) throw config_error("sweep: beta outside [0.1,1.0]");
      for (double t : thetas)
        if (t < 0.1 || t > 2.0) throw config_error("sweep: theta outside [0.1,2.0]");
    }
    dataset.validate();
    hw.validate();
  }
};

inline json sweep_spec_to_json(const SweepSpec& s) {
  json j;
  j["name"] = s.name;
  j["phase"] = s.phase == SweepPhase::Surrogate ? "surrogate" : "neuron";
  json kinds = json::array();
  for (SurrogateKind k : s.surrogate_kinds) kinds.push_back(surrogate_type_name(k));
  j["surrogate_types"] = kinds;
  j["slopes"] = s.slopes;
  json nt = json::array();
  for (NeuronType t : s.neuron_types) nt.push_back(neuron_type_name(t));
  j["neuron_types"] = nt;
  j["betas"] = s.betas;
  j["thetas"] = s.thetas;
  j["seeds"] = s.seeds;
  j["base_train"] = train_config_to_json(s.base_train);
  j["hw"] = hw_config_to_json(s.hw);
  j["dataset"] = dataset_spec_to_json(s.dataset);
  j["sim_samples"] = s.sim_samples;
  j["enforce_bounds"] = s.enforce_bounds;
  return j;
}

inline SweepSpec sweep_spec_from_json(const json& j) {
  SweepSpec s;
  try {
    s.name = j.value("name", s.name);
    s.phase = j.value("phase", "surrogate") == std::string("neuron") ? SweepPhase::Neuron
                                                                     : SweepPhase::Surrogate;
    if (j.contains("surrogate_types")) {
      s.surrogate_kinds.clear();
      for (const auto& k : j.at("surrogate_types")) s.surrogate_kinds.push_back(surrogate_kind_from(k));
    }
    if (j.contains("slopes")) s.slopes = j.at("slopes").get<std::vector<double>>();
    if (j.contains("neuron_types")) {
      s.neuron_types.clear();
      for (const auto& t : j.at("neuron_types")) s.neuron_types.push_back(neuron_type_from(t));
    }
    if (j.contains("betas")) s.betas = j.at("betas").get<std::vector<double>>();
    if (j.contains("thetas")) s.thetas = j.at("thetas").get<std::vector<double>>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (j.contains("base_train")) s.base_train = train_config_from_json(j.at("base_train"));
    if (j.contains("hw")) s.hw = hw_config_from_json(j.at("hw"));
    if (j.contains("dataset")) s.dataset = dataset_spec_from_json(j.at("dataset"));
    s.sim_samples = j.value("sim_samples", s.sim_samples);
    s.enforce_bounds = j.value("enforce_bounds", false);
  } catch (const json::exception& e) {
    throw config_error(std::string("sweep spec: ") + e.what());
  }
  s.validate();
  return s;
}

inline std::vector<TrainConfig> enumerate_trials(const SweepSpec& spec) {
  spec.validate();
  std::vector<TrainConfig> trials;
  auto with_seed = [&](TrainConfig c, uint64_t seed) {
    c.seed = seed;
    if (c.surrogate.kind == SurrogateKind::Sso) c.surrogate.rng_seed = seed;
    return c;
  };
  if (spec.phase == SweepPhase::Surrogate) {
    for (SurrogateKind k : spec.surrogate_kinds)
      for (double slope : spec.slopes)
        for (uint64_t seed : spec.seeds) {
          TrainConfig c = spec.base_train;
          c.input = spec.dataset.input_shape();
          c.timesteps = spec.dataset.raster.timesteps;
          c.surrogate = make_surrogate(k, slope, c.threshold, seed);
          trials.push_back(with_seed(c, seed));
        }
  } else {
    for (NeuronType nt : spec.neuron_types)
      for (double beta : spec.betas)
        for (double theta : spec.thetas)
          for (uint64_t seed : spec.seeds) {
            TrainConfig c = spec.base_train;
            c.input = spec.dataset.input_shape();
            c.timesteps = spec.dataset.raster.timesteps;
            c.neuron_type = nt;
            c.beta = beta;
            c.threshold = theta;
            c.surrogate = make_surrogate(c.surrogate.kind, surrogate_slope(c.surrogate), theta, seed);
            trials.push_back(with_seed(c, seed));
          }
  }
  return trials;
}

inline std::string trial_hash(const TrainConfig& train, const HwConfig& hw, const DatasetSpec& data) {
  json j;
  j["train"] = train_config_to_json(train);
  j["hw"] = hw_config_to_json(hw);
  j["dataset"] = dataset_spec_to_json(data);
  return config_hash(j);
}

struct TrialArtifacts {
  TrialRecord record;
  Checkpoint checkpoint;
  SimReport sim;
  int epochs_run = 0;
  bool diverged = false;
};

// One complete pipeline pass: train, quantize, simulate held-out inputs.
inline TrialArtifacts run_trial(const TrainConfig& train_cfg, const HwConfig& hw,
                                const DatasetSpec& data_spec, const DatasetPair& data,
                                int sim_samples) {
  TrialArtifacts out;
  out.record.config_hash = trial_hash(train_cfg, hw, data_spec);

  TrainResult tr = train(train_cfg, data.train, data.test);
  out.checkpoint = tr.checkpoint;
  out.epochs_run = tr.checkpoint.epochs_run;
  out.diverged = tr.diverged;

  EvalResult ev = evaluate(tr.checkpoint, data.test, /*use_quantized=*/true);
  out.record.accuracy = ev.accuracy;

  SpikingNet net = net_from_checkpoint(tr.checkpoint);
  int n = std::min<int>(sim_samples, static_cast<int>(data.test.size()));
  if (n < 1) throw config_error("run_trial: no simulation samples");
  double cycles = 0.0, latency = 0.0, activity = 0.0, energy = 0.0;
  for (int i = 0; i < n; ++i) {
    SimReport rep = simulate_network(net.topo, data.test[i].x, tr.checkpoint.qweights, net.neuron, hw);
    cycles += static_cast<double>(rep.total_cycles);
    latency += rep.latency_ms;
    activity += rep.activity;
    energy += rep.energy;
    if (i == 0) out.sim = std::move(rep);
  }
  out.record.total_cycles = static_cast<long>(cycles / n);
  out.record.latency_ms = latency / n;
  out.record.activity = activity / n;
  out.record.energy = energy / n;
  out.record.edp = out.record.energy * out.record.latency_ms;
  out.record.status = tr.diverged ? "diverged" : "ok";
  return out;
}

namespace detail {

inline std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline json trial_record_to_json(const TrialRecord& r, const TrainConfig& train, const HwConfig& hw,
                                 const DatasetSpec& data, int epochs_run, bool diverged) {
  json j;
  j["config_hash"] = r.config_hash;
  j["train_config"] = train_config_to_json(train);
  j["hw_config"] = hw_config_to_json(hw);
  j["dataset"] = dataset_spec_to_json(data);
  j["accuracy"] = r.accuracy;
  j["total_cycles"] = r.total_cycles;
  j["latency_ms"] = r.latency_ms;
  j["activity_density"] = r.activity;
  j["energy"] = r.energy;
  j["edp"] = r.edp;
  j["status"] = r.status;
  j["epochs_run"] = epochs_run;
  j["diverged"] = diverged;
  // the only wall-clock field in the results tree
  j["created_at"] = iso_timestamp();
  return j;
}

inline TrialRecord trial_record_from_json(const json& j) {
  TrialRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.accuracy = j.value("accuracy", 0.0);
  r.total_cycles = j.value("total_cycles", 0L);
  r.latency_ms = j.value("latency_ms", 0.0);
  r.activity = j.value("activity_density", 0.0);
  r.energy = j.value("energy", 0.0);
  r.edp = j.value("edp", 0.0);
  r.status = j.value("status", "ok");
  return r;
}

}  // namespace detail

inline void write_index_csv(const std::vector<std::pair<TrainConfig, TrialRecord>>& rows,
                            const std::filesystem::path& path) {
  std::vector<std::pair<TrainConfig, TrialRecord>> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second.config_hash < b.second.config_hash;
  });
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path.string());
  f << "config_hash,status,surrogate_type,slope,neuron_type,beta,threshold,seed,"
       "accuracy,latency_ms,activity_density,energy,edp,total_cycles\n";
  for (const auto& [cfg, r] : sorted) {
    f << r.config_hash << ',' << r.status << ',' << surrogate_type_name(cfg.surrogate.kind) << ','
      << surrogate_slope(cfg.surrogate) << ',' << neuron_type_name(cfg.neuron_type) << ',' << cfg.beta
      << ',' << cfg.threshold << ',' << cfg.seed << ',' << r.accuracy << ',' << r.latency_ms << ','
      << r.activity << ',' << r.energy << ',' << r.edp << ',' << r.total_cycles << '\n';
  }
}

// Runs every grid point x seed. Completed trials (trial.json present) are
// skipped, so a sweep is resumable and trial outputs are reproducible in
// isolation. Results are independent of worker scheduling: each trial owns
// its directory and the index is rebuilt sorted at the end.
inline std::vector<TrialRecord> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_root,
                                          int jobs = 1, bool verbose = false) {
  spec.validate();
  if (jobs < 1) throw config_error("run_sweep: jobs must be >= 1");
  std::filesystem::path sweep_dir = out_root / spec.name;
  std::filesystem::create_directories(sweep_dir);

  DatasetPair data = make_datasets(spec.dataset);
  std::vector<TrainConfig> trials = enumerate_trials(spec);

  std::vector<std::pair<TrainConfig, TrialRecord>> results(trials.size());
  std::atomic<size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= trials.size()) return;
      const TrainConfig& cfg = trials[i];
      std::string hash = trial_hash(cfg, spec.hw, spec.dataset);
      std::filesystem::path dir = sweep_dir / hash;
      std::filesystem::path trial_file = dir / "trial.json";

      TrialRecord rec;
      if (std::filesystem::exists(trial_file)) {
        rec = detail::trial_record_from_json(load_json_file(trial_file));
        if (verbose) {
          std::lock_guard<std::mutex> lk(log_mutex);
          std::fprintf(stderr, "[sweep] %s cached\n", hash.c_str());
        }
      } else {
        std::filesystem::create_directories(dir);
        try {
          TrialArtifacts art = run_trial(cfg, spec.hw, spec.dataset, data, spec.sim_samples);
          rec = art.record;
          save_checkpoint(art.checkpoint, dir / "checkpoint.json");
          write_sim_report_csv(art.sim, dir / "report.csv");
          write_json_file(detail::trial_record_to_json(rec, cfg, spec.hw, spec.dataset, art.epochs_run,
                                                       art.diverged),
                          trial_file);
        } catch (const std::exception& e) {
          rec.config_hash = hash;
          rec.status = std::string("failed: ") + e.what();
          write_json_file(detail::trial_record_to_json(rec, cfg, spec.hw, spec.dataset, 0, false),
                          trial_file);
        }
        if (verbose) {
          std::lock_guard<std::mutex> lk(log_mutex);
          std::fprintf(stderr, "[sweep] %s %s acc=%.3f lat=%.3fms\n", hash.c_str(), rec.status.c_str(),
                       rec.accuracy, rec.latency_ms);
        }
      }
      results[i] = {cfg, rec};
    }
  };

  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  write_index_csv(results, sweep_dir / "index.csv");
  std::vector<TrialRecord> records;
  for (auto& [cfg, rec] : results) records.push_back(rec);
  return records;
}

enum class RankPolicy { BestAccuracy, BestLatency, Pareto };

inline std::vector<TrialRecord> rank_trials(std::vector<TrialRecord> records, RankPolicy policy) {
  if (records.empty()) throw config_error("rank_trials: no records");
  switch (policy) {
    case RankPolicy::BestAccuracy:
      std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
        return a.config_hash < b.config_hash;
      });
      return records;
    case RankPolicy::BestLatency:
      std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.config_hash < b.config_hash;
      });
      return records;
    case RankPolicy::Pareto:
      return pareto_front(records);
  }
  throw config_error("rank_trials: unknown policy");
}

// Loads every */trial.json under a sweep directory.
inline std::vector<TrialRecord> load_trial_records(const std::filesystem::path& sweep_dir) {
  std::vector<TrialRecord> records;
  if (!std::filesystem::is_directory(sweep_dir)) return records;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(sweep_dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "trial.json"))
      files.push_back(entry.path() / "trial.json");
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) records.push_back(detail::trial_record_from_json(load_json_file(f)));
  return records;
}

}  // namespace sparsnn
