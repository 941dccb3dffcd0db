// sparsnn command-line tool.
//
// Subcommands: train, eval, simulate, sweep, report.
// Exit codes are stable API:
//   0 success, 2 config/parse error, 3 training divergence,
//   4 shape mismatch, 5 empty input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "sparsnn/checkpoint_io.hpp"
#include "sparsnn/config.hpp"
#include "sparsnn/dataset.hpp"
#include "sparsnn/dse.hpp"
#include "sparsnn/report_io.hpp"
#include "sparsnn/svg.hpp"

namespace fs = std::filesystem;
using namespace sparsnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitShape = 4;
constexpr int kExitEmpty = 5;

DatasetSpec load_dataset_spec(const std::string& path) {
  if (path.empty()) return DatasetSpec{};
  return dataset_spec_from_json(load_json_file(path));
}

void write_training_log(const TrainResult& tr, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write " + path.string());
  f << "epoch,lr,train_loss,val_accuracy,val_density\n";
  for (const EpochLog& e : tr.log)
    f << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.val_accuracy << ','
      << e.val_density << '\n';
}

int cmd_train(const std::string& config_path, const std::string& data_path, const std::string& out_dir,
              std::optional<uint64_t> seed, bool verbose) {
  TrainConfig cfg = train_config_from_json(load_json_file(config_path));
  if (seed) cfg.seed = *seed;
  DatasetSpec dspec = load_dataset_spec(data_path);
  cfg.input = dspec.input_shape();
  cfg.timesteps = dspec.raster.timesteps;
  cfg.validate();

  DatasetPair data = make_datasets(dspec);
  TrainResult tr = train(cfg, data.train, data.test);

  fs::create_directories(out_dir);
  save_checkpoint(tr.checkpoint, fs::path(out_dir) / "checkpoint.json");
  write_training_log(tr, fs::path(out_dir) / "training_log.csv");
  if (verbose)
    std::fprintf(stderr, "trained %d epochs, val accuracy %.3f%s\n", tr.checkpoint.epochs_run,
                 tr.checkpoint.final_accuracy, tr.diverged ? " (diverged)" : "");
  if (tr.diverged) {
    std::fprintf(stderr, "error: training diverged (non-finite loss); partial checkpoint retained\n");
    return kExitDiverged;
  }
  std::printf("accuracy %.4f epochs %d\n", tr.checkpoint.final_accuracy, tr.checkpoint.epochs_run);
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& out_dir, bool quantized) {
  Checkpoint cp = load_checkpoint(checkpoint_path);
  DatasetSpec dspec = load_dataset_spec(data_path);
  if (!(dspec.input_shape() == cp.input))
    throw shape_error("eval: dataset shape does not match checkpoint input shape");
  DatasetPair data = make_datasets(dspec);
  if (data.test.empty()) {
    std::fprintf(stderr, "error: empty evaluation set\n");
    return kExitEmpty;
  }
  EvalResult ev = evaluate(cp, data.test, quantized);
  json j;
  j["accuracy"] = ev.accuracy;
  j["activity_density"] = ev.activity_density;
  j["quantized"] = quantized;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_json_file(j, fs::path(out_dir) / "eval.json");
  }
  std::printf("accuracy %.4f activity %.4f\n", ev.accuracy, ev.activity_density);
  return kExitOk;
}

int cmd_simulate(const std::string& checkpoint_path, const std::string& events_path,
                 const std::string& hw_path, const std::string& out_dir, bool verbose) {
  Checkpoint cp = load_checkpoint(checkpoint_path);
  HwConfig hw;
  if (!hw_path.empty()) hw = hw_config_from_json(load_json_file(hw_path));

  EventStream es = load_events(events_path);
  RasterConfig rc;
  rc.timesteps = cp.timesteps;
  rc.polarity = cp.input.c == 2 ? PolarityMode::TwoChannel : PolarityMode::Merged;
  SpikeTrain input = rasterize(es, rc);
  if (!(input.shape() == cp.input))
    throw shape_error("simulate: event frame shape does not match checkpoint input shape");

  SpikingNet net = net_from_checkpoint(cp);
  SimReport rep = simulate_network(net.topo, input, cp.qweights, net.neuron, hw);

  fs::create_directories(out_dir);
  write_json_file(sim_report_to_json(rep), fs::path(out_dir) / "report.json");
  write_sim_report_csv(rep, fs::path(out_dir) / "report.csv");
  if (verbose)
    std::fprintf(stderr, "simulated %zu layers over %d timesteps\n", rep.layers.size(), cp.timesteps);
  std::printf("cycles %ld latency_ms %.6f activity %.4f\n", rep.total_cycles, rep.latency_ms,
              rep.activity);
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs, bool verbose) {
  SweepSpec spec = sweep_spec_from_json(load_json_file(config_path));
  std::vector<TrialRecord> records = run_sweep(spec, out_dir, jobs, verbose);
  std::printf("sweep '%s': %zu trials written to %s\n", spec.name.c_str(), records.size(),
              (fs::path(out_dir) / spec.name).string().c_str());
  return kExitOk;
}

int cmd_report(const std::string& results_dir, const std::string& out_dir) {
  std::vector<TrialRecord> records = load_trial_records(results_dir);
  std::vector<TrialRecord> ok;
  for (const TrialRecord& r : records)
    if (r.status == "ok") ok.push_back(r);
  if (ok.empty()) {
    std::fprintf(stderr, "error: no completed trials in %s\n", results_dir.c_str());
    return kExitEmpty;
  }
  std::vector<TrialRecord> front = pareto_front(ok);

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "summary.csv");
  if (!csv) throw config_error("cannot write summary.csv");
  csv << "config_hash,accuracy,latency_ms,activity_density,energy,edp,total_cycles,on_front\n";
  std::set<std::string> on_front;
  for (const TrialRecord& r : front) on_front.insert(r.config_hash);
  for (const TrialRecord& r : ok)
    csv << r.config_hash << ',' << r.accuracy << ',' << r.latency_ms << ',' << r.activity << ','
        << r.energy << ',' << r.edp << ',' << r.total_cycles << ',' << (on_front.count(r.config_hash) ? 1 : 0)
        << '\n';
  emit_pareto_svg(ok, front, fs::path(out_dir) / "pareto.svg");
  std::printf("report: %zu trials, %zu on the Pareto front\n", ok.size(), front.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsnn: train, quantize, and simulate event-driven spiking networks"};
  app.require_subcommand(1);

  std::string config_path, data_path, checkpoint_path, events_path, hw_path, results_dir;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
  int jobs = 1;
  bool verbose = false;
  bool quantized = false;

  auto* train_cmd = app.add_subcommand("train", "Train a network from a JSON config");
  train_cmd->add_option("--config", config_path, "Training config JSON")->required();
  train_cmd->add_option("--data", data_path, "Dataset spec JSON (default: built-in moving-bar task)");
  train_cmd->add_option("--out", out_dir, "Output directory");
  train_cmd->add_option("--seed", seed, "Override config seed");
  train_cmd->add_flag("--verbose", verbose, "Verbose progress on stderr");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint manifest JSON")->required();
  eval_cmd->add_option("--data", data_path, "Dataset spec JSON");
  eval_cmd->add_option("--out", out_dir, "Output directory (optional eval.json)");
  eval_cmd->add_flag("--quantized", quantized, "Evaluate the 4-bit quantized weights");

  auto* sim_cmd = app.add_subcommand("simulate", "Run the cycle-accurate accelerator model");
  sim_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint manifest JSON")->required();
  sim_cmd->add_option("--events", events_path, "Event stream CSV (with JSON sidecar)")->required();
  sim_cmd->add_option("--hw", hw_path, "Hardware config JSON (default: built-in)");
  sim_cmd->add_option("--out", out_dir, "Output directory");
  sim_cmd->add_flag("--verbose", verbose, "Verbose progress on stderr");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a hyperparameter sweep grid");
  sweep_cmd->add_option("--config", config_path, "Sweep spec JSON")->required();
  sweep_cmd->add_option("--out", out_dir, "Results root directory");
  sweep_cmd->add_option("--jobs", jobs, "Worker threads");
  sweep_cmd->add_flag("--verbose", verbose, "Verbose progress on stderr");

  auto* report_cmd = app.add_subcommand("report", "Aggregate sweep results into CSV + Pareto SVG");
  report_cmd->add_option("--results", results_dir, "Sweep results directory (results/<name>)")->required();
  report_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, data_path, out_dir, seed, verbose);
    if (*eval_cmd) return cmd_eval(checkpoint_path, data_path, out_dir, quantized);
    if (*sim_cmd) return cmd_simulate(checkpoint_path, events_path, hw_path, out_dir, verbose);
    if (*sweep_cmd) return cmd_sweep(config_path, out_dir, jobs, verbose);
    if (*report_cmd) return cmd_report(results_dir, out_dir);
  } catch (const shape_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitShape;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDiverged;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitConfig;
}
