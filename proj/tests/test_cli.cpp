#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "sparsnn/checkpoint_io.hpp"
#include "sparsnn/config.hpp"

using namespace sparsnn;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(SPARSNN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

fs::path work_dir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "sparsnn_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// Tiny configs shared by the tests below; written once.
fs::path train_config() {
  fs::path p = work_dir() / "train.json";
  if (!fs::exists(p)) {
    json j;
    j["grammar"] = "FC8-FC4";
    j["epochs"] = 2;
    j["batch_size"] = 4;
    j["seed"] = 1;
    write_json_file(j, p);
  }
  return p;
}

fs::path dataset_config() {
  fs::path p = work_dir() / "dataset.json";
  if (!fs::exists(p)) {
    json j;
    j["classes"] = 4;
    j["width"] = 8;
    j["height"] = 8;
    j["duration_us"] = 16000;
    j["rate"] = 0.5;
    j["train_per_class"] = 2;
    j["test_per_class"] = 1;
    j["raster"] = {{"timesteps", 4}, {"downsample", 1}, {"polarity", "two_channel"}};
    j["seed"] = 42;
    write_json_file(j, p);
  }
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli rejects bad invocations with exit code 2") {
  CHECK(run_cli("") == 2);                                      // missing subcommand
  CHECK(run_cli("train") == 2);                                 // missing --config
  CHECK(run_cli("train --config /nonexistent/cfg.json") == 2);  // unreadable config
  CHECK(run_cli("frobnicate") == 2);                            // unknown subcommand
}

TEST_CASE("cli train writes a checkpoint and a training log") {
  fs::path out = work_dir() / "train_out";
  int rc = run_cli("train --config " + train_config().string() + " --data " +
                   dataset_config().string() + " --out " + out.string());
  CHECK(rc == 0);
  CHECK(fs::exists(out / "checkpoint.json"));
  CHECK(fs::exists(out / "checkpoint.bin"));
  REQUIRE(fs::exists(out / "training_log.csv"));

  std::ifstream log(out / "training_log.csv");
  std::string header;
  std::getline(log, header);
  CHECK(header == "epoch,lr,train_loss,val_accuracy,val_density");
  int rows = 0;
  for (std::string line; std::getline(log, line);) ++rows;
  CHECK(rows >= 1);
  CHECK(rows <= 2);

  Checkpoint cp = load_checkpoint(out / "checkpoint.json");
  CHECK(cp.grammar == "FC8-FC4");
  CHECK(cp.input == Shape{2, 8, 8});
  CHECK(cp.timesteps == 4);
  CHECK(cp.seed == 1);
}

TEST_CASE("cli --seed overrides only the training seed") {
  fs::path out = work_dir() / "seed_out";
  int rc = run_cli("train --config " + train_config().string() + " --data " +
                   dataset_config().string() + " --out " + out.string() + " --seed 7");
  CHECK(rc == 0);
  Checkpoint cp = load_checkpoint(out / "checkpoint.json");
  CHECK(cp.seed == 7);
  CHECK(cp.grammar == "FC8-FC4");
}

TEST_CASE("cli simulate on a zero-event stream charges only the overhead") {
  // needs a trained checkpoint; reuse the train_out artifacts
  fs::path cp_dir = work_dir() / "sim_cp";
  REQUIRE(run_cli("train --config " + train_config().string() + " --data " +
                  dataset_config().string() + " --out " + cp_dir.string()) == 0);

  fs::path events = work_dir() / "empty.csv";
  std::ofstream(events).close();
  write_json_file(json{{"width", 8}, {"height", 8}, {"duration_us", 16000}, {"label", 0}},
                  manifest_path(events));

  fs::path out1 = work_dir() / "sim_out1";
  int rc = run_cli("simulate --checkpoint " + (cp_dir / "checkpoint.json").string() + " --events " +
                   events.string() + " --out " + out1.string());
  CHECK(rc == 0);

  json rep = load_json_file(out1 / "report.json");
  // 2 weighted layers x 4 timesteps x default per-(layer,t) overhead of 10
  CHECK(rep.at("total_cycles").get<long>() == 2 * 4 * 10);
  CHECK(rep.at("energy").get<double>() == 0.0);
  CHECK(rep.at("activity_density").get<double>() == 0.0);

  auto lines = [&](const fs::path& p) {
    std::ifstream f(p);
    int n = 0;
    for (std::string line; std::getline(f, line);) ++n;
    return n;
  };
  CHECK(lines(out1 / "report.csv") == 1 + 2 * 4);  // header + layers x timesteps

  // reports are byte-identical across runs
  fs::path out2 = work_dir() / "sim_out2";
  REQUIRE(run_cli("simulate --checkpoint " + (cp_dir / "checkpoint.json").string() + " --events " +
                  events.string() + " --out " + out2.string()) == 0);
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  CHECK(slurp(out1 / "report.csv") == slurp(out2 / "report.csv"));
}

TEST_CASE("cli simulate rejects a shape mismatch with exit code 4") {
  fs::path cp_dir = work_dir() / "sim_cp";  // trained on 8x8 above
  REQUIRE(fs::exists(cp_dir / "checkpoint.json"));
  fs::path events = work_dir() / "wrong.csv";
  std::ofstream(events).close();
  write_json_file(json{{"width", 16}, {"height", 16}, {"duration_us", 1000}, {"label", 0}},
                  work_dir() / "wrong.json");
  CHECK(run_cli("simulate --checkpoint " + (cp_dir / "checkpoint.json").string() + " --events " +
                events.string() + " --out " + (work_dir() / "sim_bad").string()) == 4);
}

TEST_CASE("cli report on an empty results directory exits with 5") {
  fs::path empty = work_dir() / "no_results";
  fs::create_directories(empty);
  CHECK(run_cli("report --results " + empty.string() + " --out " + (work_dir() / "rep").string()) == 5);
}

TEST_CASE("cli sweep and report produce a summary with a pareto flag") {
  fs::path sweep_cfg = work_dir() / "sweep.json";
  json j;
  j["name"] = "cli_sweep";
  j["phase"] = "surrogate";
  j["surrogate_types"] = {"fast_sigmoid"};
  j["slopes"] = {5.0};
  j["seeds"] = {1};
  j["sim_samples"] = 1;
  j["base_train"] = load_json_file(train_config());
  j["dataset"] = load_json_file(dataset_config());
  write_json_file(j, sweep_cfg);

  fs::path results = work_dir() / "results";
  CHECK(run_cli("sweep --config " + sweep_cfg.string() + " --out " + results.string()) == 0);
  CHECK(fs::exists(results / "cli_sweep" / "index.csv"));

  fs::path rep = work_dir() / "rep_out";
  CHECK(run_cli("report --results " + (results / "cli_sweep").string() + " --out " + rep.string()) == 0);
  REQUIRE(fs::exists(rep / "summary.csv"));
  CHECK(fs::exists(rep / "pareto.svg"));
  std::ifstream f(rep / "summary.csv");
  std::string header, row;
  std::getline(f, header);
  CHECK(header == "config_hash,accuracy,latency_ms,activity_density,energy,edp,total_cycles,on_front");
  REQUIRE(std::getline(f, row));
  CHECK(row.back() == '1');  // a single trial is trivially on the front
}
