#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sparsnn/metrics.hpp"

using namespace sparsnn;

namespace {

// O(n^2) domination oracle: r is on the front iff nothing dominates it.
std::vector<TrialRecord> pareto_oracle(const std::vector<TrialRecord>& records) {
  std::vector<TrialRecord> front;
  for (const TrialRecord& r : records) {
    bool dominated = false;
    for (const TrialRecord& o : records) {
      bool geq = o.accuracy >= r.accuracy && o.latency_ms <= r.latency_ms;
      bool strict = o.accuracy > r.accuracy || o.latency_ms < r.latency_ms;
      if (geq && strict) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(r);
  }
  std::sort(front.begin(), front.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.config_hash < b.config_hash; });
  return front;
}

bool same_records(const std::vector<TrialRecord>& a, const std::vector<TrialRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].config_hash != b[i].config_hash) return false;
  return true;
}

}  // namespace

TEST_CASE("activity density fixture") {
  // T=2, N=4, 2 spikes -> 0.25
  SpikeTrain st(2, {4, 1, 1});
  st.set(0, 1);
  st.set(1, 3);
  CHECK(activity_density({st}, 2, 4) == 0.25);
  CHECK(activity_density({st}, 2, 8) == 0.125);
  CHECK_THROWS_AS(activity_density({st}, 0, 4), config_error);
}

TEST_CASE("activity density sums across layers") {
  SpikeTrain a(2, {2, 1, 1});
  a.set(0, 0);
  SpikeTrain b(2, {2, 1, 1});
  b.set(1, 0);
  b.set(1, 1);
  CHECK(activity_density({a, b}, 2, 4) == Catch::Approx(3.0 / 8.0));
}

TEST_CASE("energy model is linear in op counts") {
  OpCounts zero;
  CHECK(estimate_energy(zero) == 0.0);
  OpCounts ops{10, 5, 3, 2, 4};
  double e = estimate_energy(ops);
  CHECK(e == Catch::Approx(10 * 1.0 + 5 * 1.0 + 3 * 1.0 + 2 * 3.0 + 4 * 5.0));
  OpCounts doubled{20, 10, 6, 4, 8};
  CHECK(estimate_energy(doubled) == Catch::Approx(2.0 * e));
  EnergyModel custom{2.0, 1.0, 1.0, 4.0, 10.0};
  CHECK(estimate_energy(ops, custom) == Catch::Approx(10 * 2.0 + 5 + 3 + 2 * 4.0 + 4 * 10.0));
}

TEST_CASE("pareto front equals the domination oracle on random records") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> acc(0.0, 1.0);
  std::uniform_real_distribution<double> lat(1.0, 100.0);
  std::uniform_int_distribution<int> quant(1, 20);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<TrialRecord> records(200);
    for (size_t i = 0; i < records.size(); ++i) {
      records[i].config_hash = "cfg" + std::to_string(trial) + "_" + std::to_string(i);
      // quantize values so exact ties happen, exercising the tie rules
      records[i].accuracy = quant(rng) / 20.0;
      records[i].latency_ms = quant(rng) * 5.0;
    }
    CHECK(same_records(pareto_front(records), pareto_oracle(records)));
  }
}

TEST_CASE("pareto front edge cases") {
  TrialRecord a{"a", 0.9, 100, 10.0};
  TrialRecord b{"b", 0.8, 50, 5.0};
  TrialRecord c{"c", 0.7, 80, 8.0};  // dominated by b
  auto front = pareto_front({a, b, c});
  REQUIRE(front.size() == 2);
  CHECK(front[0].config_hash == "a");
  CHECK(front[1].config_hash == "b");

  // exact ties on both axes are all kept
  TrialRecord t1{"t1", 0.9, 100, 10.0};
  TrialRecord t2{"t2", 0.9, 100, 10.0};
  CHECK(pareto_front({t1, t2}).size() == 2);

  // single record is trivially on the front
  CHECK(pareto_front({a}).size() == 1);
  CHECK_THROWS_AS(pareto_front({}), config_error);
}
