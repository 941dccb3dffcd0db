#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "sparsnn/metrics.hpp"

namespace sparsnn {

// Self-contained accuracy-vs-latency scatter with the Pareto front
// highlighted. Fixed 800x600 viewBox; plot area 80..760 x 40..540 with
// linear axes padded 5% beyond the data range.
inline void emit_pareto_svg(const std::vector<TrialRecord>& records,
                            const std::vector<TrialRecord>& front,
                            const std::filesystem::path& path) {
  if (records.empty()) throw config_error("emit_pareto_svg: no records");

  double lat_min = records[0].latency_ms, lat_max = records[0].latency_ms;
  double acc_min = records[0].accuracy, acc_max = records[0].accuracy;
  for (const TrialRecord& r : records) {
    lat_min = std::min(lat_min, r.latency_ms);
    lat_max = std::max(lat_max, r.latency_ms);
    acc_min = std::min(acc_min, r.accuracy);
    acc_max = std::max(acc_max, r.accuracy);
  }
  double lat_pad = std::max((lat_max - lat_min) * 0.05, 1e-9);
  double acc_pad = std::max((acc_max - acc_min) * 0.05, 1e-3);
  lat_min -= lat_pad; lat_max += lat_pad;
  acc_min -= acc_pad; acc_max += acc_pad;

  auto px = [&](double lat) { return 80.0 + (lat - lat_min) / (lat_max - lat_min) * 680.0; };
  auto py = [&](double acc) { return 540.0 - (acc - acc_min) / (acc_max - acc_min) * 500.0; };

  std::set<std::string> front_hashes;
  for (const TrialRecord& r : front) front_hashes.insert(r.config_hash);

  std::ofstream f(path);
  if (!f) throw config_error("emit_pareto_svg: cannot write " + path.string());
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\">\n"
    << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
    << "<line x1=\"80\" y1=\"540\" x2=\"760\" y2=\"540\" stroke=\"black\"/>\n"
    << "<line x1=\"80\" y1=\"40\" x2=\"80\" y2=\"540\" stroke=\"black\"/>\n"
    << "<text x=\"420\" y=\"580\" text-anchor=\"middle\" font-size=\"16\">latency [ms]</text>\n"
    << "<text x=\"24\" y=\"290\" text-anchor=\"middle\" font-size=\"16\" "
       "transform=\"rotate(-90 24 290)\">accuracy</text>\n";

  // front polyline, latency-ascending
  std::vector<TrialRecord> fsorted = front;
  std::sort(fsorted.begin(), fsorted.end(),
            [](const TrialRecord& a, const TrialRecord& b) { return a.latency_ms < b.latency_ms; });
  if (fsorted.size() > 1) {
    f << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (const TrialRecord& r : fsorted) f << px(r.latency_ms) << ',' << py(r.accuracy) << ' ';
    f << "\"/>\n";
  }

  for (const TrialRecord& r : records) {
    bool on_front = front_hashes.count(r.config_hash) > 0;
    f << "<circle cx=\"" << px(r.latency_ms) << "\" cy=\"" << py(r.accuracy) << "\" r=\""
      << (on_front ? 5 : 3) << "\" fill=\"" << (on_front ? "#d62728" : "#1f77b4") << "\"/>\n";
  }
  f << "</svg>\n";
}

}  // namespace sparsnn
