#pragma once

#include <cstdint>

#include "sparsnn/config.hpp"
#include "sparsnn/events.hpp"
#include "sparsnn/trainer.hpp"

namespace sparsnn {

// Synthetic moving-bar classification task: N classes = N sweep directions.
struct DatasetSpec {
  int classes = 4;
  int width = 12;
  int height = 12;
  uint64_t duration_us = 64000;
  double rate = 0.6;          // Poisson events per edge pixel per generator step
  int train_per_class = 40;
  int test_per_class = 20;
  RasterConfig raster{};
  uint64_t seed = 42;

  void validate() const {
    if (classes < 2 || classes > 4) throw config_error("DatasetSpec: classes must be in 2..4");
    if (train_per_class < 1 || test_per_class < 1) throw config_error("DatasetSpec: need samples per class");
    raster.validate();
  }

  Shape input_shape() const {
    int ch = raster.polarity == PolarityMode::TwoChannel ? 2 : 1;
    return {ch, height / raster.downsample, width / raster.downsample};
  }
};

inline json dataset_spec_to_json(const DatasetSpec& d) {
  json j;
  j["classes"] = d.classes;
  j["width"] = d.width;
  j["height"] = d.height;
  j["duration_us"] = d.duration_us;
  j["rate"] = d.rate;
  j["train_per_class"] = d.train_per_class;
  j["test_per_class"] = d.test_per_class;
  j["raster"] = raster_config_to_json(d.raster);
  j["seed"] = d.seed;
  return j;
}

inline DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec d;
  d.classes = j.value("classes", d.classes);
  d.width = j.value("width", d.width);
  d.height = j.value("height", d.height);
  d.duration_us = j.value("duration_us", d.duration_us);
  d.rate = j.value("rate", d.rate);
  d.train_per_class = j.value("train_per_class", d.train_per_class);
  d.test_per_class = j.value("test_per_class", d.test_per_class);
  if (j.contains("raster")) d.raster = raster_config_from_json(j.at("raster"));
  d.seed = j.value("seed", d.seed);
  d.validate();
  return d;
}

inline Sample make_sample(const DatasetSpec& spec, int cls, uint64_t sample_seed) {
  EventStream es = gen_moving_bar(cls, spec.width, spec.height, spec.duration_us, spec.rate, sample_seed);
  return Sample{rasterize(es, spec.raster), cls};
}

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// Pure function of the spec: sample i of class c draws from a seed derived
// from (spec.seed, split, c, i).
inline DatasetPair make_datasets(const DatasetSpec& spec) {
  spec.validate();
  DatasetPair out;
  for (int c = 0; c < spec.classes; ++c) {
    for (int i = 0; i < spec.train_per_class; ++i)
      out.train.push_back(make_sample(spec, c, spec.seed * 1000003ULL + c * 1009ULL + i));
    for (int i = 0; i < spec.test_per_class; ++i)
      out.test.push_back(make_sample(spec, c, spec.seed * 1000003ULL + 500009ULL + c * 1009ULL + i));
  }
  return out;
}

}  // namespace sparsnn
