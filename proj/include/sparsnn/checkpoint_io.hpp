#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sparsnn/config.hpp"
#include "sparsnn/trainer.hpp"

namespace sparsnn {

// Checkpoint on disk: JSON manifest plus one little-endian binary blob with
// float32 weights followed by int8 (4-bit valued) quantized weights, offsets
// recorded per layer in the manifest.
inline void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& manifest_file) {
  std::filesystem::path blob_file = manifest_file;
  blob_file.replace_extension(".bin");

  std::ofstream blob(blob_file, std::ios::binary);
  if (!blob) throw config_error("cannot write " + blob_file.string());

  json layers = json::array();
  uint64_t offset = 0;
  for (size_t l = 0; l < cp.weights.layers.size(); ++l) {
    const Vec& w = cp.weights.layers[l];
    std::vector<float> f32(w.begin(), w.end());
    blob.write(reinterpret_cast<const char*>(f32.data()), f32.size() * sizeof(float));
    json lj;
    lj["float_offset"] = offset;
    lj["count"] = w.size();
    offset += f32.size() * sizeof(float);
    layers.push_back(lj);
  }
  for (size_t l = 0; l < cp.qweights.layers.size(); ++l) {
    const QuantizedLayer& q = cp.qweights.layers[l];
    blob.write(reinterpret_cast<const char*>(q.q.data()), q.q.size());
    layers[l]["quant_offset"] = offset;
    layers[l]["scale"] = q.scale;
    offset += q.q.size();
  }

  json m;
  m["format"] = "sparsnn-checkpoint-v1";
  m["grammar"] = cp.grammar;
  m["input"] = {cp.input.c, cp.input.h, cp.input.w};
  m["timesteps"] = cp.timesteps;
  m["neuron_type"] = neuron_type_name(cp.neuron_type);
  m["beta"] = cp.beta;
  m["threshold"] = cp.threshold;
  m["reset"] = cp.reset == ResetMode::Subtract ? "subtract" : "zero";
  m["blob"] = blob_file.filename().string();
  m["layers"] = layers;
  m["metadata"] = {{"final_accuracy", cp.final_accuracy},
                   {"epochs_run", cp.epochs_run},
                   {"seed", cp.seed},
                   {"diverged", cp.diverged}};
  write_json_file(m, manifest_file);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& manifest_file) {
  json m = load_json_file(manifest_file);
  if (m.value("format", "") != std::string("sparsnn-checkpoint-v1"))
    throw config_error("not a checkpoint manifest: " + manifest_file.string());

  Checkpoint cp;
  cp.grammar = m.at("grammar").get<std::string>();
  auto in = m.at("input");
  cp.input = {in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
  cp.timesteps = m.at("timesteps").get<int>();
  cp.neuron_type = neuron_type_from(m.at("neuron_type").get<std::string>());
  cp.beta = m.at("beta").get<double>();
  cp.threshold = m.at("threshold").get<double>();
  cp.reset = m.value("reset", "subtract") == std::string("zero") ? ResetMode::Zero : ResetMode::Subtract;
  const json& md = m.at("metadata");
  cp.final_accuracy = md.value("final_accuracy", 0.0);
  cp.epochs_run = md.value("epochs_run", 0);
  cp.seed = md.value("seed", uint64_t{0});
  cp.diverged = md.value("diverged", false);

  std::filesystem::path blob_file = manifest_file.parent_path() / m.at("blob").get<std::string>();
  std::ifstream blob(blob_file, std::ios::binary);
  if (!blob) throw config_error("cannot open blob " + blob_file.string());

  for (const json& lj : m.at("layers")) {
    size_t count = lj.at("count").get<size_t>();
    std::vector<float> f32(count);
    blob.seekg(lj.at("float_offset").get<uint64_t>());
    blob.read(reinterpret_cast<char*>(f32.data()), count * sizeof(float));
    cp.weights.layers.emplace_back(f32.begin(), f32.end());

    QuantizedLayer q;
    q.q.resize(count);
    q.scale = lj.at("scale").get<double>();
    blob.seekg(lj.at("quant_offset").get<uint64_t>());
    blob.read(reinterpret_cast<char*>(q.q.data()), count);
    cp.qweights.layers.push_back(std::move(q));
  }
  if (!blob) throw config_error("truncated blob " + blob_file.string());
  return cp;
}

}  // namespace sparsnn
