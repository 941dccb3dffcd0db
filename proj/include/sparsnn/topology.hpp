#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "sparsnn/errors.hpp"
#include "sparsnn/tensor.hpp"

namespace sparsnn {

enum class LayerKind { Conv, MaxPool, FullyConnected };

// One entry of the layer grammar. Conv layers default to stride 1 and
// padding 1 (the grammar string does not encode either); shapes are derived
// when the topology is assembled.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv;

  // Conv
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int padding = 1;

  // MaxPool
  int window = 0;

  // FullyConnected
  int out_features = 0;

  Shape in_shape{};
  Shape out_shape{};

  bool operator==(const LayerSpec&) const = default;
};

inline Shape derive_out_shape(const LayerSpec& s) {
  const Shape& in = s.in_shape;
  switch (s.kind) {
    case LayerKind::Conv: {
      if (s.kernel < 1 || s.out_channels < 1 || s.stride < 1 || s.padding < 0)
        throw config_error("conv: bad kernel/channels/stride/padding");
      int h = (in.h + 2 * s.padding - s.kernel) / s.stride + 1;
      int w = (in.w + 2 * s.padding - s.kernel) / s.stride + 1;
      if (h < 1 || w < 1) throw config_error("conv: output shape collapses for input " + in.str());
      return {s.out_channels, h, w};
    }
    case LayerKind::MaxPool: {
      if (s.window < 1) throw config_error("maxpool: window < 1");
      if (in.h % s.window != 0 || in.w % s.window != 0)
        throw shape_error("maxpool: spatial dims " + in.str() + " not divisible by window " +
                          std::to_string(s.window));
      return {in.c, in.h / s.window, in.w / s.window};
    }
    case LayerKind::FullyConnected: {
      if (s.out_features < 1) throw config_error("fc: out_features < 1");
      return {s.out_features, 1, 1};
    }
  }
  throw config_error("unknown layer kind");
}

// Ordered layer list plus the timestep count. The compact grammar string
// ("16C3-MP2-32C3-MP2-FC64-FC4") round-trips through parse/render.
struct Topology {
  Shape input{};
  int timesteps = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const Topology&) const = default;

  const Shape& output_shape() const {
    return layers.empty() ? input : layers.back().out_shape;
  }

  std::string grammar() const {
    std::string out;
    for (size_t i = 0; i < layers.size(); ++i) {
      if (i) out += '-';
      const LayerSpec& l = layers[i];
      switch (l.kind) {
        case LayerKind::Conv:
          out += std::to_string(l.out_channels) + "C" + std::to_string(l.kernel);
          break;
        case LayerKind::MaxPool:
          out += "MP" + std::to_string(l.window);
          break;
        case LayerKind::FullyConnected:
          out += "FC" + std::to_string(l.out_features);
          break;
      }
    }
    return out;
  }

  static Topology parse(std::string_view grammar, Shape input, int timesteps) {
    if (timesteps < 1) throw config_error("topology: timesteps < 1");
    Topology t;
    t.input = input;
    t.timesteps = timesteps;

    Shape cur = input;
    size_t pos = 0;
    while (pos < grammar.size()) {
      size_t dash = grammar.find('-', pos);
      std::string_view tok = grammar.substr(pos, dash == std::string_view::npos ? dash : dash - pos);
      pos = dash == std::string_view::npos ? grammar.size() : dash + 1;
      if (tok.empty()) throw parse_error("topology grammar: empty token");

      LayerSpec l;
      auto num = [&](std::string_view s) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
          throw parse_error("topology grammar: bad number in token '" + std::string(tok) + "'");
        return v;
      };

      if (tok.substr(0, 2) == "MP") {
        l.kind = LayerKind::MaxPool;
        l.window = num(tok.substr(2));
      } else if (tok.substr(0, 2) == "FC") {
        l.kind = LayerKind::FullyConnected;
        l.out_features = num(tok.substr(2));
      } else if (size_t c = tok.find('C'); c != std::string_view::npos && c > 0) {
        l.kind = LayerKind::Conv;
        l.out_channels = num(tok.substr(0, c));
        l.kernel = num(tok.substr(c + 1));
      } else {
        throw parse_error("topology grammar: unrecognized token '" + std::string(tok) + "'");
      }

      l.in_shape = cur;
      l.out_shape = derive_out_shape(l);
      cur = l.out_shape;
      t.layers.push_back(l);
    }
    return t;
  }
};

inline int weight_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Conv:
      return l.out_channels * l.in_shape.c * l.kernel * l.kernel;
    case LayerKind::FullyConnected:
      return l.out_features * l.in_shape.size();
    case LayerKind::MaxPool:
      return 0;
  }
  return 0;
}

inline bool has_weights(const LayerSpec& l) { return l.kind != LayerKind::MaxPool; }

}  // namespace sparsnn
