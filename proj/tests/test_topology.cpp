#include <catch2/catch_amalgamated.hpp>

#include "sparsnn/topology.hpp"

using namespace sparsnn;

TEST_CASE("grammar parses the standard conv stack") {
  Topology t = Topology::parse("8C3-MP2-16C3-MP2-FC32-FC4", {2, 12, 12}, 8);
  REQUIRE(t.layers.size() == 6);

  CHECK(t.layers[0].kind == LayerKind::Conv);
  CHECK(t.layers[0].out_channels == 8);
  CHECK(t.layers[0].kernel == 3);
  CHECK(t.layers[0].stride == 1);
  CHECK(t.layers[0].padding == 1);
  CHECK(t.layers[0].out_shape == Shape{8, 12, 12});

  CHECK(t.layers[1].kind == LayerKind::MaxPool);
  CHECK(t.layers[1].out_shape == Shape{8, 6, 6});

  CHECK(t.layers[2].out_shape == Shape{16, 6, 6});
  CHECK(t.layers[3].out_shape == Shape{16, 3, 3});

  CHECK(t.layers[4].kind == LayerKind::FullyConnected);
  CHECK(t.layers[4].out_shape == Shape{32, 1, 1});
  CHECK(t.layers[5].out_shape == Shape{4, 1, 1});
  CHECK(t.output_shape() == Shape{4, 1, 1});
}

TEST_CASE("grammar round-trips through render and parse") {
  const std::string g = "8C3-MP2-16C3-MP2-FC32-FC4";
  Topology t = Topology::parse(g, {2, 12, 12}, 8);
  CHECK(t.grammar() == g);
  CHECK(Topology::parse(t.grammar(), t.input, t.timesteps) == t);

  const std::string g2 = "4C5-FC10";
  Topology t2 = Topology::parse(g2, {1, 8, 8}, 4);
  CHECK(t2.grammar() == g2);
}

TEST_CASE("weight counts follow layer layout") {
  Topology t = Topology::parse("8C3-MP2-16C3-MP2-FC32-FC4", {2, 12, 12}, 8);
  CHECK(weight_count(t.layers[0]) == 8 * 2 * 3 * 3);
  CHECK(weight_count(t.layers[1]) == 0);
  CHECK(weight_count(t.layers[2]) == 16 * 8 * 3 * 3);
  CHECK(weight_count(t.layers[4]) == 32 * 16 * 3 * 3);
  CHECK(weight_count(t.layers[5]) == 4 * 32);
  CHECK_FALSE(has_weights(t.layers[1]));
  CHECK(has_weights(t.layers[0]));
}

TEST_CASE("conv output shape formula") {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.out_channels = 4;
  l.kernel = 5;
  l.stride = 2;
  l.padding = 0;
  l.in_shape = {3, 11, 11};
  CHECK(derive_out_shape(l) == Shape{4, 4, 4});  // (11 - 5)/2 + 1
}

TEST_CASE("pool rejects non-divisible spatial dims") {
  CHECK_THROWS_AS(Topology::parse("MP2", {1, 7, 8}, 1), shape_error);
  CHECK_THROWS_AS(Topology::parse("MP3", {1, 8, 8}, 1), shape_error);
  CHECK_NOTHROW(Topology::parse("MP2", {1, 8, 8}, 1));
}

TEST_CASE("malformed grammar tokens raise parse errors") {
  CHECK_THROWS_AS(Topology::parse("8X3", {1, 8, 8}, 1), parse_error);
  CHECK_THROWS_AS(Topology::parse("FCx", {1, 8, 8}, 1), parse_error);
  CHECK_THROWS_AS(Topology::parse("8C3--FC4", {1, 8, 8}, 1), parse_error);
  CHECK_THROWS_AS(Topology::parse("8C", {1, 8, 8}, 1), parse_error);
}
