#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sparsnn/network.hpp"

using namespace sparsnn;

namespace {

SpikeTrain random_train(int T, Shape shape, double density, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  SpikeTrain st(T, shape);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < shape.size(); ++i)
      if (coin(rng)) st.set(t, i);
  return st;
}

Vec random_vec(size_t n, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Independent oracle: brute-force sliding window with explicit zero padding.
Vec conv_oracle(const Vec& in, const Vec& w, const LayerSpec& l) {
  const int ci = l.in_shape.c, hi = l.in_shape.h, wi = l.in_shape.w;
  const int co = l.out_channels, ho = l.out_shape.h, wo = l.out_shape.w;
  Vec padded(static_cast<size_t>(ci) * (hi + 2 * l.padding) * (wi + 2 * l.padding), 0.0);
  const int ph = hi + 2 * l.padding, pw = wi + 2 * l.padding;
  for (int c = 0; c < ci; ++c)
    for (int y = 0; y < hi; ++y)
      for (int x = 0; x < wi; ++x)
        padded[(static_cast<size_t>(c) * ph + y + l.padding) * pw + x + l.padding] =
            in[(static_cast<size_t>(c) * hi + y) * wi + x];
  Vec out(static_cast<size_t>(co) * ho * wo, 0.0);
  for (int oc = 0; oc < co; ++oc)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        for (int ic = 0; ic < ci; ++ic)
          for (int ky = 0; ky < l.kernel; ++ky)
            for (int kx = 0; kx < l.kernel; ++kx)
              acc += padded[(static_cast<size_t>(ic) * ph + oy * l.stride + ky) * pw + ox * l.stride + kx] *
                     w[((static_cast<size_t>(oc) * ci + ic) * l.kernel + ky) * l.kernel + kx];
        out[(static_cast<size_t>(oc) * ho + oy) * wo + ox] = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("dense conv matches the padded sliding-window oracle") {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.out_channels = 4;
  l.kernel = 3;
  l.in_shape = {2, 6, 6};
  l.out_shape = derive_out_shape(l);

  Vec in = random_vec(l.in_shape.size(), 5);
  Vec w = random_vec(weight_count(l), 6);
  Vec got = dense_synaptic_forward(in, w, l);
  Vec want = conv_oracle(in, w, l);
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) CHECK_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-12));
}

TEST_CASE("fc forward is a plain matrix product") {
  LayerSpec l;
  l.kind = LayerKind::FullyConnected;
  l.out_features = 3;
  l.in_shape = {4, 1, 1};
  l.out_shape = derive_out_shape(l);
  Vec w{1, 0, 0, 0,  0, 1, 1, 0,  0.5, 0.5, 0.5, 0.5};
  Vec out = dense_synaptic_forward({1, 2, 3, 4}, w, l);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 5.0);
  CHECK(out[2] == 5.0);
}

TEST_CASE("spiking maxpool is a binary OR over windows") {
  SpikeTrain in(1, {1, 4, 4});
  in.set(0, 0);   // window (0,0)
  in.set(0, 5);   // window (0,0) again -> still one output spike
  in.set(0, 10);  // window (1,1)
  SpikeTrain out = maxpool_spikes(in, 2);
  CHECK(out.shape() == Shape{1, 2, 2});
  CHECK(out.at(0, 0) == 1);
  CHECK(out.at(0, 1) == 0);
  CHECK(out.at(0, 2) == 0);
  CHECK(out.at(0, 3) == 1);
  CHECK(out.total_spikes() == 2);
}

TEST_CASE("maxpool argmax records the winning input") {
  LayerSpec l;
  l.kind = LayerKind::MaxPool;
  l.window = 2;
  l.in_shape = {1, 2, 2};
  l.out_shape = derive_out_shape(l);
  std::vector<int> argmax;
  Vec out = maxpool_forward({0.1, 0.9, 0.3, 0.2}, l, &argmax);
  CHECK(out[0] == 0.9);
  CHECK(argmax[0] == 1);
}

TEST_CASE("forward_network outputs are strictly binary and deterministic") {
  Topology topo = Topology::parse("4C3-MP2-FC4", {2, 8, 8}, 6);
  NetWeights w;
  int seed = 0;
  for (const LayerSpec& l : topo.layers)
    if (has_weights(l)) w.layers.push_back(random_vec(weight_count(l), 40 + seed++, -0.5, 0.5));
  NeuronConfig n;
  n.lif = LifParams{0.5, 0.6, ResetMode::Subtract};

  SpikeTrain in = random_train(6, {2, 8, 8}, 0.3, 77);
  ForwardResult a = forward_network(topo, in, w, n);
  ForwardResult b = forward_network(topo, in, w, n);
  REQUIRE(a.layer_spikes.size() == topo.layers.size());
  for (size_t li = 0; li < a.layer_spikes.size(); ++li) {
    CHECK(a.layer_spikes[li] == b.layer_spikes[li]);
    CHECK(a.layer_spikes[li].shape() == topo.layers[li].out_shape);
    // SpikeTrain holds {0,1} by construction; verify via the count cache
    long manual = 0;
    for (int t = 0; t < 6; ++t)
      for (int i = 0; i < topo.layers[li].out_shape.size(); ++i) {
        uint8_t v = a.layer_spikes[li].at(t, i);
        CHECK((v == 0 || v == 1));
        manual += v;
      }
    CHECK(manual == a.layer_spikes[li].total_spikes());
  }
}

TEST_CASE("forward_network validates shapes") {
  Topology topo = Topology::parse("FC2", {4, 1, 1}, 2);
  NetWeights w;
  w.layers.push_back(Vec(8, 0.1));
  NeuronConfig n;
  SpikeTrain wrong(2, {3, 1, 1});
  CHECK_THROWS_AS(forward_network(topo, wrong, w, n), shape_error);
  NetWeights empty;
  SpikeTrain ok(2, {4, 1, 1});
  CHECK_THROWS_AS(forward_network(topo, ok, empty, n), shape_error);
}
