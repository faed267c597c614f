#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rbflow/model_io.hpp"
#include "rbflow/network.hpp"
#include "support/oracles.hpp"

using namespace rbflow;

TEST_CASE("gaussian_rbf matches its closed form") {
  CHECK(gaussian_rbf({0.3, -1.2}, {0.3, -1.2}, 1.0) == 1.0);
  CHECK(gaussian_rbf({std::sqrt(2.0)}, {0.0}, 1.0) == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
  // high-precision scalar oracle: exp(-((1)^2 + (2)^2) / 2) = exp(-2.5)
  CHECK(gaussian_rbf({1.0, 2.0}, {0.0, 0.0}, 1.0) ==
        Catch::Approx(0.082084998623898800).epsilon(1e-12));
}

TEST_CASE("gaussian_rbf rejects bad arguments") {
  CHECK_THROWS_AS(gaussian_rbf({1.0, 2.0}, {1.0}, 1.0), DimensionError);
  CHECK_THROWS_AS(gaussian_rbf({1.0}, {1.0}, 0.0), ValueError);
  CHECK_THROWS_AS(gaussian_rbf({1.0}, {1.0}, -2.0), ValueError);
}

TEST_CASE("gaussian_rbf range and translation invariance") {
  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    Vector x = {uni(rng), uni(rng), uni(rng)};
    Vector c = {uni(rng), uni(rng), uni(rng)};
    const double sigma = 0.25 + std::fabs(uni(rng));
    const double v = gaussian_rbf(x, c, sigma);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    const double shift = uni(rng);
    Vector xs = x;
    Vector cs = c;
    for (double& e : xs) e += shift;
    for (double& e : cs) e += shift;
    CHECK(gaussian_rbf(xs, cs, sigma) == Catch::Approx(v).margin(1e-12));
  }
}

TEST_CASE("output activations") {
  const Vector z = {1.5, -2.0};
  CHECK(output_activation_apply(z, Activation::Linear) == z);
  CHECK(output_activation_apply({0.0}, Activation::Sigmoid)[0] == 0.5);
  const Vector s = output_activation_apply({0.7, 0.7, 0.7}, Activation::Softmax);
  for (double v : s) CHECK(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(output_activation_apply({}, Activation::Linear), ValueError);
}

TEST_CASE("softmax components are positive and sum to 1") {
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> uni(-40.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    Vector z(1 + static_cast<std::size_t>(i % 6));
    for (double& v : z) v = uni(rng);
    const Vector y = output_activation_apply(z, Activation::Softmax);
    double sum = 0.0;
    for (double v : y) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

namespace {

RbfLayer single_unit_layer(const Vector& center, double width, double weight, double bias) {
  RbfLayer layer;
  layer.units = {{center, width}};
  layer.weights = Matrix(1, 1);
  layer.weights(0, 0) = weight;
  layer.biases = {bias};
  return layer;
}

}  // namespace

TEST_CASE("rbf_layer_forward on hand-checked layers") {
  const Vector input = {0.4, 0.6};
  SECTION("unit centered on the input") {
    const RbfLayer layer = single_unit_layer(input, 1.0, 2.0, 0.0);
    const LayerSignals s = rbf_layer_forward(input, layer);
    CHECK(s.rbf_activations == Vector{1.0});
    CHECK(s.affine_output == Vector{2.0});
  }
  SECTION("zero weights pass only the bias") {
    RbfLayer layer;
    layer.units = {{{0.0, 0.0}, 1.0}, {{1.0, 1.0}, 0.5}};
    layer.weights = Matrix(2, 2, 0.0);
    layer.biases = {3.5, -1.0};
    const LayerSignals s = rbf_layer_forward(input, layer);
    CHECK(s.affine_output == Vector{3.5, -1.0});
  }
  SECTION("dimension mismatch") {
    const RbfLayer layer = single_unit_layer({0.0}, 1.0, 1.0, 0.0);
    CHECK_THROWS_AS(rbf_layer_forward(input, layer), DimensionError);
  }
}

TEST_CASE("rbf_layer_forward matches a per-unit oracle") {
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RbfLayer layer;
  for (int j = 0; j < 3; ++j) {
    layer.units.push_back({{uni(rng), uni(rng)}, 0.5 + std::fabs(uni(rng))});
  }
  layer.weights = Matrix(2, 3);
  for (double& v : layer.weights.data()) v = uni(rng);
  layer.biases = {uni(rng), uni(rng)};
  const Vector input = {uni(rng), uni(rng)};

  const LayerSignals s = rbf_layer_forward(input, layer);
  for (std::size_t j = 0; j < 3; ++j) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      d2 += (input[i] - layer.units[j].center[i]) * (input[i] - layer.units[j].center[i]);
    }
    const double phi = std::exp(-d2 / (2.0 * layer.units[j].width * layer.units[j].width));
    CHECK(s.rbf_activations[j] == Catch::Approx(phi).margin(1e-12));
  }
  for (std::size_t r = 0; r < 2; ++r) {
    double z = layer.biases[r];
    for (std::size_t j = 0; j < 3; ++j) z += layer.weights(r, j) * s.rbf_activations[j];
    CHECK(s.affine_output[r] == Catch::Approx(z).margin(1e-12));
  }
}

namespace {

RbfNetwork identity_network(std::size_t dim) {
  RbfNetwork net;
  net.input_dim = dim;
  net.output_weights = Matrix(dim, dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) net.output_weights(i, i) = 1.0;
  net.output_biases.assign(dim, 0.0);
  return net;
}

}  // namespace

TEST_CASE("network_forward hand cases") {
  SECTION("identity network") {
    const RbfNetwork net = identity_network(3);
    const Vector x = {0.1, -2.0, 5.5};
    CHECK(network_forward(x, net).output == x);
  }
  SECTION("one unit centered on the input") {
    RbfNetwork net;
    net.input_dim = 2;
    net.hidden_layers = {single_unit_layer({0.4, 0.6}, 1.0, 1.0, 0.0)};
    net.output_weights = Matrix(1, 1);
    net.output_weights(0, 0) = 3.0;
    net.output_biases = {1.0};
    // phi = 1, layer affine = 1, output = 3*1 + 1
    CHECK(network_forward({0.4, 0.6}, net).output == Vector{4.0});
  }
  SECTION("dimension mismatch") {
    const RbfNetwork net = identity_network(3);
    CHECK_THROWS_AS(network_forward({1.0}, net), DimensionError);
  }
}

TEST_CASE("network_forward equals the naive oracle over random networks") {
  Rng rng = make_rng(99);
  for (int i = 0; i < 100; ++i) {
    const oracle::RandomNetCase c = oracle::random_case(rng);
    const ForwardTrace trace = network_forward(c.input, c.net);
    const Vector expect = oracle::naive_forward(c.net, c.input);
    REQUIRE(trace.output.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k) {
      CHECK(trace.output[k] == Catch::Approx(expect[k]).margin(1e-12));
    }
  }
}

TEST_CASE("network_forward is pure and traces carry the right shapes") {
  Rng rng = make_rng(51);
  for (int i = 0; i < 40; ++i) {
    const oracle::RandomNetCase c = oracle::random_case(rng);
    const ForwardTrace t1 = network_forward(c.input, c.net);
    const ForwardTrace t2 = network_forward(c.input, c.net);
    CHECK(t1.output == t2.output);
    CHECK(t1.output_pre_activation == t2.output_pre_activation);
    REQUIRE(t1.rbf_activations.size() == c.net.hidden_layers.size());
    REQUIRE(t1.affine_outputs.size() == c.net.hidden_layers.size());
    for (std::size_t li = 0; li < c.net.hidden_layers.size(); ++li) {
      CHECK(t1.rbf_activations[li].size() == c.net.hidden_layers[li].unit_count());
      CHECK(t1.affine_outputs[li].size() == c.net.hidden_layers[li].output_dim());
    }
    CHECK(t1.output.size() == c.net.output_dim());
  }
}

TEST_CASE("zero-hidden-layer linear network is exactly affine") {
  Rng rng = make_rng(77);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  NetworkSpec spec;
  spec.input_dim = 3;
  spec.output_dim = 2;
  RbfNetwork net = init_network(spec, rng, RandomUniformCenters{});
  for (double& v : net.output_biases) v = uni(rng);

  for (int i = 0; i < 50; ++i) {
    Vector x1 = {uni(rng), uni(rng), uni(rng)};
    Vector x2 = {uni(rng), uni(rng), uni(rng)};
    const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Vector mix(3);
    for (std::size_t k = 0; k < 3; ++k) mix[k] = alpha * x1[k] + (1.0 - alpha) * x2[k];
    const Vector y1 = network_forward(x1, net).output;
    const Vector y2 = network_forward(x2, net).output;
    const Vector ym = network_forward(mix, net).output;
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(ym[k] == Catch::Approx(alpha * y1[k] + (1.0 - alpha) * y2[k]).margin(1e-10));
    }
  }
}

TEST_CASE("init_network contracts") {
  NetworkSpec spec;
  spec.input_dim = 2;
  spec.hidden_unit_counts = {4, 3};
  spec.hidden_output_dims = {3, 2};
  spec.default_width = 0.7;
  spec.output_dim = 1;

  SECTION("same seed gives identical networks") {
    Rng a = make_rng(123);
    Rng b = make_rng(123);
    CHECK(init_network(spec, a, RandomUniformCenters{}) ==
          init_network(spec, b, RandomUniformCenters{}));
  }
  SECTION("different seeds differ") {
    Rng a = make_rng(123);
    Rng b = make_rng(124);
    CHECK_FALSE(init_network(spec, a, RandomUniformCenters{}) ==
                init_network(spec, b, RandomUniformCenters{}));
  }
  SECTION("one-point dataset pins every first-layer center") {
    const std::vector<Vector> points = {{0.25, 0.75}};
    Rng rng = make_rng(9);
    NetworkSpec one = spec;
    one.hidden_unit_counts = {4};
    one.hidden_output_dims = {3};
    const RbfNetwork net = init_network(one, rng, SampleFromData{&points});
    for (const RbfUnit& u : net.hidden_layers[0].units) CHECK(u.center == points[0]);
    for (const RbfUnit& u : net.hidden_layers[0].units) CHECK(u.width == one.default_width);
  }
  SECTION("weight scale 0 zeroes all weights and biases stay zero") {
    Rng rng = make_rng(9);
    const RbfNetwork net = init_network(spec, rng, RandomUniformCenters{}, 0.0);
    for (const RbfLayer& layer : net.hidden_layers) {
      for (double v : layer.weights.data()) CHECK(v == 0.0);
      for (double v : layer.biases) CHECK(v == 0.0);
    }
    for (double v : net.output_weights.data()) CHECK(v == 0.0);
  }
  SECTION("invalid spec") {
    NetworkSpec bad = spec;
    bad.default_width = 0.0;
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(init_network(bad, rng, RandomUniformCenters{}), ValueError);
    bad = spec;
    bad.hidden_output_dims = {3};
    CHECK_THROWS_AS(init_network(bad, rng, RandomUniformCenters{}), ValueError);
  }
  SECTION("empty dataset rejected for sampled centers") {
    const std::vector<Vector> none;
    Rng rng = make_rng(1);
    CHECK_THROWS_AS(init_network(spec, rng, SampleFromData{&none}), ValueError);
  }
}

TEST_CASE("model JSON round trip is exact") {
  Rng rng = make_rng(2024);
  for (int i = 0; i < 10; ++i) {
    const oracle::RandomNetCase c = oracle::random_case(rng);
    NormStats stats;
    stats.feature_min = {0.0, 1.5};
    stats.feature_max = {1.0, 1.5};
    stats.degenerate = {0, 1};
    stats.flow_lo = 12.5;
    stats.flow_hi = 1400.25;
    const ModelFile model{c.spec, c.net, stats, 77};
    const ModelFile back = model_from_json(model_to_json(model));
    CHECK(back.network == model.network);
    CHECK(back.spec == model.spec);
    CHECK(back.norm_stats == model.norm_stats);
    CHECK(back.seed == model.seed);
    // serialized doubles survive a text round trip bit-exactly
    const Json j1 = model_to_json(model);
    const Json j2 = model_to_json(model_from_json(Json::parse(j1.dump())));
    CHECK(j1.dump() == j2.dump());
  }
}

TEST_CASE("network validation catches broken invariants") {
  RbfNetwork net = identity_network(2);
  net.hidden_layers = {single_unit_layer({0.0, 0.0}, 1.0, 1.0, 0.0)};
  // output weights still expect dim-2 input, but the layer emits dim 1
  CHECK_THROWS_AS(validate(net), DimensionError);

  RbfNetwork bad_width = identity_network(1);
  bad_width.hidden_layers = {single_unit_layer({0.0}, -1.0, 1.0, 0.0)};
  CHECK_THROWS_AS(validate(bad_width), ValueError);
}
