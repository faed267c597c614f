#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "rbflow/config.hpp"
#include "rbflow/evaluate.hpp"
#include "rbflow/harness.hpp"
#include "rbflow/plotdata.hpp"

using namespace rbflow;

TEST_CASE("config parsing") {
  const ConfigMap cfg = ConfigMap::parse(
      "# a comment\n"
      "seed = 7\n"
      "task = \"regression\"   # trailing comment\n"
      "train.learning_rate = 0.05\n"
      "train.early_stop = true\n"
      "network.hidden_units = [8, 4]\n"
      "\n");
  CHECK(cfg.get_int("seed", 0) == 7);
  CHECK(cfg.get_string("task", "") == "regression");
  CHECK(cfg.get_double("train.learning_rate", 0.0) == 0.05);
  CHECK(cfg.get_bool("train.early_stop", false));
  CHECK(cfg.get_list("network.hidden_units", {}) == std::vector<double>{8.0, 4.0});
  CHECK(cfg.get_double("absent", 9.5) == 9.5);
}

TEST_CASE("config parse errors") {
  CHECK_THROWS_AS(ConfigMap::parse("novalue\n"), ParseError);
  CHECK_THROWS_AS(ConfigMap::parse("k = \n"), ParseError);
  CHECK_THROWS_AS(ConfigMap::parse("k = [1, 2\n"), ParseError);
  CHECK_THROWS_AS(ConfigMap::parse("k = \"open\n"), ParseError);
  CHECK_THROWS_AS(ConfigMap::parse("k = 1\nk = 2\n"), ParseError);
  CHECK_THROWS_AS(ConfigMap::parse("bad key = 1\n"), ParseError);
  const ConfigMap cfg = ConfigMap::parse("k = 1.5\n");
  CHECK_THROWS_AS(cfg.get_string("k", ""), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("k", 0), ConfigError);
}

TEST_CASE("config hash tracks content, not formatting") {
  const ConfigMap a = ConfigMap::parse("x = 1\ny = 2\n");
  const ConfigMap b = ConfigMap::parse("y = 2   # comment\nx = 1\n");
  const ConfigMap c = ConfigMap::parse("x = 1\ny = 3\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("app config defaults and unknown-key rejection") {
  const AppConfig app = load_app_config(ConfigMap::parse(""));
  CHECK(app.seed == 42);
  CHECK(app.task == Task::Regression);
  CHECK(app.training.learning_rate == 0.01);
  CHECK(app.training.num_epochs == 100);
  CHECK(app.ga.population_size == 100);
  CHECK(app.ga.mutation_rate == 0.1);
  CHECK(app.ga.num_generations == 100);
  CHECK(app.features.lags == 12);
  CHECK(app.thresholds.low == 0.3);
  CHECK(app.thresholds.high == 0.7);

  CHECK_THROWS_AS(load_app_config(ConfigMap::parse("tran.lr = 1\n")), ConfigError);
}

TEST_CASE("seed overrides: flag beats environment beats file") {
  ::setenv("RBF_SEED", "900", 1);
  const AppConfig env_wins = load_app_config(ConfigMap::parse("seed = 7\n"));
  CHECK(env_wins.seed == 900);
  const AppConfig flag_wins = load_app_config(ConfigMap::parse("seed = 7\n"), 1234);
  CHECK(flag_wins.seed == 1234);
  ::unsetenv("RBF_SEED");
  const AppConfig file_wins = load_app_config(ConfigMap::parse("seed = 7\n"));
  CHECK(file_wins.seed == 7);
  // the hash follows the effective seed
  CHECK(env_wins.config_hash != file_wins.config_hash);

  ::setenv("RBF_SEED", "junk", 1);
  CHECK_THROWS_AS(load_app_config(ConfigMap::parse("")), ConfigError);
  ::unsetenv("RBF_SEED");
}

TEST_CASE("the shipped default config file loads cleanly") {
  const AppConfig app = load_app_config_file(std::string(RBFLOW_SOURCE_DIR) +
                                             "/configs/default.cfg");
  CHECK(app.seed == 42);
  CHECK(app.synth.interval_minutes == 5.0);
  CHECK(app.ga.population_size == 100);
  CHECK(app.training.batch_mode == BatchMode::PerSample);
  CHECK(app.clean_policy.outlier_action == OutlierAction::Winsorize);
}

TEST_CASE("loss history CSV emission") {
  LossHistory h;
  for (int i = 0; i < 100; ++i) h.train_loss.push_back(1.0 / (1.0 + i));
  const std::string csv = loss_history_csv(h);
  CHECK(csv.rfind("epoch,train_loss\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);  // header + 100 rows
  CHECK(loss_history_csv(h) == csv);                       // re-emission identical
  const LossHistory back = parse_loss_history_csv(csv);
  CHECK(back.train_loss == h.train_loss);
  CHECK_THROWS_AS(loss_history_csv(LossHistory{}), ValueError);

  h.val_loss.assign(100, 0.5);
  const std::string with_val = loss_history_csv(h);
  CHECK(with_val.rfind("epoch,train_loss,val_loss\n", 0) == 0);
  CHECK(parse_loss_history_csv(with_val).val_loss == h.val_loss);
}

TEST_CASE("fitness history CSV emission") {
  FitnessHistory h;
  for (int i = 0; i < 25; ++i) {
    h.best.push_back(2.0 / (1.0 + i));
    h.mean.push_back(3.0 / (1.0 + i));
  }
  const std::string csv = fitness_history_csv(h);
  CHECK(csv.rfind("generation,best_fitness,mean_fitness\n", 0) == 0);
  const FitnessHistory back = parse_fitness_history_csv(csv);
  CHECK(back.best == h.best);
  CHECK(back.mean == h.mean);
  CHECK_THROWS_AS(fitness_history_csv(FitnessHistory{}), ValueError);
}

TEST_CASE("comparison plot data keeps the fixture shape") {
  const std::string path = std::string(RBFLOW_SOURCE_DIR) + "/data/baseline_mae.csv";
  const std::string original = read_file(path);
  const std::string emitted = comparison_plot_csv(parse_comparison_csv(original));
  CHECK(emitted == original);  // 10 rows x 4 series, byte-stable
  CHECK_THROWS_AS(comparison_plot_csv(ComparisonTable{}), ValueError);
}

namespace {

TrafficObservation obs_row(double ts, double flow, double density) {
  TrafficObservation o;
  o.timestamp = ts;
  o.sensor_id = "S1";
  o.flow = flow;
  o.vehicle_count = flow / 12.0;
  o.speed = 50.0;
  o.density = density;
  o.temperature = 20.0;
  o.humidity = 50.0;
  o.precipitation = 0.0;
  o.wind_speed = 10.0;
  return o;
}

}  // namespace

TEST_CASE("supervised sample windows align with the next observation") {
  std::vector<TrafficObservation> obs;
  for (int i = 0; i < 10; ++i) obs.push_back(obs_row(i * 300.0, 10.0 * i, 25.0));
  FeatureSpec features;
  features.lags = 2;
  features.flow_scale_lo = 0.0;
  features.flow_scale_hi = 90.0;
  std::vector<double> times;
  const SampleSet samples = build_supervised_samples(obs, features, Task::Regression, {}, {},
                                                     &times);
  REQUIRE(samples.size() == 10 - 2 - 1 - 1 + 1);  // n - window = 7
  // first sample sees flows 0,10,20 and predicts flow 30
  CHECK(samples[0].features[0] == Catch::Approx(0.0));
  CHECK(samples[0].features[1] == Catch::Approx(10.0 / 90.0));
  CHECK(samples[0].features[2] == Catch::Approx(20.0 / 90.0));
  CHECK(samples[0].target[0] == Catch::Approx(30.0 / 90.0));
  CHECK(times[0] == obs[3].timestamp);
  CHECK(samples.back().target[0] == Catch::Approx(1.0));
}

TEST_CASE("evaluate on a memorizing model") {
  SECTION("regression: exact predictions give MAE 0 and expose the baseline") {
    // a constant network evaluated on constant targets memorizes them
    RbfNetwork net;
    net.input_dim = 1;
    net.output_weights = Matrix(1, 1, 0.0);
    net.output_biases = {0.5};
    SampleSet test;
    for (int i = 0; i < 5; ++i) test.push_back({{0.1 * i}, {0.5}});
    NormStats stats;
    stats.flow_lo = 0.0;
    stats.flow_hi = 1000.0;
    const EvaluationReport r = evaluate(net, test, Task::Regression, stats, 0.25);
    CHECK(*r.mae_flow == 0.0);
    CHECK(*r.baseline_mae_flow == Catch::Approx(250.0));
    CHECK(r.sample_count == 5);
  }
  SECTION("classification: argmax agreement gives perfect metrics") {
    RbfNetwork net;
    net.input_dim = 1;
    net.output_weights = Matrix(3, 1, 0.0);
    net.output_biases = {0.0, 2.0, 0.0};  // always predicts class 1
    net.output_activation = Activation::Softmax;
    SampleSet test;
    for (int i = 0; i < 4; ++i) test.push_back({{0.1 * i}, {0.0, 1.0, 0.0}});
    NormStats stats;
    const EvaluationReport r = evaluate(net, test, Task::CongestionClassification, stats);
    CHECK(r.classification->accuracy == 1.0);
    CHECK(r.classification->f1 == 1.0);
  }
  SECTION("empty test set is rejected") {
    RbfNetwork net;
    net.input_dim = 1;
    net.output_weights = Matrix(1, 1, 0.0);
    net.output_biases = {0.0};
    NormStats stats;
    CHECK_THROWS_AS(evaluate(net, SampleSet{}, Task::Regression, stats), ValueError);
  }
}

TEST_CASE("evaluation report JSON is deterministic and carries provenance") {
  EvaluationReport r;
  r.task = Task::Regression;
  r.mae_flow = 52.5;
  r.baseline_mae_flow = 99.25;
  r.sample_count = 10;
  r.model_id = "abc123";
  r.dataset_provenance = {"csv", "test.csv", 0};
  r.seed = 7;
  r.config_hash = "deadbeef";
  const std::string a = report_to_json(r).dump(2);
  const std::string b = report_to_json(r).dump(2);
  CHECK(a == b);
  CHECK(a.find("mae_veh_h") != std::string::npos);
  CHECK(a.find("deadbeef") != std::string::npos);
  CHECK(a.find("test.csv") != std::string::npos);

  // f1 identity on emitted classification reports
  EvaluationReport c;
  c.task = Task::CongestionClassification;
  c.classification = classification_metrics({0, 1, 2, 2, 1}, {0, 1, 2, 1, 1});
  const auto& m = *c.classification;
  if (m.precision + m.recall > 0.0) {
    CHECK(std::fabs(m.f1 - 2.0 * m.precision * m.recall / (m.precision + m.recall)) < 1e-12);
  }
}
