// Command-line front end for the deep RBF traffic forecasting toolkit.
// Subcommands mirror the pipeline stages: generate, preprocess, train,
// predict, evaluate, compare, plot. Exit codes: 0 success, 1 domain error,
// 2 usage error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbflow/compare.hpp"
#include "rbflow/harness.hpp"
#include "rbflow/plotdata.hpp"

namespace {

using rbflow::AppConfig;
using rbflow::Json;
using rbflow::Vector;

std::string file_id(const std::string& path) {
  return rbflow::hex64(rbflow::fnv1a(rbflow::read_file(path)));
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

AppConfig load_config(const CommonArgs& args) {
  return rbflow::load_app_config_file(args.config_path, args.seed);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
}

int cmd_generate(const CommonArgs& common, const std::string& out_path) {
  const AppConfig cfg = load_config(common);
  const rbflow::Dataset ds = rbflow::synth_generate(cfg.synth, cfg.seed);
  rbflow::save_csv(ds, out_path);
  rbflow::write_manifest(out_path + ".manifest.json", "generate", cfg, {common.config_path},
                         {out_path});
  std::cout << "generated " << ds.observations.size() << " rows -> " << out_path << "\n";
  return 0;
}

int cmd_preprocess(const CommonArgs& common, const std::string& in_path,
                   const std::string& out_train, const std::string& out_test,
                   std::string report_path) {
  const AppConfig cfg = load_config(common);
  const rbflow::LoadResult loaded = rbflow::load_csv(in_path);
  const rbflow::CleanResult cleaned = rbflow::clean(loaded.dataset, cfg.clean_policy);
  const auto [train_ds, test_ds] = rbflow::split(cleaned.dataset, cfg.train_ratio,
                                                 1.0 - cfg.train_ratio, cfg.split_mode, cfg.seed);
  rbflow::save_csv(train_ds, out_train);
  rbflow::save_csv(test_ds, out_test);

  if (report_path.empty()) report_path = out_train + ".clean_report.json";
  Json report;
  report["rows_in"] = loaded.dataset.observations.size();
  report["rows_out"] = cleaned.dataset.observations.size();
  report["missing_dropped"] = cleaned.report.missing_dropped;
  report["densities_derived"] = cleaned.report.densities_derived;
  report["outliers_dropped"] = cleaned.report.outliers_dropped;
  report["values_winsorized"] = cleaned.report.values_winsorized;
  report["passes"] = cleaned.report.passes;
  report["train_rows"] = train_ds.observations.size();
  report["test_rows"] = test_ds.observations.size();
  rbflow::atomic_write(report_path, report.dump(2) + "\n");

  rbflow::write_manifest(out_train + ".manifest.json", "preprocess", cfg,
                         {common.config_path, in_path}, {out_train, out_test, report_path});
  std::cout << "preprocess: " << loaded.dataset.observations.size() << " rows -> "
            << train_ds.observations.size() << " train / " << test_ds.observations.size()
            << " test\n";
  return 0;
}

struct PreparedData {
  rbflow::SampleSet samples;
  std::vector<double> target_times;
  rbflow::Provenance provenance;
};

PreparedData prepare_samples(const AppConfig& cfg, const rbflow::FeatureSpec& features,
                             const std::string& csv_path, const rbflow::NormStats& stats) {
  PreparedData out;
  const rbflow::LoadResult loaded = rbflow::load_csv(csv_path);
  out.provenance = loaded.dataset.provenance;
  out.samples = rbflow::build_supervised_samples(loaded.dataset.observations, features, cfg.task,
                                                 cfg.profile, cfg.thresholds, &out.target_times);
  if (out.samples.empty()) {
    throw rbflow::ValueError(csv_path + ": not enough observations for a lags=" +
                             std::to_string(features.lags) + " window");
  }
  for (rbflow::Sample& s : out.samples) s.features = rbflow::apply_norm(s.features, stats);
  return out;
}

int cmd_train(const CommonArgs& common, const std::string& train_path, const std::string& mode_str,
              const std::string& out_path, std::string loss_history_path,
              std::string fitness_history_path) {
  const AppConfig cfg = load_config(common);
  const rbflow::TrainMode mode = rbflow::train_mode_from_string(mode_str);

  const rbflow::LoadResult loaded = rbflow::load_csv(train_path);
  rbflow::FeatureSpec features = cfg.features;
  rbflow::fit_flow_scale(loaded.dataset.observations, features);

  rbflow::SampleSet samples = rbflow::build_supervised_samples(
      loaded.dataset.observations, features, cfg.task, cfg.profile, cfg.thresholds);
  if (samples.empty()) {
    throw rbflow::ValueError(train_path + ": not enough observations for a lags=" +
                             std::to_string(features.lags) + " window");
  }
  rbflow::NormStats stats;
  stats.flow_lo = features.flow_scale_lo;
  stats.flow_hi = features.flow_scale_hi;
  rbflow::SampleSet no_test;
  rbflow::normalize_features(samples, no_test, stats);

  const rbflow::NetworkSpec spec = rbflow::make_network_spec(cfg, samples.front().features.size());
  rbflow::Rng rng = rbflow::make_rng(cfg.seed);
  std::vector<Vector> feature_rows;
  feature_rows.reserve(samples.size());
  for (const rbflow::Sample& s : samples) feature_rows.push_back(s.features);
  const rbflow::CenterStrategy strategy =
      cfg.center_strategy == "sample_from_data"
          ? rbflow::CenterStrategy(rbflow::SampleFromData{&feature_rows})
          : rbflow::CenterStrategy(rbflow::RandomUniformCenters{0.0, 1.0});
  rbflow::RbfNetwork net = rbflow::init_network(spec, rng, strategy);

  rbflow::LossHistory loss_history;
  rbflow::FitnessHistory fitness_history;
  if (mode == rbflow::TrainMode::Ga || mode == rbflow::TrainMode::Hybrid) {
    const rbflow::EvolveResult evolved = rbflow::evolve(
        spec, rbflow::extract_geometry(net), samples, cfg.ga, cfg.training.loss_kind);
    net = evolved.best_network;
    fitness_history = evolved.history;
  }
  if (mode == rbflow::TrainMode::Backprop || mode == rbflow::TrainMode::Hybrid) {
    const rbflow::TrainResult trained = rbflow::train(net, samples, cfg.training);
    net = trained.network;
    loss_history = trained.history;
  }

  rbflow::save_model({spec, net, stats, cfg.seed}, out_path);
  std::vector<std::string> outputs = {out_path};
  if (!loss_history.train_loss.empty()) {
    if (loss_history_path.empty()) loss_history_path = out_path + ".loss_history.csv";
    rbflow::atomic_write(loss_history_path, rbflow::loss_history_csv(loss_history));
    outputs.push_back(loss_history_path);
  }
  if (!fitness_history.best.empty()) {
    if (fitness_history_path.empty()) fitness_history_path = out_path + ".fitness_history.csv";
    rbflow::atomic_write(fitness_history_path, rbflow::fitness_history_csv(fitness_history));
    outputs.push_back(fitness_history_path);
  }
  rbflow::write_manifest(out_path + ".manifest.json", "train", cfg,
                         {common.config_path, train_path}, outputs);
  std::cout << "trained (" << mode_str << ") on " << samples.size() << " samples -> " << out_path
            << "\n";
  return 0;
}

int cmd_predict(const CommonArgs& common, const std::string& model_path,
                const std::string& data_path, const std::string& out_path) {
  const AppConfig cfg = load_config(common);
  const rbflow::ModelFile model = rbflow::load_model(model_path);
  if (!model.norm_stats) {
    throw rbflow::ValueError(model_path + ": model carries no norm_stats, cannot build features");
  }
  rbflow::FeatureSpec features = cfg.features;
  features.flow_scale_lo = model.norm_stats->flow_lo;
  features.flow_scale_hi = model.norm_stats->flow_hi;
  const PreparedData data = prepare_samples(cfg, features, data_path, *model.norm_stats);

  std::string csv;
  if (cfg.task == rbflow::Task::Regression) {
    csv = "index,timestamp,predicted_flow_veh_h,actual_flow_veh_h\n";
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const rbflow::ForwardTrace trace =
          rbflow::network_forward(data.samples[i].features, model.network);
      csv += std::to_string(i) + ',' + rbflow::format_iso8601(data.target_times[i]) + ',' +
             rbflow::format_double(rbflow::denormalize_flow(trace.output[0], features)) + ',' +
             rbflow::format_double(rbflow::denormalize_flow(data.samples[i].target[0], features)) +
             '\n';
    }
  } else {
    csv = "index,timestamp,predicted_band,actual_band\n";
    const auto band_name = [](const Vector& v) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
      }
      return rbflow::to_string(static_cast<rbflow::CongestionBand>(best));
    };
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const rbflow::ForwardTrace trace =
          rbflow::network_forward(data.samples[i].features, model.network);
      csv += std::to_string(i) + ',' + rbflow::format_iso8601(data.target_times[i]) + ',' +
             band_name(trace.output) + ',' + band_name(data.samples[i].target) + '\n';
    }
  }
  rbflow::atomic_write(out_path, csv);
  rbflow::write_manifest(out_path + ".manifest.json", "predict", cfg,
                         {common.config_path, model_path, data_path}, {out_path});
  std::cout << "predicted " << data.samples.size() << " rows -> " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& model_path,
                 const std::string& data_path, const std::string& train_path,
                 const std::string& out_path, const std::string& out_md_path) {
  const AppConfig cfg = load_config(common);
  const rbflow::ModelFile model = rbflow::load_model(model_path);
  if (!model.norm_stats) {
    throw rbflow::ValueError(model_path + ": model carries no norm_stats, cannot build features");
  }
  rbflow::FeatureSpec features = cfg.features;
  features.flow_scale_lo = model.norm_stats->flow_lo;
  features.flow_scale_hi = model.norm_stats->flow_hi;
  const PreparedData test = prepare_samples(cfg, features, data_path, *model.norm_stats);

  std::optional<double> baseline;
  if (!train_path.empty() && cfg.task == rbflow::Task::Regression) {
    const PreparedData train = prepare_samples(cfg, features, train_path, *model.norm_stats);
    baseline = rbflow::constant_mean_prediction(train.samples);
  }

  rbflow::EvaluationReport report =
      rbflow::evaluate(model.network, test.samples, cfg.task, *model.norm_stats, baseline);
  report.model_id = file_id(model_path);
  report.dataset_provenance = test.provenance;
  report.seed = cfg.seed;
  report.config_hash = cfg.config_hash;
  rbflow::atomic_write(out_path, rbflow::report_to_json(report).dump(2) + "\n");
  std::vector<std::string> outputs = {out_path};
  if (!out_md_path.empty()) {
    rbflow::atomic_write(out_md_path, rbflow::report_to_markdown(report));
    outputs.push_back(out_md_path);
  }
  rbflow::write_manifest(out_path + ".manifest.json", "evaluate", cfg,
                         {common.config_path, model_path, data_path}, outputs);
  std::cout << "evaluated " << test.samples.size() << " samples -> " << out_path << "\n";
  return 0;
}

int cmd_compare(const std::string& fixture_path, const std::string& meta_path,
                const std::vector<std::string>& report_paths,
                const std::vector<std::string>& labels, const std::string& out_csv,
                const std::string& out_md, const std::string& config_path) {
  const rbflow::ComparisonTable table =
      rbflow::parse_comparison_csv(rbflow::read_file(fixture_path));
  if (!out_csv.empty()) rbflow::atomic_write(out_csv, rbflow::render_comparison_csv(table));

  std::vector<std::string> notes;
  if (!meta_path.empty()) {
    Json meta;
    try {
      meta = Json::parse(rbflow::read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
      throw rbflow::ParseError(meta_path + ": " + e.what());
    }
    const std::string method = meta.at("summary_method").get<std::string>();
    const double reported = meta.at("summary_mean").get<double>();
    const auto it = std::find(table.methods.begin(), table.methods.end(), method);
    if (it == table.methods.end()) {
      throw rbflow::ValueError(meta_path + ": method '" + method + "' not in fixture");
    }
    const double recomputed =
        rbflow::column_means(table)[static_cast<std::size_t>(it - table.methods.begin())];
    if (std::fabs(recomputed - reported) > 0.005) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "recomputed mean for '%s' is %.2f, but the summary average shipped with "
                    "this fixture says %.2f; the fixture rows are preserved as published and "
                    "neither value was adjusted",
                    method.c_str(), recomputed, reported);
      notes.emplace_back(buf);
    }
  }

  std::string md = render_comparison_markdown(table, notes);
  if (!report_paths.empty()) {
    if (!labels.empty() && labels.size() != report_paths.size()) {
      throw rbflow::ValueError("compare: --label count must match --report count");
    }
    std::vector<rbflow::ComputedCell> cells;
    for (std::size_t i = 0; i < report_paths.size(); ++i) {
      Json rep;
      try {
        rep = Json::parse(rbflow::read_file(report_paths[i]));
      } catch (const nlohmann::json::exception& e) {
        throw rbflow::ParseError(report_paths[i] + ": " + e.what());
      }
      if (!rep.contains("mae_veh_h")) {
        throw rbflow::ValueError(report_paths[i] + ": report has no mae_veh_h (regression only)");
      }
      cells.push_back({rep.at("dataset").at("detail").get<std::string>(),
                       labels.empty() ? rep.at("model_id").get<std::string>() : labels[i],
                       rep.at("mae_veh_h").get<double>()});
    }
    md += "\nComputed results (MAE, veh/h):\n\n";
    md += render_comparison_markdown(rbflow::build_computed_table("dataset", cells));
  }
  if (!out_md.empty()) rbflow::atomic_write(out_md, md);
  std::cout << md;

  std::vector<std::string> outputs;
  if (!out_csv.empty()) outputs.push_back(out_csv);
  if (!out_md.empty()) outputs.push_back(out_md);
  if (!outputs.empty()) {
    std::vector<std::string> inputs = {fixture_path};
    if (!meta_path.empty()) inputs.push_back(meta_path);
    inputs.insert(inputs.end(), report_paths.begin(), report_paths.end());
    std::optional<AppConfig> cfg;
    if (!config_path.empty()) cfg = rbflow::load_app_config_file(config_path);
    rbflow::write_manifest(outputs.front() + ".manifest.json", "compare",
                           cfg ? &*cfg : nullptr, inputs, outputs);
  }
  return 0;
}

int cmd_plot(const std::string& loss_path, const std::string& fitness_path,
             const std::string& comparison_path, const std::string& out_dir,
             const std::string& config_path) {
  if (loss_path.empty() && fitness_path.empty() && comparison_path.empty()) {
    throw rbflow::ValueError("plot: give at least one of --loss-history, --fitness-history, "
                             "--comparison");
  }
  std::vector<std::string> outputs;
  if (!loss_path.empty()) {
    const auto history = rbflow::parse_loss_history_csv(rbflow::read_file(loss_path));
    const std::string out = out_dir + "/loss_vs_epoch.csv";
    rbflow::atomic_write(out, rbflow::loss_history_csv(history));
    outputs.push_back(out);
  }
  if (!fitness_path.empty()) {
    const auto history = rbflow::parse_fitness_history_csv(rbflow::read_file(fitness_path));
    const std::string out = out_dir + "/fitness_vs_generation.csv";
    rbflow::atomic_write(out, rbflow::fitness_history_csv(history));
    outputs.push_back(out);
  }
  if (!comparison_path.empty()) {
    const auto table = rbflow::parse_comparison_csv(rbflow::read_file(comparison_path));
    const std::string out = out_dir + "/mae_vs_vehicle_count.csv";
    rbflow::atomic_write(out, rbflow::comparison_plot_csv(table));
    outputs.push_back(out);
  }
  std::vector<std::string> inputs;
  if (!loss_path.empty()) inputs.push_back(loss_path);
  if (!fitness_path.empty()) inputs.push_back(fitness_path);
  if (!comparison_path.empty()) inputs.push_back(comparison_path);
  std::optional<AppConfig> cfg;
  if (!config_path.empty()) cfg = rbflow::load_app_config_file(config_path);
  rbflow::write_manifest(out_dir + "/plot.manifest.json", "plot", cfg ? &*cfg : nullptr, inputs,
                         outputs);
  for (const auto& out : outputs) std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep RBF traffic forecasting toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string gen_out;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic traffic dataset CSV");
  add_common(generate, gen_args);
  generate->add_option("--out", gen_out, "output dataset CSV")->required();

  CommonArgs pre_args;
  std::string pre_in, pre_train, pre_test, pre_report;
  CLI::App* preprocess = app.add_subcommand("preprocess", "clean a dataset and split train/test");
  add_common(preprocess, pre_args);
  preprocess->add_option("--in", pre_in, "input dataset CSV")->required();
  preprocess->add_option("--out-train", pre_train, "training split CSV")->required();
  preprocess->add_option("--out-test", pre_test, "test split CSV")->required();
  preprocess->add_option("--report", pre_report, "cleaning report JSON");

  CommonArgs train_args;
  std::string train_in, train_mode = "backprop", train_out, train_loss_hist, train_fit_hist;
  CLI::App* train = app.add_subcommand("train", "fit a model on a training split");
  add_common(train, train_args);
  train->add_option("--train", train_in, "training split CSV")->required();
  train->add_option("--mode", train_mode, "backprop, ga, or hybrid")
      ->check(CLI::IsMember({"backprop", "ga", "hybrid"}));
  train->add_option("--out", train_out, "model JSON path")->required();
  train->add_option("--loss-history", train_loss_hist, "loss history CSV path");
  train->add_option("--fitness-history", train_fit_hist, "fitness history CSV path");

  CommonArgs pred_args;
  std::string pred_model, pred_data, pred_out;
  CLI::App* predict = app.add_subcommand("predict", "run a model over a dataset");
  add_common(predict, pred_args);
  predict->add_option("--model", pred_model, "model JSON")->required();
  predict->add_option("--data", pred_data, "dataset CSV")->required();
  predict->add_option("--out", pred_out, "predictions CSV")->required();

  CommonArgs eval_args;
  std::string eval_model, eval_data, eval_train, eval_out, eval_md;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a model and write a report");
  add_common(evaluate, eval_args);
  evaluate->add_option("--model", eval_model, "model JSON")->required();
  evaluate->add_option("--data", eval_data, "test split CSV")->required();
  evaluate->add_option("--train", eval_train, "training split CSV for the constant-mean baseline");
  evaluate->add_option("--out", eval_out, "report JSON")->required();
  evaluate->add_option("--out-md", eval_md, "human-readable report markdown");

  std::string cmp_fixture, cmp_meta, cmp_csv, cmp_md, cmp_config;
  std::vector<std::string> cmp_reports, cmp_labels;
  CLI::App* compare = app.add_subcommand("compare", "render a method comparison table");
  compare->add_option("--fixture", cmp_fixture, "comparison fixture CSV")->required();
  compare->add_option("--meta", cmp_meta, "fixture metadata JSON (published summary average)");
  compare->add_option("--report", cmp_reports, "evaluation report JSON (repeatable)");
  compare->add_option("--label", cmp_labels, "column label per --report");
  compare->add_option("--out-csv", cmp_csv, "rendered CSV path");
  compare->add_option("--out-md", cmp_md, "rendered markdown path");
  compare->add_option("--config", cmp_config, "run configuration (recorded in the manifest)");

  std::string plot_loss, plot_fitness, plot_cmp, plot_dir, plot_config;
  CLI::App* plot = app.add_subcommand("plot", "emit plot-ready data series");
  plot->add_option("--loss-history", plot_loss, "loss history CSV");
  plot->add_option("--fitness-history", plot_fitness, "fitness history CSV");
  plot->add_option("--comparison", plot_cmp, "comparison table CSV");
  plot->add_option("--out-dir", plot_dir, "output directory")->required();
  plot->add_option("--config", plot_config, "run configuration (recorded in the manifest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_args, gen_out);
    if (preprocess->parsed()) {
      return cmd_preprocess(pre_args, pre_in, pre_train, pre_test, pre_report);
    }
    if (train->parsed()) {
      return cmd_train(train_args, train_in, train_mode, train_out, train_loss_hist,
                       train_fit_hist);
    }
    if (predict->parsed()) return cmd_predict(pred_args, pred_model, pred_data, pred_out);
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_args, eval_model, eval_data, eval_train, eval_out, eval_md);
    }
    if (compare->parsed()) {
      return cmd_compare(cmp_fixture, cmp_meta, cmp_reports, cmp_labels, cmp_csv, cmp_md,
                         cmp_config);
    }
    if (plot->parsed()) {
      return cmd_plot(plot_loss, plot_fitness, plot_cmp, plot_dir, plot_config);
    }
  } catch (const rbflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
