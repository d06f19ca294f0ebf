#include <chrono>
#include <cstdio>

#include "cli_common.hpp"
#include "specktrack/error.hpp"
#include "specktrack/eval.hpp"
#include "specktrack/io.hpp"
#include "specktrack/svg.hpp"
#include "specktrack/threading.hpp"
#include "specktrack/tracker.hpp"
#include "specktrack/train.hpp"

namespace specktrack::cli {

namespace {

void check_keys(const nlohmann::json& j, const std::string& context,
                std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) ok = true;
    }
    if (!ok) raise(ErrorCode::InvalidConfig, context + ": unknown key '" + it.key() + "'");
  }
}

std::string metrics_csv_header() {
  return "delta1,delta2,delta4,delta8,delta16,delta_avg,mte";
}

std::string metrics_csv_row(const eval::MetricReport& r) {
  std::string row;
  for (double d : r.delta) row += format_g9(d) + ",";
  row += format_g9(r.delta_avg) + "," + format_g9(r.mte);
  return row;
}

}  // namespace

int run_train(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path, {"dataset", "train"});
  if (!j.contains("dataset")) {
    raise(ErrorCode::InvalidConfig, config_path + ": missing required key 'dataset'");
  }
  const std::string dataset = j.at("dataset").get<std::string>();
  train::TrainConfig cfg;
  if (j.contains("train")) {
    cfg = train::train_config_from_json(j.at("train").dump(), config_path + ".train");
  }
  if (global.seed_set) cfg.seed = global.seed;
  if (global.threads > 0) cfg.threads = global.threads;

  const auto index = load_dataset_index(dataset);
  train::FitOptions options;
  options.log_csv_path = output_path(global, "loss_log.csv");
  options.checkpoint_dir = global.output_dir;
  const auto result = train::fit(index.samples, cfg, options);

  nlohmann::json resolved{{"dataset", dataset},
                          {"train", nlohmann::json::parse(train::train_config_to_json(cfg))}};
  write_run_manifest(global, "train", resolved,
                     {"loss_log.csv", "last.ckpt", "last.ckpt.bin", "best.ckpt",
                      "best.ckpt.bin"});
  std::printf("train: %d steps, final loss %.4f px, best loss %.4f px at step %d\n",
              cfg.total_steps, result.log.back().loss, result.best_loss, result.best_step);
  return 0;
}

int run_track(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path,
             {"video", "queries", "checkpoint", "gamma", "soft_radius", "write_confidence"});
  for (const char* k : {"video", "queries", "checkpoint"}) {
    if (!j.contains(k)) {
      raise(ErrorCode::InvalidConfig, config_path + ": missing required key '" + k + "'");
    }
  }
  const VideoTensor video = load_video(j.at("video").get<std::string>());
  const TrajectorySet queries = load_trajectories(j.at("queries").get<std::string>());
  const auto weights = net::load_checkpoint(j.at("checkpoint").get<std::string>());
  tracker::TrackerOptions opts;
  opts.gamma = j.value("gamma", 15.0);
  opts.soft_radius = j.value("soft_radius", 5.0);
  opts.threads = resolve_threads(global.threads);

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = tracker::track(video, queries, weights, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_trajectories(result.trajectories, output_path(global, "estimated.tracks.json"));
  std::vector<std::string> outputs{"estimated.tracks.json"};
  if (j.value("write_confidence", false)) {
    std::string csv = "point";
    for (int t = 0; t < result.trajectories.num_frames; ++t) csv += ",frame" + std::to_string(t);
    csv += "\n";
    for (int n = 0; n < result.trajectories.num_points; ++n) {
      csv += std::to_string(n);
      for (int t = 0; t < result.trajectories.num_frames; ++t) {
        csv += "," + format_g9(result.confidence[static_cast<size_t>(n) *
                                                     result.trajectories.num_frames + t]);
      }
      csv += "\n";
    }
    write_text_file(output_path(global, "confidence.csv"), csv);
    outputs.push_back("confidence.csv");
  }
  write_run_manifest(global, "track", j, outputs);
  std::printf("track: %d points x %d frames in %.3f s\n", result.trajectories.num_points,
              result.trajectories.num_frames, secs);
  return 0;
}

int run_eval(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path, {"dataset", "checkpoint", "gamma", "soft_radius"});
  for (const char* k : {"dataset", "checkpoint"}) {
    if (!j.contains(k)) {
      raise(ErrorCode::InvalidConfig, config_path + ": missing required key '" + k + "'");
    }
  }
  const auto index = load_dataset_index(j.at("dataset").get<std::string>());
  const auto weights = net::load_checkpoint(j.at("checkpoint").get<std::string>());
  tracker::TrackerOptions opts;
  opts.gamma = j.value("gamma", 15.0);
  opts.soft_radius = j.value("soft_radius", 5.0);
  opts.threads = resolve_threads(global.threads);

  std::string csv = "sample," + metrics_csv_header() + "\n";
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> pooled_errors;
  double pooled_delta[5] = {0, 0, 0, 0, 0};
  int64_t pooled_terms = 0;
  double total_secs = 0.0;

  for (size_t i = 0; i < index.samples.size(); ++i) {
    const VideoTensor video = load_video(index.samples[i].first);
    const TrajectorySet ref = load_trajectories(index.samples[i].second);
    const TrajectorySet seed = tracker::query_seed_from(ref, ref.query_frame);

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = tracker::track(video, seed, weights, opts);
    total_secs += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto report = eval::compute_metrics(result.trajectories, seed);
    const auto errors = eval::pairwise_errors(result.trajectories, seed);
    pooled_errors.insert(pooled_errors.end(), errors.begin(), errors.end());
    for (size_t k = 0; k < 5; ++k) {
      pooled_delta[k] += report.delta[k] * static_cast<double>(errors.size());
    }
    pooled_terms += static_cast<int64_t>(errors.size());

    csv += "sample_" + std::to_string(i) + "," + metrics_csv_row(report) + "\n";
    rows.push_back({{"sample", i},
                    {"delta_avg", report.delta_avg},
                    {"mte", report.mte},
                    {"delta1", report.delta[0]},
                    {"delta2", report.delta[1]},
                    {"delta4", report.delta[2]},
                    {"delta8", report.delta[3]},
                    {"delta16", report.delta[4]}});
  }

  eval::MetricReport aggregate;
  std::sort(pooled_errors.begin(), pooled_errors.end());
  const size_t m = pooled_errors.size();
  aggregate.mte = m % 2 == 1 ? pooled_errors[m / 2]
                             : 0.5 * (pooled_errors[m / 2 - 1] + pooled_errors[m / 2]);
  for (size_t k = 0; k < 5; ++k) {
    aggregate.delta[k] = pooled_delta[k] / static_cast<double>(pooled_terms);
    aggregate.delta_avg += aggregate.delta[k];
  }
  aggregate.delta_avg /= 5.0;
  csv += "aggregate," + metrics_csv_row(aggregate) + "\n";

  std::vector<std::string> outputs;
  if (global.format == "json") {
    nlohmann::json out;
    out["per_sample"] = rows;
    out["aggregate"] = {{"delta_avg", aggregate.delta_avg}, {"mte", aggregate.mte}};
    write_text_file(output_path(global, "eval.json"), out.dump(2) + "\n");
    outputs.push_back("eval.json");
  } else {
    write_text_file(output_path(global, "eval.csv"), csv);
    outputs.push_back("eval.csv");
  }
  write_run_manifest(global, "eval", j, outputs);
  std::printf("eval: %zu samples, delta_avg %.3f, MTE %.3f px, mean inference %.3f s/video\n",
              index.samples.size(), aggregate.delta_avg, aggregate.mte,
              total_secs / static_cast<double>(index.samples.size()));
  return 0;
}

int run_sweep(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path, {"dataset", "checkpoint", "num_phases", "gamma", "soft_radius"});
  for (const char* k : {"dataset", "checkpoint"}) {
    if (!j.contains(k)) {
      raise(ErrorCode::InvalidConfig, config_path + ": missing required key '" + k + "'");
    }
  }
  const auto index = load_dataset_index(j.at("dataset").get<std::string>());
  const auto weights = net::load_checkpoint(j.at("checkpoint").get<std::string>());
  const int num_phases = j.value("num_phases", 21);
  tracker::TrackerOptions opts;
  opts.gamma = j.value("gamma", 15.0);
  opts.soft_radius = j.value("soft_radius", 5.0);
  opts.threads = resolve_threads(global.threads);

  std::vector<VideoTensor> videos;
  std::vector<TrajectorySet> refs;
  videos.reserve(index.samples.size());
  refs.reserve(index.samples.size());
  for (const auto& [video_path, traj_path] : index.samples) {
    videos.push_back(load_video(video_path));
    refs.push_back(load_trajectories(traj_path));
  }
  std::vector<std::pair<const VideoTensor*, const TrajectorySet*>> dataset;
  for (size_t i = 0; i < videos.size(); ++i) dataset.emplace_back(&videos[i], &refs[i]);

  const auto sweep = eval::phase_sweep(weights, dataset, num_phases, opts);

  std::string csv = "phase,anchored_points," + metrics_csv_header() + "\n";
  for (const auto& p : sweep) {
    csv += format_g9(p.phase) + "," + std::to_string(p.anchored_points) + "," +
           metrics_csv_row(p.report) + "\n";
  }
  std::vector<std::string> outputs;
  write_text_file(output_path(global, "sweep.csv"), csv);
  outputs.push_back("sweep.csv");

  if (global.plot) {
    svg::Series delta_series{"delta_avg", {}, {}};
    svg::Series mte_series{"mte", {}, {}};
    for (const auto& p : sweep) {
      delta_series.x.push_back(p.phase);
      delta_series.y.push_back(p.report.delta_avg);
      mte_series.x.push_back(p.phase);
      mte_series.y.push_back(p.report.mte);
    }
    write_text_file(output_path(global, "sweep_delta.svg"),
                    svg::line_chart({delta_series}, "position accuracy vs query phase",
                                    "query phase", "delta_avg"));
    write_text_file(output_path(global, "sweep_mte.svg"),
                    svg::line_chart({mte_series}, "trajectory error vs query phase",
                                    "query phase", "MTE (px)"));
    outputs.push_back("sweep_delta.svg");
    outputs.push_back("sweep_mte.svg");
  }
  write_run_manifest(global, "sweep", j, outputs);

  double best_phase = 0.0, best_mte = std::numeric_limits<double>::infinity();
  for (const auto& p : sweep) {
    if (p.anchored_points > 0 && p.report.mte < best_mte) {
      best_mte = p.report.mte;
      best_phase = p.phase;
    }
  }
  std::printf("sweep: best MTE %.3f px at phase %.3f\n", best_mte, best_phase);
  return 0;
}

int run_gradcheck(const GlobalOptions& global, const std::string& config_path, bool tiny) {
  (void)tiny;  // the tiny configuration is the only gradient-check mode
  uint64_t seed = 7;
  int min_params = 50;
  double fd_step = 1e-5;
  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    j = load_config(config_path);
    check_keys(j, config_path, {"seed", "min_params", "fd_step"});
    seed = j.value("seed", seed);
    min_params = j.value("min_params", min_params);
    fd_step = j.value("fd_step", fd_step);
  }
  if (global.seed_set) seed = global.seed;

  const auto report = train::gradient_check(seed, min_params, fd_step);
  constexpr double kTolerance = 1e-4;

  nlohmann::json out;
  out["max_rel_error"] = report.max_rel_error;
  out["params_checked"] = report.params_checked;
  out["tolerance"] = kTolerance;
  out["passed"] = report.max_rel_error <= kTolerance;
  nlohmann::json worst = nlohmann::json::array();
  auto entries = report.entries;
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.rel_error > b.rel_error; });
  for (size_t i = 0; i < std::min<size_t>(5, entries.size()); ++i) {
    worst.push_back({{"tensor", entries[i].tensor},
                     {"index", entries[i].index},
                     {"analytic", entries[i].analytic},
                     {"numeric", entries[i].numeric},
                     {"rel_error", entries[i].rel_error}});
  }
  out["worst"] = worst;
  write_text_file(output_path(global, "gradcheck.json"), out.dump(2) + "\n");
  write_run_manifest(global, "gradcheck",
                     {{"seed", seed}, {"min_params", min_params}, {"fd_step", fd_step}},
                     {"gradcheck.json"});

  std::printf("gradcheck: max relative error %.3e over %d parameters (%.2f s)\n",
              report.max_rel_error, report.params_checked, report.runtime_seconds);
  if (report.max_rel_error > kTolerance) {
    std::fprintf(stderr, "gradcheck FAILED: %.3e > %.0e\n", report.max_rel_error, kTolerance);
    return 3;
  }
  return 0;
}

}  // namespace specktrack::cli
