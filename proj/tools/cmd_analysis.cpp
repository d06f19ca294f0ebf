#include <cmath>
#include <cstdio>
#include <optional>

#include "cli_common.hpp"
#include "specktrack/error.hpp"
#include "specktrack/eval.hpp"
#include "specktrack/io.hpp"
#include "specktrack/motion.hpp"
#include "specktrack/svg.hpp"

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

std::string csv_num(double v) {
  return std::isfinite(v) ? format_g9(v) : std::string("nan");
}

}  // namespace

int run_motion(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path, {"dataset", "num_phases", "num_bins", "center_frame"});
  if (!j.contains("dataset")) {
    raise(ErrorCode::InvalidConfig, config_path + ": missing required key 'dataset'");
  }
  const std::string dataset = j.at("dataset").get<std::string>();
  const int num_phases = j.value("num_phases", 16);
  const int num_bins = j.value("num_bins", 16);
  const int center_frame = j.value("center_frame", 0);

  const auto index = load_dataset_index(dataset);
  std::vector<TrajectorySet> all_trajs;
  std::vector<motion::PolarMotionField> fields;
  for (const auto& [video_path, traj_path] : index.samples) {
    TrajectorySet trajs = load_trajectories(traj_path);
    if (center_frame >= trajs.num_frames) {
      raise(ErrorCode::InvalidArgument,
            "center_frame " + std::to_string(center_frame) + " outside '" + traj_path + "'");
    }
    fields.push_back(motion::to_polar(trajs, center_frame));
    all_trajs.push_back(std::move(trajs));
  }
  const auto stats = motion::phase_stats(fields, num_phases, num_bins);
  const double optimal = motion::optimal_init_phase(all_trajs, num_phases);

  std::vector<std::string> outputs;
  if (global.format == "json") {
    nlohmann::json out;
    out["optimal_init_phase"] = optimal;
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k < stats.num_phases; ++k) {
      nlohmann::json row;
      row["phase"] = stats.phases[k];
      row["defined"] = stats.defined[k] != 0;
      row["count"] = stats.counts[k];
      row["resultant_length"] = csv_num(stats.resultant_length[k]);
      row["vertical_fraction"] = csv_num(stats.vertical_fraction[k]);
      row["mean_magnitude"] = csv_num(stats.mean_magnitude[k]);
      rows.push_back(row);
    }
    out["phases"] = rows;
    write_text_file(output_path(global, "phase_stats.json"), out.dump(2) + "\n");
    outputs.push_back("phase_stats.json");
  } else {
    std::string csv = "phase,defined,count,resultant_length,vertical_fraction,mean_magnitude";
    for (int b = 0; b < stats.num_bins; ++b) csv += ",hist_bin" + std::to_string(b);
    csv += "\n";
    for (int k = 0; k < stats.num_phases; ++k) {
      csv += format_g9(stats.phases[k]);
      csv += stats.defined[k] ? ",1," : ",0,";
      csv += std::to_string(stats.counts[k]);
      csv += "," + csv_num(stats.resultant_length[k]);
      csv += "," + csv_num(stats.vertical_fraction[k]);
      csv += "," + csv_num(stats.mean_magnitude[k]);
      for (int b = 0; b < stats.num_bins; ++b) {
        csv += "," + std::to_string(stats.angle_histogram[static_cast<size_t>(k) * stats.num_bins + b]);
      }
      csv += "\n";
    }
    write_text_file(output_path(global, "phase_stats.csv"), csv);
    outputs.push_back("phase_stats.csv");
    write_text_file(output_path(global, "optimal_phase.csv"),
                    "optimal_init_phase\n" + format_g9(optimal) + "\n");
    outputs.push_back("optimal_phase.csv");
  }

  if (global.plot) {
    std::vector<std::vector<int64_t>> hists;
    std::vector<std::string> titles;
    for (int k = 0; k < stats.num_phases; ++k) {
      hists.emplace_back(stats.angle_histogram.begin() + static_cast<size_t>(k) * stats.num_bins,
                         stats.angle_histogram.begin() +
                             static_cast<size_t>(k + 1) * stats.num_bins);
      char buf[32];
      std::snprintf(buf, sizeof(buf), "phase %.2f", stats.phases[k]);
      titles.push_back(buf);
    }
    write_text_file(output_path(global, "motion_roses.svg"),
                    svg::rose_grid(hists, titles, stats.num_bins));
    outputs.push_back("motion_roses.svg");
  }

  nlohmann::json resolved{{"dataset", dataset},
                          {"num_phases", num_phases},
                          {"num_bins", num_bins},
                          {"center_frame", center_frame},
                          {"optimal_init_phase", optimal}};
  write_run_manifest(global, "motion", resolved, outputs);
  std::printf("motion: optimal initialization phase = %.4f\n", optimal);
  return 0;
}

int run_gls(const GlobalOptions& global, const std::string& config_path) {
  const nlohmann::json j = load_config(config_path);
  check_keys(j, config_path, {"dataset", "trajectories", "ed_frame", "es_frame", "references"});
  std::vector<std::string> traj_paths;
  if (j.contains("dataset")) {
    for (const auto& [v, t] : load_dataset_index(j.at("dataset").get<std::string>()).samples) {
      traj_paths.push_back(t);
    }
  }
  if (j.contains("trajectories")) {
    for (const auto& p : j.at("trajectories")) traj_paths.push_back(p.get<std::string>());
  }
  if (traj_paths.empty()) {
    raise(ErrorCode::InvalidConfig, config_path + ": need 'dataset' or 'trajectories'");
  }
  std::optional<int> ed, es;
  if (j.contains("ed_frame")) ed = j.at("ed_frame").get<int>();
  if (j.contains("es_frame")) es = j.at("es_frame").get<int>();

  std::vector<double> values;
  std::string csv = "trajectories,gls_percent,ed_frame,es_frame\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& path : traj_paths) {
    const auto report = eval::gls(load_trajectories(path), ed, es);
    values.push_back(report.gls_percent);
    csv += path + "," + format_g9(report.gls_percent) + "," + std::to_string(report.ed_frame) +
           "," + std::to_string(report.es_frame) + "\n";
    rows.push_back({{"trajectories", path},
                    {"gls_percent", report.gls_percent},
                    {"ed_frame", report.ed_frame},
                    {"es_frame", report.es_frame}});
  }

  std::optional<double> mad;
  if (j.contains("references")) {
    const auto refs = j.at("references").get<std::vector<double>>();
    mad = eval::gls_mad(values, refs);
  }

  std::vector<std::string> outputs;
  if (global.format == "json") {
    nlohmann::json out;
    out["gls"] = rows;
    if (mad) out["mad_percent"] = *mad;
    write_text_file(output_path(global, "gls.json"), out.dump(2) + "\n");
    outputs.push_back("gls.json");
  } else {
    if (mad) csv += "MAD," + format_g9(*mad) + ",,\n";
    write_text_file(output_path(global, "gls.csv"), csv);
    outputs.push_back("gls.csv");
  }
  nlohmann::json resolved = j;
  write_run_manifest(global, "gls", resolved, outputs);
  if (mad) {
    std::printf("gls: %zu samples, MAD vs reference = %.3f%%\n", values.size(), *mad);
  } else {
    std::printf("gls: %zu samples\n", values.size());
  }
  return 0;
}

}  // namespace specktrack::cli
