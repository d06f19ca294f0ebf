#include <cstdio>
#include <filesystem>

#include "cli_common.hpp"
#include "specktrack/augment.hpp"
#include "specktrack/error.hpp"
#include "specktrack/io.hpp"
#include "specktrack/synth.hpp"
#include "specktrack/threading.hpp"
#include "specktrack/version.hpp"

namespace specktrack::cli {

namespace fs = std::filesystem;

int run_synth(const GlobalOptions& global, const std::string& config_path) {
  auto cfg = synth::synth_config_from_json(read_text_file(config_path), config_path);
  if (global.seed_set) cfg.seed = global.seed;
  fs::create_directories(global.output_dir);
  synth::write_synth_dataset(cfg, global.output_dir, resolve_threads(global.threads));
  std::printf("synth: wrote %d samples to %s\n", cfg.num_videos, global.output_dir.c_str());
  return 0;
}

int run_augment(const GlobalOptions& global, const std::string& config_path) {
  nlohmann::json j = load_config(config_path);
  std::string dataset;
  aug::AugConfig acfg;
  bool enable_affine = true, enable_photometric = true, emit_clips = false;
  {
    // Manual key walk keeps the unknown-key check.
    std::vector<std::string> known{"dataset", "augmentation", "enable_affine",
                                   "enable_photometric", "emit_clips"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        raise(ErrorCode::InvalidConfig, config_path + ": unknown key '" + it.key() + "'");
      }
    }
    if (!j.contains("dataset")) {
      raise(ErrorCode::InvalidConfig, config_path + ": missing required key 'dataset'");
    }
    dataset = j.at("dataset").get<std::string>();
    if (j.contains("augmentation")) {
      acfg = aug::aug_config_from_json(j.at("augmentation").dump(), config_path);
    }
    enable_affine = j.value("enable_affine", true);
    enable_photometric = j.value("enable_photometric", true);
    emit_clips = j.value("emit_clips", false);
  }
  if (global.seed_set) acfg.seed = global.seed;
  const int threads = resolve_threads(global.threads);

  const auto index = load_dataset_index(dataset);
  nlohmann::json samples = nlohmann::json::array();
  nlohmann::json provenance = nlohmann::json::array();
  std::vector<std::string> outputs;

  int out_idx = 0;
  for (size_t i = 0; i < index.samples.size(); ++i) {
    VideoTensor video = load_video(index.samples[i].first);
    TrajectorySet trajs = load_trajectories(index.samples[i].second);

    nlohmann::json record;
    record["source_index"] = i;

    std::vector<std::pair<VideoTensor, TrajectorySet>> units;
    if (emit_clips) {
      const auto clips = aug::make_clips(video.frames, acfg, i);
      nlohmann::json clip_list = nlohmann::json::array();
      for (const auto& c : clips) {
        units.push_back(aug::extract_clip(video, trajs, c));
        clip_list.push_back(nlohmann::json::parse(aug::clip_spec_to_json(c)));
      }
      record["clips"] = clip_list;
    } else {
      units.emplace_back(std::move(video), std::move(trajs));
    }

    nlohmann::json unit_params = nlohmann::json::array();
    for (auto& [uv, ut] : units) {
      nlohmann::json p;
      if (enable_affine) {
        const auto params = aug::sample_affine(acfg, out_idx, uv.width, uv.height);
        auto [av, at] = aug::apply_affine(uv, ut, params, threads);
        uv = std::move(av);
        ut = std::move(at);
        p["affine"] = nlohmann::json::parse(aug::affine_params_to_json(params));
      }
      if (enable_photometric) {
        const auto params = aug::sample_photometric(acfg, out_idx);
        uv = aug::apply_photometric(uv, params, threads);
        p["photometric"] = nlohmann::json::parse(aug::photometric_params_to_json(params));
      }
      char video_name[64], traj_name[64];
      std::snprintf(video_name, sizeof(video_name), "aug_%04d.ustv", out_idx);
      std::snprintf(traj_name, sizeof(traj_name), "aug_%04d.tracks.json", out_idx);
      save_video(uv, output_path(global, video_name));
      save_trajectories(ut, output_path(global, traj_name));
      samples.push_back({{"video", video_name}, {"trajectories", traj_name}});
      outputs.push_back(video_name);
      outputs.push_back(traj_name);
      p["output_index"] = out_idx;
      unit_params.push_back(p);
      ++out_idx;
    }
    record["units"] = unit_params;
    provenance.push_back(record);
  }

  write_text_file(output_path(global, "provenance.json"), provenance.dump(2) + "\n");
  outputs.push_back("provenance.json");

  nlohmann::json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = "augment";
  manifest["kind"] = "dataset";
  manifest["seed"] = acfg.seed;
  manifest["config"] = {{"dataset", dataset},
                        {"augmentation", nlohmann::json::parse(aug::aug_config_to_json(acfg))},
                        {"enable_affine", enable_affine},
                        {"enable_photometric", enable_photometric},
                        {"emit_clips", emit_clips}};
  manifest["samples"] = samples;
  manifest["outputs"] = outputs;
  write_text_file(output_path(global, "manifest.json"), manifest.dump(2) + "\n");
  std::printf("augment: wrote %d samples to %s\n", out_idx, global.output_dir.c_str());
  return 0;
}

}  // namespace specktrack::cli
