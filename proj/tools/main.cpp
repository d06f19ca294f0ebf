#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "specktrack/error.hpp"
#include "specktrack/version.hpp"

using specktrack::cli::GlobalOptions;

namespace {

// Footer text per subcommand documents every config-file key and default.
const char* kSynthKeys =
    "Config keys (JSON): num_videos=20, frames=40, height=128, width=128,\n"
    "  points_per_video=16, seed=1, scale_min=0.90, scale_max=0.97,\n"
    "  rotation_max_deg=3, shear_max=0.04, translation_max=1.5, center_jitter=5,\n"
    "  vertical_bias=false, bias_translation_y=8, bias_translation_x_jitter=0.4,\n"
    "  systole_fraction=0.33, diastasis_fraction=0.2, smoothing_sigma=1.5,\n"
    "  additive_noise_sigma=0.02, multiplicative_noise_sigma=0.05,\n"
    "  warp_amplitude=0, point_layout=ring, ring_radius_fraction=0.28,\n"
    "  interior_margin=14";

const char* kAugmentKeys =
    "Config keys: dataset (required), augmentation{prob_scale=0.5,\n"
    "  prob_translation=0.5, prob_shear=0.5, prob_rotation=0.5, prob_flip_h=0.5,\n"
    "  prob_flip_v=0.5, rotation_limit_deg=120, scale_min=0.8, scale_max=1.2,\n"
    "  translation_frac=0.1, shear_limit=0.2, prob_gaussian_blur=0.3,\n"
    "  prob_motion_blur=0.25, prob_sharpen=0.25, prob_emboss=0.2,\n"
    "  prob_brightness_contrast=0.3, prob_noise=0.3, prob_compression=0.2,\n"
    "  reverse_probability=0.2, skip_min=0, skip_max=5, clip_length=36, seed=0},\n"
    "  enable_affine=true, enable_photometric=true, emit_clips=false";

const char* kMotionKeys =
    "Config keys: dataset (required), num_phases=16, num_bins=16, center_frame=0";

const char* kTrainKeys =
    "Config keys: dataset (required), train{peak_lr=5e-4, total_steps=400,\n"
    "  warmup_fraction=0.3, final_lr_divisor=1e4, weight_decay=1e-4, beta1=0.9,\n"
    "  beta2=0.999, batch_size=2, points_per_sample=12, seed=0, threads=1,\n"
    "  checkpoint_interval=100, gamma=15, soft_radius=5, enable_affine=true,\n"
    "  enable_photometric=true, augmentation{...}, encoder{channels=[16,32,32,64],\n"
    "  working_resolution=128, weight_seed=0}}";

const char* kTrackKeys =
    "Config keys: video (required), queries (required), checkpoint (required),\n"
    "  gamma=15, soft_radius=5, write_confidence=false";

const char* kEvalKeys =
    "Config keys: dataset (required), checkpoint (required), gamma=15, soft_radius=5";

const char* kSweepKeys =
    "Config keys: dataset (required), checkpoint (required), num_phases=21,\n"
    "  gamma=15, soft_radius=5";

const char* kGlsKeys =
    "Config keys: dataset or trajectories[] (one required), ed_frame (optional),\n"
    "  es_frame (optional), references[] (optional, enables MAD)";

const char* kGradcheckKeys = "Config keys: seed=7, min_params=50, fd_step=1e-5";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specktrack: speckle-tracking engine for echocardiography-style video"};
  app.set_version_flag("--version", specktrack::kArtifactVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Override config seeds (u64)")
      ->each([&global](const std::string&) { global.seed_set = true; });
  app.add_option("--threads", global.threads, "Worker threads (0 = auto)")->capture_default_str();
  app.add_option("--output-dir", global.output_dir, "Directory for outputs and manifest")
      ->capture_default_str();
  app.add_option("--format", global.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--plot", global.plot, "Emit SVG figures");

  struct Sub {
    CLI::App* cmd = nullptr;
    std::string config;
  };
  auto add_sub = [&](const char* name, const char* desc, const char* footer,
                     bool config_required = true) {
    auto sub = std::make_shared<Sub>();
    sub->cmd = app.add_subcommand(name, desc);
    auto* opt = sub->cmd->add_option("--config", sub->config, "JSON config file");
    if (config_required) opt->required();
    sub->cmd->footer(footer);
    return sub;
  };

  auto synth = add_sub("synth", "Generate a synthetic speckle dataset", kSynthKeys);
  auto augment = add_sub("augment", "Apply debiasing augmentations to a dataset", kAugmentKeys);
  auto motion = add_sub("motion", "Polar motion statistics and optimal phase", kMotionKeys);
  auto train = add_sub("train", "Train the tracker on a dataset", kTrainKeys);
  auto track = add_sub("track", "Track query points through a video", kTrackKeys);
  auto eval = add_sub("eval", "Evaluate a checkpoint on a dataset", kEvalKeys);
  auto sweep = add_sub("sweep", "Metric sweep over query phases", kSweepKeys);
  auto gls = add_sub("gls", "Global longitudinal strain from trajectories", kGlsKeys);
  auto gradcheck = add_sub("gradcheck", "Finite-difference gradient verification",
                           kGradcheckKeys, /*config_required=*/false);
  bool tiny = false;
  gradcheck->cmd->add_flag("--tiny", tiny, "Use the tiny verification configuration (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors exit 1
  }

  try {
    using namespace specktrack::cli;
    if (synth->cmd->parsed()) return run_synth(global, synth->config);
    if (augment->cmd->parsed()) return run_augment(global, augment->config);
    if (motion->cmd->parsed()) return run_motion(global, motion->config);
    if (train->cmd->parsed()) return run_train(global, train->config);
    if (track->cmd->parsed()) return run_track(global, track->config);
    if (eval->cmd->parsed()) return run_eval(global, eval->config);
    if (sweep->cmd->parsed()) return run_sweep(global, sweep->config);
    if (gls->cmd->parsed()) return run_gls(global, gls->config);
    if (gradcheck->cmd->parsed()) return run_gradcheck(global, gradcheck->config, tiny);
  } catch (const specktrack::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
