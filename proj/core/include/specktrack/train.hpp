#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specktrack/augment.hpp"
#include "specktrack/encoder.hpp"
#include "specktrack/types.hpp"

namespace specktrack::train {

struct TrainConfig {
  double peak_lr = 5e-4;
  int total_steps = 400;
  double warmup_fraction = 0.3;
  double final_lr_divisor = 1e4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 2;
  int points_per_sample = 12;
  uint64_t seed = 0;
  int threads = 1;
  int checkpoint_interval = 100;

  double gamma = 15.0;
  double soft_radius = 5.0;

  aug::AugConfig aug;  // clip_length, skip range, reversal, transform ranges
  bool enable_affine = true;
  bool enable_photometric = true;

  net::EncoderConfig encoder = net::EncoderConfig::desk_scale();

  void validate() const;
};

struct LossReport {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;    // px
  double delta1 = 0.0;  // batch fraction below 1 px
  double delta4 = 0.0;  // batch fraction below 4 px
};

/// Mean over valid (n, t != q) entries of |dx| + |dy|; both masks must agree
/// on shape and query frame. Errors with EmptyLoss when nothing is valid.
double weighted_l1_loss(const TrajectorySet& est, const TrajectorySet& ref);

/// Linear ramp from peak/25 to peak over warmup_fraction*total_steps, then
/// cosine decay to peak/final_lr_divisor at the final step.
double one_cycle_lr(int step, const TrainConfig& config);

class AdamW {
 public:
  explicit AdamW(const net::ParamSet<float>& params);
  void step(net::ParamSet<float>& params, const net::ParamSet<float>& grads, double lr,
            double weight_decay, double beta1, double beta2);
  int64_t steps_taken() const { return t_; }

 private:
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

/// One (augmented) training sample: the reference doubles as the query seed.
struct TrainSample {
  VideoTensor video;
  TrajectorySet ref;
};

struct PipelineStats {
  double loss_sum = 0.0;    // sum of |dx|+|dy| over valid terms
  int64_t terms = 0;        // valid (n, t != q) count
  int64_t hits1 = 0;        // Euclidean error < 1 px
  int64_t hits4 = 0;
  double loss() const { return terms > 0 ? loss_sum / static_cast<double>(terms) : 0.0; }
};

/// Full differentiable pass for one sample: resize to R, encode, run the
/// matching head per query, L1 loss against the reference. When `grads` is
/// non-null the exact reverse pass accumulates parameter gradients scaled by
/// loss_scale (gradient of loss_scale * per-sample-mean loss).
template <typename T>
PipelineStats pipeline_run(const TrainSample& sample, const net::ParamSet<T>& params,
                           double gamma, double soft_radius, T loss_scale,
                           net::ParamSet<T>* grads);

struct FitOptions {
  std::string log_csv_path;    // per-step CSV: step, lr, loss, delta1, delta4
  std::string checkpoint_dir;  // writes last.ckpt / best.ckpt when set
};

struct FitResult {
  net::EncoderWeights final_weights;
  net::EncoderWeights best_weights;
  int best_step = -1;
  double best_loss = 0.0;
  std::vector<LossReport> log;
};

/// Desk-scale training loop: per step, draw clips through the augmentation
/// module, apply affine/photometric/temporal augmentation, sample query
/// points, run forward/backward and an AdamW update on the one-cycle
/// schedule. Deterministic given (seed, single thread); sample-level
/// parallelism reduces gradients in sample order.
FitResult fit(const std::vector<std::pair<std::string, std::string>>& sample_paths,
              const TrainConfig& config, const FitOptions& options = {});

struct GradCheckEntry {
  std::string tensor;
  size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int params_checked = 0;
  double runtime_seconds = 0.0;
  std::vector<GradCheckEntry> entries;
};

/// 64-bit end-to-end gradient verification on the tiny configuration
/// (R = 32, T = 3, channels 4/8/8/8, N = 2) against central finite
/// differences. Samples at least `min_params` parameters covering every
/// tensor. rel = |a-b| / (max(|a|,|b|) + 1e-6).
GradCheckReport gradient_check(uint64_t seed = 7, int min_params = 50, double fd_step = 1e-5);

TrainConfig train_config_from_json(const std::string& json_text, const std::string& context);
std::string train_config_to_json(const TrainConfig& config);

}  // namespace specktrack::train
