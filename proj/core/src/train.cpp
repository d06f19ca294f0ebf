#include "specktrack/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json_util.hpp"
#include "specktrack/error.hpp"
#include "specktrack/io.hpp"
#include "specktrack/rng.hpp"
#include "specktrack/synth.hpp"
#include "specktrack/threading.hpp"
#include "specktrack/tracker.hpp"

namespace specktrack::train {

void TrainConfig::validate() const {
  if (!(peak_lr > 0.0)) raise(ErrorCode::InvalidConfig, "peak_lr must be > 0");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) {
    raise(ErrorCode::InvalidConfig, "warmup_fraction must be in (0, 1)");
  }
  if (total_steps < 2) raise(ErrorCode::InvalidConfig, "total_steps must be >= 2");
  if (final_lr_divisor < 1.0) raise(ErrorCode::InvalidConfig, "final_lr_divisor must be >= 1");
  if (batch_size < 1) raise(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (points_per_sample < 1) raise(ErrorCode::InvalidConfig, "points_per_sample must be >= 1");
  if (gamma < 1.0) raise(ErrorCode::InvalidConfig, "gamma must be >= 1");
  if (soft_radius <= 0.0) raise(ErrorCode::InvalidConfig, "soft_radius must be > 0");
  aug.validate();
  encoder.validate();
}

double weighted_l1_loss(const TrajectorySet& est, const TrajectorySet& ref) {
  if (est.num_points != ref.num_points || est.num_frames != ref.num_frames) {
    raise(ErrorCode::ShapeMismatch, "loss requires matching trajectory shapes");
  }
  if (est.query_frame != ref.query_frame) {
    raise(ErrorCode::ShapeMismatch, "loss requires a shared query frame");
  }
  double sum = 0.0;
  int64_t count = 0;
  for (int n = 0; n < est.num_points; ++n) {
    for (int t = 0; t < est.num_frames; ++t) {
      if (t == est.query_frame) continue;
      if (!est.is_valid(n, t) || !ref.is_valid(n, t)) continue;
      const Vec2 d = est.at(n, t) - ref.at(n, t);
      sum += std::abs(d.x) + std::abs(d.y);
      ++count;
    }
  }
  if (count == 0) raise(ErrorCode::EmptyLoss, "no valid loss terms outside the query frame");
  return sum / static_cast<double>(count);
}

double one_cycle_lr(int step, const TrainConfig& config) {
  if (step < 0 || step >= config.total_steps) {
    raise(ErrorCode::InvalidArgument, "step outside [0, total_steps)");
  }
  const double peak = config.peak_lr;
  const double base = peak / 25.0;
  int warmup = static_cast<int>(config.warmup_fraction * config.total_steps);
  if (warmup < 1) warmup = 1;
  if (step <= warmup) {
    return base + (peak - base) * (static_cast<double>(step) / warmup);
  }
  if (warmup >= config.total_steps - 1) return peak;
  const double tt =
      static_cast<double>(step - warmup) / static_cast<double>(config.total_steps - 1 - warmup);
  const double end = peak / config.final_lr_divisor;
  return end + (peak - end) * 0.5 * (1.0 + std::cos(M_PI * tt));
}

AdamW::AdamW(const net::ParamSet<float>& params) {
  m_.reserve(params.tensors.size());
  v_.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    m_.emplace_back(t.v.size(), 0.0f);
    v_.emplace_back(t.v.size(), 0.0f);
  }
}

void AdamW::step(net::ParamSet<float>& params, const net::ParamSet<float>& grads, double lr,
                 double weight_decay, double beta1, double beta2) {
  if (grads.tensors.size() != params.tensors.size()) {
    raise(ErrorCode::ShapeMismatch, "gradient layout does not match parameters");
  }
  ++t_;
  const float b1 = static_cast<float>(beta1);
  const float b2 = static_cast<float>(beta2);
  const float bias1 = 1.0f - std::pow(b1, static_cast<float>(t_));
  const float bias2 = 1.0f - std::pow(b2, static_cast<float>(t_));
  const float flr = static_cast<float>(lr);
  const float fwd = static_cast<float>(weight_decay);
  constexpr float kEps = 1e-8f;
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    auto& p = params.tensors[i].v;
    const auto& g = grads.tensors[i].v;
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      const float mhat = m[k] / bias1;
      const float vhat = v[k] / bias2;
      p[k] -= flr * (mhat / (std::sqrt(vhat) + kEps) + fwd * p[k]);
    }
  }
}

namespace {

template <typename T>
void check_finite_grads(const net::ParamSet<T>& grads) {
  for (const auto& t : grads.tensors) {
    for (T v : t.v) {
      if (!std::isfinite(static_cast<double>(v))) {
        raise(ErrorCode::NumericFailure, "non-finite gradient in tensor '" + t.name + "'");
      }
    }
  }
}

}  // namespace

template <typename T>
PipelineStats pipeline_run(const TrainSample& sample, const net::ParamSet<T>& params,
                           double gamma, double soft_radius, T loss_scale,
                           net::ParamSet<T>* grads) {
  const int r = params.config.working_resolution;
  const int native_w = sample.video.width;
  const int native_h = sample.video.height;
  const VideoTensor work = resize_video(sample.video, r, r, 1);
  const int frames = work.frames;
  const TrajectorySet& ref = sample.ref;
  if (ref.num_frames != frames) {
    raise(ErrorCode::ShapeMismatch, "sample reference frames do not match the video");
  }
  const int q = ref.query_frame;

  // Forward encode with tapes (kept only when a backward pass follows).
  std::vector<net::FrameTape<T>> tapes(frames);
  net::Pyramid<T> pyr;
  pyr.work_res = r;
  pyr.f1.resize(frames);
  pyr.f2.resize(frames);
  pyr.f3.resize(frames);
  for (int t = 0; t < frames; ++t) {
    net::Grid<T> frame(r, r, 1);
    const float* src = work.frame(t);
    for (size_t i = 0; i < frame.v.size(); ++i) frame.v[i] = static_cast<T>(src[i]);
    net::encode_frame(frame, params, tapes[t]);
    pyr.f1[t] = tapes[t].blocks[3].output;
    pyr.f2[t] = tapes[t].blocks[5].output;
    pyr.f3[t] = tapes[t].blocks[7].output;
  }
  const auto norms = tracker::compute_norm_cache(pyr, 1);

  // Heads per query point; tapes retained for the reverse pass.
  std::vector<tracker::HeadTape<T>> head_tapes(ref.num_points);
  std::vector<std::vector<Vec2>> est_r(ref.num_points);
  PipelineStats stats;
  for (int n = 0; n < ref.num_points; ++n) {
    const Vec2 pq = ref.at(n, q);
    const Vec2 q_r{rescale_coord(pq.x, native_w, r), rescale_coord(pq.y, native_h, r)};
    est_r[n] = head_forward(pyr, norms, q_r, q, gamma, soft_radius, head_tapes[n]);
    for (int t = 0; t < frames; ++t) {
      if (t == q || !ref.is_valid(n, t)) continue;
      const Vec2 est{rescale_coord(est_r[n][t].x, r, native_w),
                     rescale_coord(est_r[n][t].y, r, native_h)};
      const Vec2 d = est - ref.at(n, t);
      stats.loss_sum += std::abs(d.x) + std::abs(d.y);
      const double err = norm(d);
      if (err < 1.0) ++stats.hits1;
      if (err < 4.0) ++stats.hits4;
      ++stats.terms;
    }
  }
  if (stats.terms == 0) {
    raise(ErrorCode::EmptyLoss, "sample has no valid loss terms outside the query frame");
  }
  if (!grads) return stats;

  // Reverse pass: d(loss)/d(native coords) -> head -> pyramid -> encoder.
  const T inv_terms = loss_scale / static_cast<T>(stats.terms);
  const T sx = static_cast<T>(static_cast<double>(native_w) / r);
  const T sy = static_cast<T>(static_cast<double>(native_h) / r);
  net::Pyramid<T> dpyr = net::zero_like(pyr);
  std::vector<Vec2> dcoords(frames);
  for (int n = 0; n < ref.num_points; ++n) {
    for (int t = 0; t < frames; ++t) dcoords[t] = {0.0, 0.0};
    for (int t = 0; t < frames; ++t) {
      if (t == q || !ref.is_valid(n, t)) continue;
      const Vec2 est{rescale_coord(est_r[n][t].x, r, native_w),
                     rescale_coord(est_r[n][t].y, r, native_h)};
      const Vec2 d = est - ref.at(n, t);
      const T gx = d.x > 0.0 ? inv_terms : (d.x < 0.0 ? -inv_terms : T(0));
      const T gy = d.y > 0.0 ? inv_terms : (d.y < 0.0 ? -inv_terms : T(0));
      dcoords[t] = {static_cast<double>(gx * sx), static_cast<double>(gy * sy)};
    }
    head_backward(pyr, norms, head_tapes[n], dcoords, gamma, dpyr);
  }
  for (int t = 0; t < frames; ++t) {
    net::encode_frame_backward(tapes[t], params, dpyr.f1[t], dpyr.f2[t], dpyr.f3[t], *grads);
  }
  check_finite_grads(*grads);
  return stats;
}

template PipelineStats pipeline_run<float>(const TrainSample&, const net::ParamSet<float>&,
                                           double, double, float, net::ParamSet<float>*);
template PipelineStats pipeline_run<double>(const TrainSample&, const net::ParamSet<double>&,
                                            double, double, double, net::ParamSet<double>*);

namespace {

// Deterministic per-(step, slot) stream ids for the augmentation draws.
uint64_t stream_id(uint64_t step, uint64_t slot, uint64_t salt) {
  return splitmix64(step * 0x100003ULL + slot * 0x10001ULL + salt);
}

TrainSample build_step_sample(const VideoTensor& video, const TrajectorySet& trajs,
                              const TrainConfig& cfg, uint64_t step, uint64_t slot) {
  // Augmentation draws must follow the training seed, so the per-sample
  // stream ids mix cfg.seed in before reaching the augmentation module.
  Rng rng(derive_seed(cfg.seed, stream_id(step, slot, 0xA)));

  const auto clips = aug::make_clips(video.frames, cfg.aug,
                                     derive_seed(cfg.seed, stream_id(step, slot, 0xB)));
  const auto& clip = clips[rng.uniform_index(clips.size())];
  auto [clip_video, clip_trajs] = aug::extract_clip(video, trajs, clip);

  if (cfg.enable_affine) {
    const auto params =
        aug::sample_affine(cfg.aug, derive_seed(cfg.seed, stream_id(step, slot, 0xC)),
                           clip_video.width, clip_video.height);
    auto [aug_video, aug_trajs] = aug::apply_affine(clip_video, clip_trajs, params, 1);
    clip_video = std::move(aug_video);
    clip_trajs = std::move(aug_trajs);
  }
  if (cfg.enable_photometric) {
    clip_video = aug::apply_photometric(
        clip_video, cfg.aug, derive_seed(cfg.seed, stream_id(step, slot, 0xD)), 1);
  }

  // Query points: a random subset of tracks valid at the clip query frame.
  const int q = clip_trajs.query_frame;
  std::vector<int> candidates;
  for (int n = 0; n < clip_trajs.num_points; ++n) {
    if (clip_trajs.is_valid(n, q)) candidates.push_back(n);
  }
  if (candidates.empty()) {
    raise(ErrorCode::EmptyLoss, "no valid query candidates in the augmented clip");
  }
  for (size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[rng.uniform_index(i)]);
  }
  const int take = std::min<int>(cfg.points_per_sample, static_cast<int>(candidates.size()));
  TrajectorySet subset(take, clip_trajs.num_frames, q);
  for (int i = 0; i < take; ++i) {
    for (int t = 0; t < clip_trajs.num_frames; ++t) {
      subset.at(i, t) = clip_trajs.at(candidates[i], t);
      subset.set_valid(i, t, clip_trajs.is_valid(candidates[i], t));
    }
  }
  return {std::move(clip_video), std::move(subset)};
}

}  // namespace

FitResult fit(const std::vector<std::pair<std::string, std::string>>& sample_paths,
              const TrainConfig& config, const FitOptions& options) {
  config.validate();
  if (sample_paths.empty()) raise(ErrorCode::InvalidArgument, "training dataset is empty");

  namespace fs = std::filesystem;
  std::ofstream log_csv;
  if (!options.log_csv_path.empty()) {
    log_csv.open(options.log_csv_path, std::ios::trunc);
    if (!log_csv) raise(ErrorCode::IoFailure, "cannot open loss log '" + options.log_csv_path + "'");
    log_csv << "step,lr,loss,delta1,delta4\n";
  }
  if (!options.checkpoint_dir.empty()) fs::create_directories(options.checkpoint_dir);

  FitResult result;
  net::EncoderWeights weights = net::init_weights(config.encoder);
  AdamW optimizer(weights);
  result.best_loss = std::numeric_limits<double>::infinity();

  const int batch = config.batch_size;
  std::vector<net::ParamSet<float>> grad_slots;
  for (int b = 0; b < batch; ++b) {
    grad_slots.push_back(net::make_param_layout<float>(config.encoder));
  }
  std::vector<PipelineStats> stats_slots(batch);
  std::vector<uint8_t> slot_ok(batch, 0);

  for (int step = 0; step < config.total_steps; ++step) {
    Rng step_rng(derive_seed(config.seed, stream_id(step, 0xFFFF, 0xE)));
    std::vector<size_t> picks(batch);
    for (int b = 0; b < batch; ++b) picks[b] = step_rng.uniform_index(sample_paths.size());

    parallel_for_each(batch, config.threads, [&](int64_t bi) {
      const int b = static_cast<int>(bi);
      grad_slots[b].zero();
      slot_ok[b] = 0;
      const auto& [video_path, traj_path] = sample_paths[picks[b]];
      const VideoTensor video = load_video(video_path);
      const TrajectorySet trajs = load_trajectories(traj_path);
      try {
        const TrainSample sample = build_step_sample(video, trajs, config, step, b);
        stats_slots[b] = pipeline_run<float>(sample, weights, config.gamma, config.soft_radius,
                                             1.0f, &grad_slots[b]);
        slot_ok[b] = 1;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyLoss) throw;
      }
    });

    // Ordered reduction over batch slots keeps results independent of the
    // thread count.
    net::ParamSet<float> grads = net::make_param_layout<float>(config.encoder);
    int used = 0;
    PipelineStats total;
    for (int b = 0; b < batch; ++b) {
      if (!slot_ok[b]) continue;
      ++used;
      total.loss_sum += stats_slots[b].loss();
      total.terms += stats_slots[b].terms;
      total.hits1 += stats_slots[b].hits1;
      total.hits4 += stats_slots[b].hits4;
      for (size_t i = 0; i < grads.tensors.size(); ++i) {
        auto& dst = grads.tensors[i].v;
        const auto& src = grad_slots[b].tensors[i].v;
        for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
    if (used == 0) {
      raise(ErrorCode::EmptyLoss, "every sample in the batch produced zero loss terms");
    }
    const float inv_used = 1.0f / static_cast<float>(used);
    for (auto& t : grads.tensors) {
      for (auto& v : t.v) v *= inv_used;
    }
    const double loss = total.loss_sum / used;  // mean of per-sample means
    if (!std::isfinite(loss)) {
      raise(ErrorCode::NumericFailure,
            "training diverged at step " + std::to_string(step) +
                "; last checkpoint retained");
    }

    const double lr = one_cycle_lr(step, config);
    optimizer.step(weights, grads, lr, config.weight_decay, config.beta1, config.beta2);

    LossReport report;
    report.step = step;
    report.lr = lr;
    report.loss = loss;
    report.delta1 = static_cast<double>(total.hits1) / static_cast<double>(total.terms);
    report.delta4 = static_cast<double>(total.hits4) / static_cast<double>(total.terms);
    result.log.push_back(report);
    if (log_csv) {
      log_csv << report.step << "," << format_g9(report.lr) << "," << format_g9(report.loss)
              << "," << format_g9(report.delta1) << "," << format_g9(report.delta4) << "\n";
    }

    if (loss < result.best_loss) {
      result.best_loss = loss;
      result.best_step = step;
      result.best_weights = weights;
      if (!options.checkpoint_dir.empty()) {
        net::save_checkpoint(weights, (fs::path(options.checkpoint_dir) / "best.ckpt").string());
      }
    }
    const bool last_step = step + 1 == config.total_steps;
    if (!options.checkpoint_dir.empty() &&
        (last_step || (step + 1) % config.checkpoint_interval == 0)) {
      net::save_checkpoint(weights, (fs::path(options.checkpoint_dir) / "last.ckpt").string());
    }
  }
  result.final_weights = weights;
  if (result.best_step < 0) result.best_weights = weights;
  return result;
}

GradCheckReport gradient_check(uint64_t seed, int min_params, double fd_step) {
  const auto t0 = std::chrono::steady_clock::now();

  net::EncoderConfig cfg = net::EncoderConfig::tiny_test();
  cfg.weight_seed = derive_seed(seed, 0x717e);
  net::ParamSet<double> params = net::cast_params<double>(net::init_weights(cfg));

  // Tiny sample: 3 frames of drifting speckle at R = 32, two subpixel queries.
  synth::SpeckleParams speckle;
  speckle.noise_seed = derive_seed(seed, 0x57ec);
  speckle.smoothing_sigma = 1.2;
  speckle.additive_noise_sigma = 0.0;
  speckle.multiplicative_noise_sigma = 0.0;
  const auto texture = synth::gen_speckle_image(speckle, 32, 32);
  std::vector<Affine> motions;
  for (int t = 0; t < 3; ++t) {
    motions.push_back(Affine::translation(0.6 * t, -0.4 * t));
  }
  auto [video, trajs] =
      synth::render_sequence(texture, 32, 32, motions, speckle,
                             {{13.3, 17.6}, {20.1, 11.4}}, 1);
  TrainSample sample{std::move(video), std::move(trajs)};

  constexpr double kGamma = 15.0;
  constexpr double kRadius = 5.0;
  net::ParamSet<double> grads = net::make_param_layout<double>(cfg);
  pipeline_run<double>(sample, params, kGamma, kRadius, 1.0, &grads);

  auto loss_at = [&]() {
    return pipeline_run<double>(sample, params, kGamma, kRadius, 1.0, nullptr).loss();
  };

  // Round-robin over tensors so every layer type is covered.
  Rng rng(derive_seed(seed, 0xfd));
  GradCheckReport report;
  const int tensor_count = static_cast<int>(params.tensors.size());
  int round = 0;
  while (report.params_checked < min_params || round == 0) {
    for (int i = 0; i < tensor_count; ++i) {
      auto& tensor = params.tensors[i];
      const size_t k = rng.uniform_index(tensor.v.size());
      const double saved = tensor.v[k];
      tensor.v[k] = saved + fd_step;
      const double up = loss_at();
      tensor.v[k] = saved - fd_step;
      const double down = loss_at();
      tensor.v[k] = saved;
      const double numeric = (up - down) / (2.0 * fd_step);
      const double analytic = grads.tensors[i].v[k];
      const double rel =
          std::abs(analytic - numeric) / (std::max(std::abs(analytic), std::abs(numeric)) + 1e-6);
      report.entries.push_back({tensor.name, k, analytic, numeric, rel});
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.params_checked;
    }
    ++round;
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

TrainConfig train_config_from_json(const std::string& json_text, const std::string& context) {
  JsonReader r(parse_json(json_text, context), context);
  TrainConfig c;
  c.peak_lr = r.get("peak_lr", c.peak_lr);
  c.total_steps = r.get("total_steps", c.total_steps);
  c.warmup_fraction = r.get("warmup_fraction", c.warmup_fraction);
  c.final_lr_divisor = r.get("final_lr_divisor", c.final_lr_divisor);
  c.weight_decay = r.get("weight_decay", c.weight_decay);
  c.beta1 = r.get("beta1", c.beta1);
  c.beta2 = r.get("beta2", c.beta2);
  c.batch_size = r.get("batch_size", c.batch_size);
  c.points_per_sample = r.get("points_per_sample", c.points_per_sample);
  c.seed = r.get("seed", c.seed);
  c.threads = r.get("threads", c.threads);
  c.checkpoint_interval = r.get("checkpoint_interval", c.checkpoint_interval);
  c.gamma = r.get("gamma", c.gamma);
  c.soft_radius = r.get("soft_radius", c.soft_radius);
  c.enable_affine = r.get("enable_affine", c.enable_affine);
  c.enable_photometric = r.get("enable_photometric", c.enable_photometric);
  if (r.has("augmentation")) {
    c.aug = aug::aug_config_from_json(r.raw("augmentation").dump(), context + ".augmentation");
  }
  if (r.has("encoder")) {
    JsonReader er(r.raw("encoder"), context + ".encoder");
    auto ch = er.get<std::vector<int>>("channels",
                                       {c.encoder.channels.begin(), c.encoder.channels.end()});
    if (ch.size() != 4) raise(ErrorCode::InvalidConfig, "encoder.channels needs 4 entries");
    std::copy(ch.begin(), ch.end(), c.encoder.channels.begin());
    c.encoder.working_resolution = er.get("working_resolution", c.encoder.working_resolution);
    c.encoder.weight_seed = er.get("weight_seed", c.encoder.weight_seed);
    er.finish();
  }
  r.finish();
  c.validate();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["peak_lr"] = c.peak_lr;
  j["total_steps"] = c.total_steps;
  j["warmup_fraction"] = c.warmup_fraction;
  j["final_lr_divisor"] = c.final_lr_divisor;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["batch_size"] = c.batch_size;
  j["points_per_sample"] = c.points_per_sample;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["gamma"] = c.gamma;
  j["soft_radius"] = c.soft_radius;
  j["enable_affine"] = c.enable_affine;
  j["enable_photometric"] = c.enable_photometric;
  j["augmentation"] = nlohmann::json::parse(aug::aug_config_to_json(c.aug));
  j["encoder"] = {{"channels", c.encoder.channels},
                  {"working_resolution", c.encoder.working_resolution},
                  {"weight_seed", c.encoder.weight_seed}};
  return j.dump(2);
}

}  // namespace specktrack::train
