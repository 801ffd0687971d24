// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flipnerf/dataio.hpp"
#include "flipnerf/field.hpp"
#include "flipnerf/geometry.hpp"
#include "flipnerf/renderer.hpp"

namespace flipnerf {

/// The five experiment settings: inputs only, inputs with uncertainty,
/// inputs plus flipped views with pose refinement, the same with uncertainty
/// on the flipped views, and inputs plus ground-truth opposite views.
enum class Mode { Baseline, BaselineU, Flip, FlipU, Upper };

const char* to_string(Mode m);
/// Accepts both "flip-u" and "flip_u" spellings.
Mode parse_mode(std::string_view s);

struct TrainConfig {
  Mode mode = Mode::FlipU;
  int n_samples = 128;
  double reg_weight = 0.01;
  double beta_min_sq = 0.01;
  int warmup_iters = 500;
  int total_iters = 2500;
  double lr_field = 0.1;
  double lr_pose = 1e-3;
  int rays_per_batch = 1024;
  std::uint64_t seed = 0;
  int grid_resolution = 64;
  Vec3 bounds_lo = Vec3::Constant(-1.0);
  Vec3 bounds_hi = Vec3::Constant(1.0);
  double t_near = 2.0;
  double t_far = 6.0;
  Vec3 background = Vec3::Ones();
  VarianceWeighting weighting = VarianceWeighting::Squared;
  /// In flip-u's uncertainty phase, score input rays as Gaussians with the
  /// variance held at beta_min_sq instead of by the plain squared error.
  bool inputs_at_beta_min = true;
  double init_density_raw = 0.0;
  int log_every = 100;

  void validate() const;
  RenderConfig render_config(bool stratified) const;
};

struct LossBreakdown {
  double photometric_in = 0.0;  // rays of non-flipped observations
  double flipped_term = 0.0;    // data term of flipped rays (photometric or NLL)
  double regularizer = 0.0;     // density penalty of the NLL rays
  double total = 0.0;
};

/// Sum of squared channel differences over all pixels.
double photometric_loss(std::span<const Vec3> rendered, std::span<const Vec3> target);

/// Negative log-likelihood of one ray under a Gaussian with variance
/// `variance`, plus reg_weight / n_samples * sum(densities).
double uncertainty_ray_loss(const Vec3& rendered, double variance, const Vec3& target,
                            std::span<const double> densities, double reg_weight, int n_samples);

struct UncertainRay {
  Vec3 rendered;
  double variance = 0.0;
  Vec3 target;
  std::vector<double> densities;
};

/// Batch sum of uncertainty_ray_loss.
double uncertainty_loss(std::span<const UncertainRay> rays, double reg_weight, int n_samples);

/// Adam with bias correction over a flat parameter vector.
struct Adam {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t steps = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void resize(std::size_t n) { m.assign(n, 0.0); v.assign(n, 0.0); }
  /// params -= lr * m_hat / (sqrt(v_hat) + eps); entries whose moments are
  /// still exactly zero are left untouched.
  void step(std::span<double> params, std::span<const double> grad, double lr);
};

struct RayRef {
  int observation = 0;
  int u = 0;
  int v = 0;
  std::uint64_t id = 0;  // keys the stratified jitter
};

struct LossRecord {
  int iteration = 0;
  LossBreakdown loss;
};

struct TrainState {
  FieldParams field;
  std::vector<Observation> observations;
  std::vector<int> trainable;  // indices of pose_trainable observations
  std::vector<Twist> twists;   // pending update per trainable pose; folded in and zeroed every step
  int iteration = 0;
  Adam field_opt;
  Adam pose_opt;
  std::vector<LossRecord> history;

  // Epoch-wise sampling without replacement over every (observation, pixel).
  std::vector<std::uint32_t> permutation;
  std::size_t cursor = 0;
  std::uint64_t epoch = 0;
};

TrainState init_state(std::vector<Observation> observations, const TrainConfig& cfg);

enum class RayLoss {
  Photometric,    // squared error
  FixedVariance,  // squared error / (2 beta_min_sq)
  Uncertain,      // NLL with the rendered variance plus the density regularizer
};

RayLoss ray_loss(const TrainConfig& cfg, int iteration, const Observation& obs);

/// True when the NLL loss applies to rays of this observation at this iteration.
bool uses_uncertainty(const TrainConfig& cfg, int iteration, const Observation& obs);

std::vector<RayRef> sample_batch(TrainState& state, const TrainConfig& cfg);

struct BatchResult {
  LossBreakdown loss;
  std::vector<double> field_grad;  // dense, same layout as FieldParams::data()
  std::vector<Twist> twist_grads;  // one per trainable observation
};

BatchResult batch_loss(const TrainState& state, std::span<const RayRef> batch, const TrainConfig& cfg);

/// Applies one optimizer update from a computed batch result and advances the iteration.
void apply_update(TrainState& state, const BatchResult& result, const TrainConfig& cfg);

/// batch_loss + apply_update on a caller-chosen batch; returns the pre-update loss.
LossBreakdown step_on_batch(TrainState& state, std::span<const RayRef> batch, const TrainConfig& cfg);

/// Samples a batch and performs one step. Throws NumericFailure on non-finite loss.
LossBreakdown train_step(TrainState& state, const TrainConfig& cfg);

/// How the mirror plane for flipped poses is chosen.
struct PlaneChoice {
  enum class Kind { Auto, Geometric, Explicit } kind = Kind::Auto;
  Plane plane;

  /// "auto" (scene-declared plane, else geometric), "geometric", "x=0",
  /// "y=0", "z=0", or "a,b,c,d" for a x + b y + c z + d = 0.
  static PlaneChoice parse(std::string_view s);
  std::optional<Plane> resolve(const Dataset& ds) const;
  std::string describe() const;
};

struct ScheduleOptions {
  int config_n = 1;
  PlaneChoice plane;
  /// Rotates each flipped pose's initial estimate by this angle about a random axis.
  double pose_noise_deg = 0.0;
  /// Progress callback invoked after every step (may be empty).
  std::function<void(int, const LossBreakdown&)> on_step;
};

/// Observation roster for a mode, plus the noise-free flipped estimates.
struct Roster {
  std::vector<Observation> observations;
  std::vector<Pose> flipped_estimates;
  std::optional<Plane> plane;
};

Roster assemble_observations(const Dataset& ds, Mode mode, const ScheduleOptions& opts,
                             const TrainConfig& cfg);

struct RunResult {
  TrainState state;
  Roster roster;
  nlohmann::json manifest;
};

RunResult run_schedule(const Dataset& ds, const ScheduleOptions& opts, const TrainConfig& cfg);

/// Writes field.ckpt and manifest.json into dir.
void save_run(const RunResult& run, const std::filesystem::path& dir);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

}  // namespace flipnerf
