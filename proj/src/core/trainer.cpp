// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#include "flipnerf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "flipnerf/error.hpp"
#include "flipnerf/parallel.hpp"
#include "flipnerf/rng.hpp"

namespace flipnerf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RayWork {
  LossBreakdown loss;
  std::vector<RawGradient> grads;
  Twist pose_grad = Twist::Zero();
};

struct SampleCache {
  std::vector<RaySample> samples;
  std::vector<Stencil> stencils;
  std::vector<std::array<double, kRawChannels>> raws;
  std::vector<char> inside;
};

double background_variance(double trans, double beta_min_sq, VarianceWeighting w) {
  return (w == VarianceWeighting::Squared ? trans * trans : trans) * beta_min_sq;
}

double background_variance_slope(double trans, double beta_min_sq, VarianceWeighting w) {
  return (w == VarianceWeighting::Squared ? 2.0 * trans : 1.0) * beta_min_sq;
}

// Forward and backward pass for one training ray. Loss terms are written to
// work.loss; per-sample raw gradients and (for trainable poses) the twist
// gradient are accumulated in work.
void process_ray(const TrainState& state, const TrainConfig& cfg, const RayRef& ref, RayLoss kind,
                 bool trainable, SampleCache& cache, RayWork& work) {
  const Observation& obs = state.observations[static_cast<size_t>(ref.observation)];
  Ray ray;
  ray.origin = obs.pose.translation;
  ray.direction = (obs.pose.rotation * camera_direction(obs.intr, ref.u, ref.v)).normalized();
  ray.t_near = cfg.t_near;
  ray.t_far = cfg.t_far;
  const RayDepths depths = sample_ray(ray, cfg.n_samples, true, cfg.seed, ref.id);
  const size_t n = depths.t.size();

  cache.samples.resize(n);
  cache.stencils.resize(n);
  cache.raws.resize(n);
  cache.inside.assign(n, 0);
  double density_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    RaySample& s = cache.samples[i];
    s.t = depths.t[i];
    s.delta = depths.delta[i];
    s.sample = FieldSample{Vec3::Zero(), 0.0, cfg.beta_min_sq};
    const Vec3 x = ray.origin + s.t * ray.direction;
    if (!locate(state.field, x, cache.stencils[i])) continue;
    cache.inside[i] = 1;
    const auto& r = cache.raws[i] = interpolate_raw(state.field, cache.stencils[i]);
    s.sample.density = softplus(r[kSigma]);
    s.sample.color = {sigmoid(r[kRed]), sigmoid(r[kGreen]), sigmoid(r[kBlue])};
    s.sample.variance = cfg.beta_min_sq + softplus(r[kBeta]);
    density_sum += s.sample.density;
  }
  const RenderOutput out = composite(cache.samples, cfg.weighting);
  const Vec3 rendered = out.color + out.transmittance * cfg.background;
  Vec3 target;
  for (int c = 0; c < 3; ++c) target[c] = obs.image.at(ref.u, ref.v, c);
  const Vec3 resid = rendered - target;
  const double r2 = resid.squaredNorm();

  Vec3 d_rendered;
  double d_var = 0.0;
  double d_trans = 0.0;
  double reg_slope = 0.0;
  if (kind == RayLoss::Uncertain) {
    const double var = out.variance + background_variance(out.transmittance, cfg.beta_min_sq, cfg.weighting);
    if (!(var > 0.0)) throw Error(ErrorKind::NonpositiveVariance, "rendered variance is not positive");
    const double data = r2 / (2.0 * var) + 0.5 * std::log(var);
    const double reg = cfg.reg_weight / cfg.n_samples * density_sum;
    (obs.is_flipped ? work.loss.flipped_term : work.loss.photometric_in) += data;
    work.loss.regularizer += reg;
    d_rendered = resid / var;
    d_var = -r2 / (2.0 * var * var) + 0.5 / var;
    d_trans = d_var * background_variance_slope(out.transmittance, cfg.beta_min_sq, cfg.weighting);
    reg_slope = cfg.reg_weight / cfg.n_samples;
  } else {
    const double scale = kind == RayLoss::FixedVariance ? 0.5 / cfg.beta_min_sq : 1.0;
    (obs.is_flipped ? work.loss.flipped_term : work.loss.photometric_in) += scale * r2;
    d_rendered = 2.0 * scale * resid;
  }
  d_trans += d_rendered.dot(cfg.background);

  const CompositeGrad g = composite_grad(cache.samples, d_rendered, d_var, d_trans, cfg.weighting);
  Vec3 g_rot = Vec3::Zero();
  Vec3 g_trans = Vec3::Zero();
  for (size_t i = 0; i < n; ++i) {
    if (!cache.inside[i]) continue;
    FieldSampleGrad up;
    up.color = g.color[i];
    up.density = g.density[i] + reg_slope;
    up.variance = g.variance[i];
    if (up.is_zero()) continue;
    RawGradient rg;
    rg.stencil = cache.stencils[i];
    const Vec3 dx = backprop_activations(state.field, rg.stencil, cache.raws[i], up, rg.raw);
    work.grads.push_back(rg);
    if (trainable) {
      // x = o + t d moves as w x x + v under a left twist (w, v).
      const Vec3 x = ray.origin + cache.samples[i].t * ray.direction;
      g_rot += x.cross(dx);
      g_trans += dx;
    }
  }
  if (trainable) {
    work.pose_grad.head<3>() += g_rot;
    work.pose_grad.tail<3>() += g_trans;
  }
}

Observation observation_from_view(const View& v, std::string label) {
  Observation o;
  o.image = v.image;
  o.pose = v.pose;
  o.intr = v.intr;
  o.label = std::move(label);
  return o;
}

std::string two_digits(int i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

json loss_json(const LossBreakdown& l) {
  return json{{"photometric_in", l.photometric_in},
              {"flipped_term", l.flipped_term},
              {"regularizer", l.regularizer},
              {"total", l.total}};
}

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Baseline: return "baseline";
    case Mode::BaselineU: return "baseline-u";
    case Mode::Flip: return "flip";
    case Mode::FlipU: return "flip-u";
    case Mode::Upper: return "upper";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::Baseline;
  if (s == "baseline-u" || s == "baseline_u") return Mode::BaselineU;
  if (s == "flip") return Mode::Flip;
  if (s == "flip-u" || s == "flip_u") return Mode::FlipU;
  if (s == "upper") return Mode::Upper;
  throw Error(ErrorKind::UnknownMode, "unknown mode '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  if (warmup_iters < 0 || total_iters < 0 || warmup_iters > total_iters) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= warmup_iters <= total_iters");
  }
  if (lr_field < 0.0 || lr_pose < 0.0) throw Error(ErrorKind::InvalidArgument, "learning rates must be >= 0");
  if (rays_per_batch < 1) throw Error(ErrorKind::InvalidArgument, "rays_per_batch must be >= 1");
  if (!(beta_min_sq > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta_min_sq must be positive");
  if (reg_weight < 0.0) throw Error(ErrorKind::InvalidArgument, "reg_weight must be >= 0");
  if (grid_resolution < 2) throw Error(ErrorKind::InvalidArgument, "grid resolution must be >= 2");
  if (!(t_near >= 0.0 && t_near < t_far)) throw Error(ErrorKind::InvalidArgument, "need 0 <= t_near < t_far");
}

RenderConfig TrainConfig::render_config(bool stratified) const {
  RenderConfig rc;
  rc.n_samples = n_samples;
  rc.t_near = t_near;
  rc.t_far = t_far;
  rc.stratified = stratified;
  rc.seed = seed;
  rc.background = background;
  rc.beta_min_sq = beta_min_sq;
  rc.weighting = weighting;
  return rc;
}

double photometric_loss(std::span<const Vec3> rendered, std::span<const Vec3> target) {
  if (rendered.size() != target.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(rendered.size()) + " rendered pixels vs " +
                                               std::to_string(target.size()) + " targets");
  }
  double sum = 0.0;
  for (size_t i = 0; i < rendered.size(); ++i) sum += (target[i] - rendered[i]).squaredNorm();
  return sum;
}

double uncertainty_ray_loss(const Vec3& rendered, double variance, const Vec3& target,
                            std::span<const double> densities, double reg_weight, int n_samples) {
  if (!(variance > 0.0)) throw Error(ErrorKind::NonpositiveVariance, "variance must be positive");
  const double reg = reg_weight / n_samples * std::accumulate(densities.begin(), densities.end(), 0.0);
  return (target - rendered).squaredNorm() / (2.0 * variance) + 0.5 * std::log(variance) + reg;
}

double uncertainty_loss(std::span<const UncertainRay> rays, double reg_weight, int n_samples) {
  double sum = 0.0;
  for (const auto& r : rays) {
    sum += uncertainty_ray_loss(r.rendered, r.variance, r.target, r.densities, reg_weight, n_samples);
  }
  return sum;
}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (m.size() != params.size()) resize(params.size());
  ++steps;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  const double step_size = lr / bc1;
  const double inv_bc2 = 1.0 / bc2;
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (g == 0.0 && m[i] == 0.0 && v[i] == 0.0) continue;
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    params[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
  }
}

TrainState init_state(std::vector<Observation> observations, const TrainConfig& cfg) {
  cfg.validate();
  if (observations.empty()) throw Error(ErrorKind::EmptySplit, "no observations to train on");
  TrainState st;
  st.field = FieldParams({cfg.grid_resolution, cfg.grid_resolution, cfg.grid_resolution}, cfg.bounds_lo,
                         cfg.bounds_hi);
  st.field.fill(kSigma, cfg.init_density_raw);
  for (size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    o.intr.validate();
    if (o.image.width != o.intr.width || o.image.height != o.intr.height || o.image.channels != 3) {
      throw Error(ErrorKind::DimensionMismatch, "observation '" + o.label + "' image does not match intrinsics");
    }
    if (o.pose_trainable && !o.is_flipped) {
      throw Error(ErrorKind::InvalidArgument, "only flipped observations may have trainable poses");
    }
    if (o.pose_trainable) st.trainable.push_back(static_cast<int>(i));
  }
  st.observations = std::move(observations);
  st.twists.assign(st.trainable.size(), Twist::Zero());
  st.field_opt.resize(st.field.parameter_count());
  st.pose_opt.resize(6 * st.trainable.size());
  return st;
}

RayLoss ray_loss(const TrainConfig& cfg, int iteration, const Observation& obs) {
  if (iteration < cfg.warmup_iters) return RayLoss::Photometric;
  switch (cfg.mode) {
    case Mode::BaselineU:
      return RayLoss::Uncertain;
    case Mode::FlipU:
      if (obs.is_flipped) return RayLoss::Uncertain;
      return cfg.inputs_at_beta_min ? RayLoss::FixedVariance : RayLoss::Photometric;
    default:
      return RayLoss::Photometric;
  }
}

bool uses_uncertainty(const TrainConfig& cfg, int iteration, const Observation& obs) {
  return ray_loss(cfg, iteration, obs) == RayLoss::Uncertain;
}

std::vector<RayRef> sample_batch(TrainState& state, const TrainConfig& cfg) {
  std::vector<std::uint64_t> prefix(state.observations.size() + 1, 0);
  for (size_t i = 0; i < state.observations.size(); ++i) {
    prefix[i + 1] = prefix[i] + state.observations[i].image.pixel_count();
  }
  const std::uint64_t universe = prefix.back();
  const CounterRng rng{cfg.seed};
  std::vector<RayRef> batch;
  batch.reserve(static_cast<size_t>(cfg.rays_per_batch));
  for (int slot = 0; slot < cfg.rays_per_batch; ++slot) {
    if (state.permutation.size() != universe || state.cursor >= universe) {
      state.permutation.resize(universe);
      std::iota(state.permutation.begin(), state.permutation.end(), 0u);
      const std::uint64_t stream = CounterRng::mix(state.epoch) ^ kStreamShuffle;
      for (std::uint64_t i = universe - 1; i > 0; --i) {
        std::swap(state.permutation[i], state.permutation[rng.below(stream, i, i + 1)]);
      }
      state.cursor = 0;
      ++state.epoch;
    }
    const std::uint64_t p = state.permutation[state.cursor++];
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), p);
    const auto obs = static_cast<size_t>(std::distance(prefix.begin(), it) - 1);
    const std::uint64_t local = p - prefix[obs];
    const int w = state.observations[obs].image.width;
    RayRef ref;
    ref.observation = static_cast<int>(obs);
    ref.u = static_cast<int>(local % static_cast<std::uint64_t>(w));
    ref.v = static_cast<int>(local / static_cast<std::uint64_t>(w));
    ref.id = static_cast<std::uint64_t>(state.iteration) * static_cast<std::uint64_t>(cfg.rays_per_batch) +
             static_cast<std::uint64_t>(slot);
    batch.push_back(ref);
  }
  return batch;
}

BatchResult batch_loss(const TrainState& state, std::span<const RayRef> batch, const TrainConfig& cfg) {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty ray batch");
  std::vector<int> slot_of(state.observations.size(), -1);
  for (size_t k = 0; k < state.trainable.size(); ++k) slot_of[static_cast<size_t>(state.trainable[k])] = static_cast<int>(k);

  std::vector<RayWork> work(batch.size());
  parallel_for(batch.size(), [&](size_t begin, size_t end) {
    SampleCache cache;
    for (size_t r = begin; r < end; ++r) {
      const RayRef& ref = batch[r];
      const Observation& obs = state.observations[static_cast<size_t>(ref.observation)];
      process_ray(state, cfg, ref, ray_loss(cfg, state.iteration, obs), slot_of[static_cast<size_t>(ref.observation)] >= 0, cache, work[r]);
    }
  });

  // Reduction in ray order keeps results independent of the thread count.
  BatchResult out;
  out.field_grad.assign(state.field.parameter_count(), 0.0);
  out.twist_grads.assign(state.trainable.size(), Twist::Zero());
  for (size_t r = 0; r < batch.size(); ++r) {
    const RayWork& w = work[r];
    out.loss.photometric_in += w.loss.photometric_in;
    out.loss.flipped_term += w.loss.flipped_term;
    out.loss.regularizer += w.loss.regularizer;
    for (const auto& g : w.grads) scatter_raw_gradient(state.field, g, out.field_grad);
    const int slot = slot_of[static_cast<size_t>(batch[r].observation)];
    if (slot >= 0) out.twist_grads[static_cast<size_t>(slot)] += w.pose_grad;
  }
  out.loss.total = out.loss.photometric_in + out.loss.flipped_term + out.loss.regularizer;
  return out;
}

void apply_update(TrainState& state, const BatchResult& result, const TrainConfig& cfg) {
  if (cfg.lr_field > 0.0) state.field_opt.step(state.field.data(), result.field_grad, cfg.lr_field);
  if (cfg.lr_pose > 0.0 && !state.trainable.empty()) {
    const size_t k = state.trainable.size();
    std::vector<double> params(6 * k);
    std::vector<double> grads(6 * k);
    // Adam runs on (w, u) with u the velocity of the camera center c; the
    // world twist is (w, u - w x c), so w alone rotates about the camera.
    for (size_t i = 0; i < k; ++i) {
      const Vec3 c = state.observations[static_cast<size_t>(state.trainable[i])].pose.translation;
      const Vec3 gw = result.twist_grads[i].head<3>();
      const Vec3 gv = result.twist_grads[i].tail<3>();
      Twist local;
      local << gw - c.cross(gv), gv;
      for (int j = 0; j < 6; ++j) {
        params[6 * i + static_cast<size_t>(j)] = 0.0;
        grads[6 * i + static_cast<size_t>(j)] = local[j];
      }
    }
    state.pose_opt.step(params, grads, cfg.lr_pose);
    for (size_t i = 0; i < k; ++i) {
      auto& obs = state.observations[static_cast<size_t>(state.trainable[i])];
      const Vec3 w(params[6 * i], params[6 * i + 1], params[6 * i + 2]);
      const Vec3 u(params[6 * i + 3], params[6 * i + 4], params[6 * i + 5]);
      state.twists[i] << w, u - w.cross(obs.pose.translation);
      obs.pose = se3_apply_twist(obs.pose, state.twists[i]);
      state.twists[i].setZero();
    }
  }
  ++state.iteration;
}

LossBreakdown step_on_batch(TrainState& state, std::span<const RayRef> batch, const TrainConfig& cfg) {
  const BatchResult res = batch_loss(state, batch, cfg);
  if (!std::isfinite(res.loss.total)) throw NumericFailure(state.iteration, "non-finite training loss");
  const int it = state.iteration;
  if (cfg.log_every > 0 && (it % cfg.log_every == 0 || it + 1 == cfg.total_iters)) {
    state.history.push_back({it, res.loss});
  }
  apply_update(state, res, cfg);
  return res.loss;
}

LossBreakdown train_step(TrainState& state, const TrainConfig& cfg) {
  const auto batch = sample_batch(state, cfg);
  return step_on_batch(state, batch, cfg);
}

PlaneChoice PlaneChoice::parse(std::string_view s) {
  PlaneChoice c;
  if (s == "auto") return c;
  if (s == "geometric") {
    c.kind = Kind::Geometric;
    return c;
  }
  auto number = [&](std::string_view t) {
    double v = 0.0;
    const auto* b = t.data();
    const auto* e = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) {
      throw Error(ErrorKind::InvalidArgument, "bad number '" + std::string(t) + "' in plane spec");
    }
    return v;
  };
  c.kind = Kind::Explicit;
  if (s.size() >= 3 && s[1] == '=' && (s[0] == 'x' || s[0] == 'y' || s[0] == 'z')) {
    Vec3 n = Vec3::Zero();
    n[s[0] - 'x'] = 1.0;
    c.plane = Plane{n, number(s.substr(2))};
    return c;
  }
  std::vector<double> coef;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const auto tok = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    coef.push_back(number(tok));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (coef.size() != 4) {
    throw Error(ErrorKind::InvalidArgument,
                "plane must be auto, geometric, x=c, y=c, z=c or a,b,c,d; got '" + std::string(s) + "'");
  }
  c.plane = Plane::from_coefficients(coef[0], coef[1], coef[2], coef[3]);
  return c;
}

std::optional<Plane> PlaneChoice::resolve(const Dataset& ds) const {
  switch (kind) {
    case Kind::Auto: return ds.declared_mirror;
    case Kind::Geometric: return std::nullopt;
    case Kind::Explicit: return ds.normalization.apply(plane);
  }
  return std::nullopt;
}

std::string PlaneChoice::describe() const {
  switch (kind) {
    case Kind::Auto: return "auto";
    case Kind::Geometric: return "geometric";
    case Kind::Explicit: return "explicit";
  }
  return "?";
}

Roster assemble_observations(const Dataset& ds, Mode mode, const ScheduleOptions& opts, const TrainConfig& cfg) {
  Roster roster;
  const auto inputs = views_for(ds, Split::Train, opts.config_n);
  const auto cfg_idx = make_config(opts.config_n).indices;
  for (size_t k = 0; k < inputs.size(); ++k) {
    roster.observations.push_back(observation_from_view(inputs[k], "ring_" + two_digits(cfg_idx[k])));
  }
  if (mode == Mode::Flip || mode == Mode::FlipU) {
    std::vector<Pose> poses;
    for (const auto& o : roster.observations) poses.push_back(o.pose);
    roster.plane = opts.plane.resolve(ds);
    if (!roster.plane) {
      std::vector<Vec3> centers;
      for (const auto& p : poses) centers.push_back(p.translation);
      roster.plane = default_symmetry_plane(poses, fit_sphere(centers));
    }
    roster.flipped_estimates = estimate_flipped_poses(poses, roster.plane);
    const CounterRng rng{cfg.seed};
    const size_t n_inputs = roster.observations.size();
    for (size_t k = 0; k < n_inputs; ++k) {
      Observation f = flip_observation(roster.observations[k]);
      f.pose = roster.flipped_estimates[k];
      if (opts.pose_noise_deg != 0.0) {
        const double z = 2.0 * rng.uniform(kStreamPoseNoise, 2 * k) - 1.0;
        const double phi = 2.0 * M_PI * rng.uniform(kStreamPoseNoise, 2 * k + 1);
        const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 axis(rxy * std::cos(phi), rxy * std::sin(phi), z);
        f.pose.rotation = f.pose.rotation * so3_exp(axis * (opts.pose_noise_deg * M_PI / 180.0));
      }
      roster.observations.push_back(std::move(f));
    }
  } else if (mode == Mode::Upper) {
    const auto upper = views_for(ds, Split::Upper, opts.config_n);
    for (size_t k = 0; k < upper.size(); ++k) {
      roster.observations.push_back(observation_from_view(upper[k], "upper_" + two_digits(static_cast<int>(k) + 1)));
    }
  }
  return roster;
}

json pose_to_json(const Pose& p) {
  const Mat4 m = p.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return rows;
}

Pose pose_from_json(const json& j) {
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = j.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
  }
  return Pose::from_matrix(m);
}

json config_to_json(const TrainConfig& cfg) {
  auto vec = [](const Vec3& v) { return json{v.x(), v.y(), v.z()}; };
  return json{{"mode", to_string(cfg.mode)},
              {"n_samples", cfg.n_samples},
              {"reg_weight", cfg.reg_weight},
              {"beta_min_sq", cfg.beta_min_sq},
              {"warmup_iters", cfg.warmup_iters},
              {"total_iters", cfg.total_iters},
              {"lr_field", cfg.lr_field},
              {"lr_pose", cfg.lr_pose},
              {"rays_per_batch", cfg.rays_per_batch},
              {"seed", cfg.seed},
              {"grid_resolution", cfg.grid_resolution},
              {"bounds_lo", vec(cfg.bounds_lo)},
              {"bounds_hi", vec(cfg.bounds_hi)},
              {"t_near", cfg.t_near},
              {"t_far", cfg.t_far},
              {"background", vec(cfg.background)},
              {"variance_weighting", cfg.weighting == VarianceWeighting::Squared ? "squared" : "linear"},
              {"inputs_at_beta_min", cfg.inputs_at_beta_min},
              {"init_density_raw", cfg.init_density_raw},
              {"log_every", cfg.log_every}};
}

TrainConfig config_from_json(const json& j) {
  auto vec = [](const json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
  TrainConfig c;
  try {
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.n_samples = j.at("n_samples").get<int>();
    c.reg_weight = j.at("reg_weight").get<double>();
    c.beta_min_sq = j.at("beta_min_sq").get<double>();
    c.warmup_iters = j.at("warmup_iters").get<int>();
    c.total_iters = j.at("total_iters").get<int>();
    c.lr_field = j.at("lr_field").get<double>();
    c.lr_pose = j.at("lr_pose").get<double>();
    c.rays_per_batch = j.at("rays_per_batch").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.grid_resolution = j.at("grid_resolution").get<int>();
    c.bounds_lo = vec(j.at("bounds_lo"));
    c.bounds_hi = vec(j.at("bounds_hi"));
    c.t_near = j.at("t_near").get<double>();
    c.t_far = j.at("t_far").get<double>();
    c.background = vec(j.at("background"));
    c.weighting = j.at("variance_weighting").get<std::string>() == "linear" ? VarianceWeighting::Linear
                                                                           : VarianceWeighting::Squared;
    c.inputs_at_beta_min = j.value("inputs_at_beta_min", true);
    c.init_density_raw = j.value("init_density_raw", 0.0);
    c.log_every = j.value("log_every", 100);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedTransforms, std::string("run manifest config: ") + e.what());
  }
  return c;
}

RunResult run_schedule(const Dataset& ds, const ScheduleOptions& opts, const TrainConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult run;
  run.roster = assemble_observations(ds, cfg.mode, opts, cfg);
  run.state = init_state(run.roster.observations, cfg);
  while (run.state.iteration < cfg.total_iters) {
    const int it = run.state.iteration;
    const LossBreakdown loss = train_step(run.state, cfg);
    if (opts.on_step) opts.on_step(it, loss);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json m;
  m["format"] = "flipnerf-run";
  m["version"] = 1;
  m["mode"] = to_string(cfg.mode);
  m["config_n"] = opts.config_n;
  m["seed"] = cfg.seed;
  m["config"] = config_to_json(cfg);
  m["scene"] = ds.scene_name;
  m["normalization"] = {{"scale", ds.normalization.scale},
                        {"offset", {ds.normalization.offset.x(), ds.normalization.offset.y(), ds.normalization.offset.z()}}};
  m["plane_choice"] = opts.plane.describe();
  if (run.roster.plane) {
    const auto& p = *run.roster.plane;
    m["plane"] = {{"normal", {p.normal.x(), p.normal.y(), p.normal.z()}}, {"offset", p.offset}};
  } else {
    m["plane"] = nullptr;
  }
  m["pose_noise_deg"] = opts.pose_noise_deg;
  m["observations"] = json::array();
  for (size_t i = 0; i < run.state.observations.size(); ++i) {
    const auto& o = run.state.observations[i];
    m["observations"].push_back({{"index", i},
                                 {"label", o.label},
                                 {"is_flipped", o.is_flipped},
                                 {"pose_trainable", o.pose_trainable},
                                 {"intrinsics",
                                  {{"width", o.intr.width},
                                   {"height", o.intr.height},
                                   {"focal", o.intr.focal},
                                   {"cx", o.intr.cx},
                                   {"cy", o.intr.cy}}},
                                 {"initial_pose", pose_to_json(run.roster.observations[i].pose)},
                                 {"final_pose", pose_to_json(o.pose)}});
  }
  m["observation_count"] = run.state.observations.size();
  m["trainable_pose_count"] = run.state.trainable.size();
  m["flipped_estimates"] = json::array();
  for (const auto& p : run.roster.flipped_estimates) m["flipped_estimates"].push_back(pose_to_json(p));
  m["loss_history"] = json::array();
  for (const auto& rec : run.state.history) {
    json e = loss_json(rec.loss);
    e["iteration"] = rec.iteration;
    m["loss_history"].push_back(e);
  }
  m["final"] = {{"iterations", run.state.iteration},
                {"loss", run.state.history.empty() ? json(nullptr) : loss_json(run.state.history.back().loss)}};
  m["checkpoint"] = "field.ckpt";
  m["wall_clock_s"] = wall;
  run.manifest = std::move(m);
  return run;
}

void save_run(const RunResult& run, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  save_checkpoint(run.state.field, dir / "field.ckpt");
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir / "manifest.json").string());
  out << run.manifest.dump(2) << '\n';
}

}  // namespace flipnerf
