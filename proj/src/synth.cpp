#include "plantar/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <string>

namespace plantar::synth {

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  // splitmix64 over the tag list
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t t : tags) h = mix(h ^ mix(t));
  return h;
}

void validate(const SquatConfig& c) {
  if (!(c.period_s > 0.0) || !(c.duration_s > 0.0) || c.sample_period_ms <= 0) {
    throw Error(Errc::InvalidArgument, "squat period, duration and sample period must be positive");
  }
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (!(c.amplitude_deg[i] >= 0.0) || !(c.noise_sd_deg[i] >= 0.0) ||
        !std::isfinite(c.neutral_deg[i]) || !std::isfinite(c.phase_rad[i])) {
      throw Error(Errc::InvalidArgument, "squat amplitudes and noise must be >= 0 and finite");
    }
  }
}

void validate(const FootModel& f) {
  if (f.mask.size() != kPixelCount || f.side.size() != kPixelCount ||
      f.stiffness.size() != kPixelCount || f.recruitment.size() != kPixelCount) {
    throw Error(Errc::DimensionMismatch, "foot model maps must have 2304 cells");
  }
  if (!(f.body_weight > 0.0)) throw Error(Errc::InvalidArgument, "body weight must be positive");
  std::array<std::size_t, 2> count{0, 0};
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    const bool on = f.mask[i] != 0;
    if (on != (f.side[i] >= 0) || (on && !(f.stiffness[i] > 0.0)) || (!on && f.stiffness[i] != 0.0)) {
      throw Error(Errc::InvalidArgument, "stiffness must be > 0 exactly on the mask");
    }
    if (on) ++count[static_cast<std::size_t>(f.side[i])];
  }
  if (count[0] == 0 || count[1] == 0) throw Error(Errc::InvalidArgument, "both feet need cells");
}

FootModel make_foot_model(std::uint64_t participant_seed, std::string participant_id) {
  FootModel foot;
  foot.participant_id = std::move(participant_id);
  foot.mask.assign(kPixelCount, 0);
  foot.side.assign(kPixelCount, -1);
  foot.stiffness.assign(kPixelCount, 0.0);
  foot.recruitment.assign(kPixelCount, 0.0);

  // Two soles, toes at row 10, heels at row 37, narrowed at the arch.
  constexpr std::array<double, 2> center_col{16.5, 31.5};
  for (int r = 0; r < kGridSide; ++r) {
    const double rn = (r - foot.center_row) / foot.half_length;
    if (std::abs(rn) > 1.0) continue;
    const double arch = (rn - 0.15) / 0.25;
    const double width = (4.6 - 1.2 * std::exp(-arch * arch)) *
                         std::sqrt(std::max(0.0, 1.0 - rn * rn * rn * rn));
    for (int c = 0; c < kGridSide; ++c) {
      for (std::size_t s = 0; s < 2; ++s) {
        if (std::abs(c - center_col[s]) <= width) {
          foot.mask[flat_index(r, c)] = 1;
          foot.side[flat_index(r, c)] = static_cast<std::int8_t>(s);
        }
      }
    }
  }

  std::mt19937_64 rng(derive_seed(participant_seed, {0xF007}));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 0.9);
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    const double z = normal(rng);
    const double tau = uniform(rng);
    if (foot.mask[i]) {
      foot.stiffness[i] = std::exp(0.35 * z);
      foot.recruitment[i] = tau;
    }
  }
  return foot;
}

ConditionTransform make_condition_transform(Condition kind, const FootModel& foot,
                                            double blur_radius_cells) {
  validate(foot);
  ConditionTransform t;
  t.kind = kind;
  t.blur_radius_cells = blur_radius_cells;
  if (kind != Condition::C_plastic) return t;
  for (int s = 0; s < 2; ++s) {
    PlateRegion p{kGridSide, -1, kGridSide, -1};
    for (std::size_t i = 0; i < kPixelCount; ++i) {
      if (foot.side[i] != s) continue;
      const auto [r, c] = grid_cell(i);
      p.row0 = std::min(p.row0, r);
      p.row1 = std::max(p.row1, r);
      p.col0 = std::min(p.col0, c);
      p.col1 = std::max(p.col1, c);
    }
    p.row0 = std::max(0, p.row0 - 1);
    p.col0 = std::max(0, p.col0 - 1);
    p.row1 = std::min(kGridSide - 1, p.row1 + 1);
    p.col1 = std::min(kGridSide - 1, p.col1 + 1);
    t.plates.push_back(p);
  }
  return t;
}

std::vector<AngleSample> squat_trajectory(const SquatConfig& config) {
  validate(config);
  const auto n = static_cast<std::size_t>(
      std::llround(config.duration_s * 1000.0 / static_cast<double>(config.sample_period_ms)));
  std::mt19937_64 rng(derive_seed(config.seed, {0xA9}));
  std::normal_distribution<double> normal;
  std::vector<AngleSample> out(n);
  const double omega = 2.0 * std::numbers::pi / config.period_s;
  for (std::size_t k = 0; k < n; ++k) {
    const auto t_ms = static_cast<std::int64_t>(k) * config.sample_period_ms;
    const double t = static_cast<double>(t_ms) / 1000.0;
    out[k].t_ms = t_ms;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const double noise = normal(rng);
      out[k].deg[c] = config.neutral_deg[c] +
                      config.amplitude_deg[c] * std::sin(omega * t + config.phase_rad[c]) +
                      config.noise_sd_deg[c] * noise;
    }
  }
  return out;
}

PressureFrame pressure_from_pose(const AngleSample& pose, const FootModel& foot,
                                 const SquatConfig& squat, const PressureModel& model,
                                 std::mt19937_64& rng) {
  std::array<double, kChannelCount> u{};
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const double amp = squat.amplitude_deg[c];
    u[c] = amp > 0.0 ? (pose.deg[c] - squat.neutral_deg[c]) / amp : 0.0;
  }
  const double depth = (u[0] + u[1] + u[2]) / 3.0;
  const double tilt = model.cop_gain * (depth + model.cop_quadratic * depth * depth);
  const double lean = u[3] - u[0];
  const double concentration = 1.0 + model.concentration_swing * std::tanh(model.lean_gain * lean);

  PressureFrame frame;
  frame.t_ms = pose.t_ms;
  std::array<double, 2> side_total{0.0, 0.0};
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    if (!foot.mask[i]) continue;
    const double rn = (grid_cell(i).row - foot.center_row) / foot.half_length;
    // Planar profile; rows above the centre are anterior.
    const double profile = std::max(0.0, 1.0 - tilt * rn);
    const double drive = std::max(0.0, concentration * profile - foot.recruitment[i]);
    frame.values[i] = foot.stiffness[i] * (drive + model.contact_floor);
    side_total[static_cast<std::size_t>(foot.side[i])] += frame.values[i];
  }
  // Each foot carries half the body weight before noise.
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    if (foot.mask[i]) {
      frame.values[i] *= 0.5 * foot.body_weight / side_total[static_cast<std::size_t>(foot.side[i])];
    }
  }
  if (model.tissue_noise > 0.0) {
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < kPixelCount; ++i) {
      if (foot.mask[i]) {
        frame.values[i] = std::max(0.0, frame.values[i] * (1.0 + model.tissue_noise * normal(rng)));
      }
    }
    const double total = frame.total();
    for (double& v : frame.values) v *= foot.body_weight / total;
  }
  return frame;
}

namespace {

/// Separable Gaussian scatter: each source cell spreads its load over the
/// in-grid cells with weights normalized per source, so the total is kept
/// exactly even at the sheet border.
PressureFrame blur_frame(const PressureFrame& in, double sigma) {
  if (!(sigma > 0.0)) return in;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int d = -radius; d <= radius; ++d) {
    kernel[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  auto scatter_1d = [&](const std::vector<double>& src, bool along_rows) {
    std::vector<double> dst(kPixelCount, 0.0);
    for (int r = 0; r < kGridSide; ++r) {
      for (int c = 0; c < kGridSide; ++c) {
        const double v = src[flat_index(r, c)];
        if (v == 0.0) continue;
        const int pos = along_rows ? r : c;
        const int lo = std::max(0, pos - radius);
        const int hi = std::min(kGridSide - 1, pos + radius);
        double norm = 0.0;
        for (int q = lo; q <= hi; ++q) norm += kernel[static_cast<std::size_t>(q - pos + radius)];
        for (int q = lo; q <= hi; ++q) {
          const double w = kernel[static_cast<std::size_t>(q - pos + radius)] / norm;
          dst[along_rows ? flat_index(q, c) : flat_index(r, q)] += v * w;
        }
      }
    }
    return dst;
  };
  PressureFrame out;
  out.t_ms = in.t_ms;
  out.values = scatter_1d(scatter_1d(in.values, true), false);
  return out;
}

}  // namespace

std::vector<double> plate_affine_field(const PressureFrame& frame, const PlateRegion& p) {
  const int rows = p.row1 - p.row0 + 1;
  const int cols = p.col1 - p.col0 + 1;
  if (rows <= 0 || cols <= 0) throw Error(Errc::InvalidArgument, "empty plate region");
  const Eigen::Index n = rows * cols;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  Eigen::Index k = 0;
  for (int r = p.row0; r <= p.row1; ++r) {
    for (int c = p.col0; c <= p.col1; ++c, ++k) {
      X(k, 0) = 1.0;
      X(k, 1) = r;
      X(k, 2) = c;
      y(k) = frame.values[flat_index(r, c)];
    }
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd fitted = X * beta;
  return {fitted.data(), fitted.data() + n};
}

std::vector<PressureFrame> apply_condition(std::span<const PressureFrame> frames,
                                           const ConditionTransform& transform) {
  std::vector<PressureFrame> out(frames.begin(), frames.end());
  switch (transform.kind) {
    case Condition::A_nothing:
      break;
    case Condition::B_rubber:
      for (auto& f : out) f = blur_frame(f, transform.blur_radius_cells);
      break;
    case Condition::C_plastic:
      for (auto& f : out) {
        for (const auto& plate : transform.plates) {
          const auto field = plate_affine_field(f, plate);
          double load = 0.0, clipped_sum = 0.0;
          std::size_t k = 0;
          for (int r = plate.row0; r <= plate.row1; ++r) {
            for (int c = plate.col0; c <= plate.col1; ++c) {
              load += f.values[flat_index(r, c)];
              clipped_sum += std::max(0.0, field[k++]);
            }
          }
          const double scale = clipped_sum > 0.0 ? load / clipped_sum : 0.0;
          k = 0;
          for (int r = plate.row0; r <= plate.row1; ++r) {
            for (int c = plate.col0; c <= plate.col1; ++c) {
              f.values[flat_index(r, c)] = std::max(0.0, field[k++]) * scale;
            }
          }
        }
      }
      break;
  }
  return out;
}

void add_sensor_noise(std::vector<PressureFrame>& frames, double body_weight,
                      const PressureModel& model, std::mt19937_64& rng) {
  if (!(model.sensor_noise > 0.0)) return;
  const double sd = model.sensor_noise * body_weight / static_cast<double>(kPixelCount);
  std::normal_distribution<double> normal;
  for (auto& f : frames) {
    const double before = f.total();
    for (double& v : f.values) {
      if (v > 0.0) v = std::max(0.0, v + sd * normal(rng));
    }
    const double after = f.total();
    if (after > 0.0) {
      for (double& v : f.values) v *= before / after;
    }
  }
}

TrialDataset generate_trial(std::uint64_t seed, Condition condition, const SquatConfig& squat,
                            const FootModel& foot, const PressureModel& model) {
  validate(foot);
  SquatConfig measured_cfg = squat;
  measured_cfg.seed = derive_seed(seed, {1});
  SquatConfig clean_cfg = measured_cfg;
  clean_cfg.noise_sd_deg.fill(0.0);
  const auto measured = squat_trajectory(measured_cfg);
  const auto clean = squat_trajectory(clean_cfg);

  std::mt19937_64 tissue_rng(derive_seed(seed, {2}));
  std::vector<PressureFrame> frames;
  frames.reserve(clean.size());
  for (const auto& pose : clean) {
    frames.push_back(pressure_from_pose(pose, foot, squat, model, tissue_rng));
  }
  frames = apply_condition(frames, make_condition_transform(condition, foot, model.blur_radius_cells));
  std::mt19937_64 sensor_rng(derive_seed(seed, {3}));
  add_sensor_noise(frames, foot.body_weight, model, sensor_rng);

  TrialDataset trial;
  trial.period_ms = squat.sample_period_ms;
  trial.frames = std::move(frames);
  trial.angles = measured;
  trial.condition = condition;
  trial.participant_id = foot.participant_id;
  return validate_trial(std::move(trial));
}

std::vector<TrialPlan> plan_batch(const BatchSpec& spec) {
  if (spec.participants <= 0) throw Error(Errc::InvalidArgument, "need at least one participant");
  std::vector<TrialPlan> plan;
  constexpr std::array<Condition, 3> conditions{Condition::A_nothing, Condition::B_rubber,
                                                Condition::C_plastic};
  for (int p = 0; p < spec.participants; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof pid, "P%02d", p + 1);
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      if (spec.trials_per_condition[ci] < 0) {
        throw Error(Errc::InvalidArgument, "trial counts must be non-negative");
      }
      for (int k = 0; k < spec.trials_per_condition[ci]; ++k) {
        TrialPlan t;
        t.participant = p;
        t.participant_id = pid;
        t.condition = conditions[ci];
        t.repetition = k;
        t.trial_id = std::string(pid) + "_" + condition_letter(conditions[ci]) + std::to_string(k + 1);
        t.foot_seed = derive_seed(spec.seed, {0xF00, static_cast<std::uint64_t>(p)});
        t.trial_seed = derive_seed(spec.seed, {0x7A1, static_cast<std::uint64_t>(p), ci,
                                               static_cast<std::uint64_t>(k)});
        plan.push_back(std::move(t));
      }
    }
  }
  return plan;
}

TrialDataset generate_planned(const TrialPlan& plan, const BatchSpec& spec) {
  const FootModel foot = make_foot_model(plan.foot_seed, plan.participant_id);
  TrialDataset trial = generate_trial(plan.trial_seed, plan.condition, spec.squat, foot, spec.model);
  trial.trial_id = plan.trial_id;
  return trial;
}

}  // namespace plantar::synth
