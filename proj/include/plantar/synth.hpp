#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "plantar/core.hpp"

namespace plantar::synth {

/// Sagittal squat: every channel is neutral + amplitude * sin(2 pi t / period + phase)
/// plus white measurement noise.
struct SquatConfig {
  double period_s = 2.0;
  double duration_s = 30.0;
  std::int64_t sample_period_ms = kDefaultPeriodMs;
  std::array<double, kChannelCount> amplitude_deg{12.0, 40.0, 38.0, 12.0};
  std::array<double, kChannelCount> neutral_deg{10.0, 45.0, 45.0, 15.0};
  std::array<double, kChannelCount> phase_rad{-0.35, 0.0, 0.3, 0.7};
  /// Motion-capture noise per channel, 0.05 x amplitude. With the default
  /// PressureModel every condition-A trial then validates at R^2 >= 0.9.
  std::array<double, kChannelCount> noise_sd_deg{0.6, 2.0, 1.9, 0.6};
  std::uint64_t seed = 0;
};

void validate(const SquatConfig& config);

/// Constants of the plantar forward model.
struct PressureModel {
  /// Anterior load tilt = cop_gain * (d + cop_quadratic * d^2), d = mean
  /// normalized ankle/knee/hip flexion.
  double cop_gain = 0.25;
  double cop_quadratic = 0.75;
  /// Contact concentration h = 1 + swing * tanh(lean_gain * (u_upper - u_ankle)).
  double concentration_swing = 0.4;
  double lean_gain = 1.5;
  /// Residual load carried by cells below their recruitment threshold.
  double contact_floor = 0.02;
  /// Multiplicative per-cell tissue noise inside pressure_from_pose.
  double tissue_noise = 0.01;
  /// Additive sheet noise, as a fraction of the mean cell pressure W / 2304,
  /// applied after the condition transform.
  double sensor_noise = 0.05;
  double blur_radius_cells = 2.0;
};

/// Two foot-shaped regions with per-cell heterogeneous tissue properties.
struct FootModel {
  std::string participant_id;
  double body_weight = 650.0;
  std::vector<std::uint8_t> mask;   // 1 on the footprint
  std::vector<std::int8_t> side;    // 0 left, 1 right, -1 off the footprint
  std::vector<double> stiffness;    // > 0 on mask, 0 elsewhere
  std::vector<double> recruitment;  // per-cell load threshold in [0, 1), 0 off mask
  double center_row = 24.0;
  double half_length = 13.5;
};

/// Fixed footprint geometry with stiffness and recruitment maps drawn from the seed.
FootModel make_foot_model(std::uint64_t participant_seed, std::string participant_id = {});
void validate(const FootModel& foot);

/// Inclusive cell rectangle covered by one rigid plate.
struct PlateRegion {
  int row0 = 0, row1 = 0, col0 = 0, col1 = 0;
};

struct ConditionTransform {
  Condition kind = Condition::A_nothing;
  double blur_radius_cells = 2.0;  // Gaussian standard deviation, condition B
  std::vector<PlateRegion> plates;  // one per foot, condition C
};

/// Plates are the bounding boxes of each foot, grown by one cell.
ConditionTransform make_condition_transform(Condition kind, const FootModel& foot,
                                            double blur_radius_cells = 2.0);

/// Angle series on the sample grid; same seed gives identical output.
std::vector<AngleSample> squat_trajectory(const SquatConfig& config);

/// One pressure frame for the given pose. Total force equals body_weight.
PressureFrame pressure_from_pose(const AngleSample& pose, const FootModel& foot,
                                 const SquatConfig& squat, const PressureModel& model,
                                 std::mt19937_64& rng);

/// Condition-C plate field before clipping: least-squares affine fit over the
/// plate cells, returned in row-major rectangle order.
std::vector<double> plate_affine_field(const PressureFrame& frame, const PlateRegion& plate);

/// A: identity. B: force-preserving Gaussian blur. C: each plate replaced by
/// its affine fit, clipped at 0 and rescaled to the plate's original load.
std::vector<PressureFrame> apply_condition(std::span<const PressureFrame> frames,
                                           const ConditionTransform& transform);

/// Sheet noise on loaded cells, clipped at 0, frame total restored.
void add_sensor_noise(std::vector<PressureFrame>& frames, double body_weight,
                      const PressureModel& model, std::mt19937_64& rng);

/// Trajectory -> pose-driven pressure -> condition -> sensor noise.
/// Pressure follows the noiseless pose; the recorded angles carry the noise.
TrialDataset generate_trial(std::uint64_t seed, Condition condition, const SquatConfig& squat,
                            const FootModel& foot, const PressureModel& model = {});

/// A multi-participant experiment. Trials are generated one at a time from
/// the plan so a full batch never has to sit in memory.
struct BatchSpec {
  int participants = 7;
  std::array<int, 3> trials_per_condition{5, 3, 3};  // A, B, C
  std::uint64_t seed = 1;
  SquatConfig squat;
  PressureModel model;
};

struct TrialPlan {
  std::string trial_id;
  std::string participant_id;
  int participant = 0;
  Condition condition = Condition::A_nothing;
  int repetition = 0;
  std::uint64_t trial_seed = 0;
  std::uint64_t foot_seed = 0;
};

std::vector<TrialPlan> plan_batch(const BatchSpec& spec);
TrialDataset generate_planned(const TrialPlan& plan, const BatchSpec& spec);

/// Deterministic sub-seed from a base seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

}  // namespace plantar::synth
