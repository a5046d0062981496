#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plantar/core.hpp"
#include "plantar/preprocess.hpp"

namespace plantar {

/// Standardized pressures: one row per selected pixel (selection order), one
/// column per time step.
using DesignMatrix = Eigen::MatrixXd;

/// Factors (P P^T + lambda I) once so several targets can share it.
class RidgeSolver {
 public:
  RidgeSolver(const DesignMatrix& P, double lambda);

  /// Weights w solving (P P^T + lambda I) w = P theta.
  Eigen::VectorXd solve(std::span<const double> theta) const;

  Eigen::Index pixels() const noexcept { return P_.rows(); }
  Eigen::Index steps() const noexcept { return P_.cols(); }
  double lambda() const noexcept { return lambda_; }

 private:
  const DesignMatrix& P_;
  double lambda_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Closed-form ridge weights: w = theta P^T (P P^T + lambda I)^{-1}, computed
/// by a Cholesky solve on the pixel Gram matrix.
Eigen::VectorXd ridge_fit(const DesignMatrix& P, std::span<const double> theta, double lambda);

/// sum_k (theta_k - w . p_k)^2 + lambda * |w|^2. The unhalved penalty makes
/// ridge_fit its exact minimizer.
double ridge_loss(const Eigen::VectorXd& w, const DesignMatrix& P, std::span<const double> theta,
                  double lambda);

/// Trained readout for one angle channel.
struct RidgeModel {
  AngleChannel channel = AngleChannel::ankle;
  double lambda = 10.0;
  PixelSelection selection;
  ZScoreParams pressure_z;  // one channel per selected pixel
  ZScoreParams angle_z;     // single channel
  Eigen::VectorXd weights;
};

/// Throws InvalidArgument when the model's pieces disagree in size or are non-finite.
void validate_model(const RidgeModel& model);

/// Estimated angles in degrees, one per frame.
std::vector<double> predict(const RidgeModel& model, std::span<const PressureFrame> frames);

double rmse(std::span<const double> measured, std::span<const double> estimated);
/// 1 - SS_res / SS_tot with the mean of `measured`. Throws ZeroVariance.
double r_squared(std::span<const double> measured, std::span<const double> estimated);

struct EvalReport {
  std::string trial_id;
  std::string participant_id;
  AngleChannel channel = AngleChannel::ankle;
  Condition condition = Condition::A_nothing;
  double rmse_deg = 0.0;
  double r2 = 0.0;
  std::size_t n_validation = 0;
};

struct PipelineConfig {
  double lambda = 10.0;
  double threshold = 0.15;
  double warmup_s = 3.0;
  int split_train = 5;
  int split_validation = 1;
};

/// Sample layout after dropping the warmup and splitting the rest contiguously.
struct TrialSplit {
  IndexRange training;
  IndexRange validation;
};

TrialSplit split_trial(std::size_t n_samples, std::int64_t period_ms, const PipelineConfig& config);

struct ChannelOutcome {
  AngleChannel channel = AngleChannel::ankle;
  std::optional<RidgeModel> model;
  std::optional<EvalReport> report;
  std::optional<Errc> error;
  std::string error_message;

  bool ok() const noexcept { return report.has_value(); }
};

struct TrialFit {
  TrialSplit split;
  PixelSelection selection;
  std::array<ChannelOutcome, kChannelCount> channels;
};

/// Fits the shared selection and the four per-channel readouts on the
/// training segment and scores them on the validation segment. Channel-level
/// failures (e.g. a constant angle) are recorded in the outcome; trial-level
/// failures (TooShort, EmptySelection) throw.
TrialFit train_eval_trial(const TrialDataset& trial, const PipelineConfig& config = {});

}  // namespace plantar
