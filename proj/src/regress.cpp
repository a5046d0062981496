#include "plantar/regress.hpp"

#include <cmath>
#include <string>

namespace plantar {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace

RidgeSolver::RidgeSolver(const DesignMatrix& P, double lambda) : P_(P), lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(Errc::InvalidArgument, "lambda must be positive and finite");
  }
  if (P.rows() == 0 || P.cols() == 0) {
    throw Error(Errc::DimensionMismatch, "design matrix is empty");
  }
  if (!P.allFinite()) throw Error(Errc::NonFinite, "design matrix has non-finite entries");

  const Eigen::Index n = P.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(P);
  gram.diagonal().array() += lambda;
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success) {
    throw Error(Errc::NumericalFailure, "Cholesky factorization of the ridge system failed");
  }
}

Eigen::VectorXd RidgeSolver::solve(std::span<const double> theta) const {
  if (static_cast<Eigen::Index>(theta.size()) != P_.cols()) {
    throw Error(Errc::DimensionMismatch, "target has " + std::to_string(theta.size()) +
                                             " samples, design matrix has " +
                                             std::to_string(P_.cols()) + " columns");
  }
  const Eigen::VectorXd rhs = P_ * as_vector(theta);
  Eigen::VectorXd w = llt_.solve(rhs);
  if (!w.allFinite()) throw Error(Errc::NumericalFailure, "ridge solve produced non-finite weights");
  return w;
}

Eigen::VectorXd ridge_fit(const DesignMatrix& P, std::span<const double> theta, double lambda) {
  if (static_cast<Eigen::Index>(theta.size()) != P.cols()) {
    throw Error(Errc::DimensionMismatch, "target length does not match design columns");
  }
  return RidgeSolver(P, lambda).solve(theta);
}

double ridge_loss(const Eigen::VectorXd& w, const DesignMatrix& P, std::span<const double> theta,
                  double lambda) {
  if (w.size() != P.rows() || static_cast<Eigen::Index>(theta.size()) != P.cols()) {
    throw Error(Errc::DimensionMismatch, "ridge_loss: inconsistent shapes");
  }
  const Eigen::VectorXd residual = as_vector(theta) - P.transpose() * w;
  return residual.squaredNorm() + lambda * w.squaredNorm();
}

void validate_model(const RidgeModel& m) {
  const std::size_t n = m.selection.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "model has an empty selection");
  for (std::size_t i = 0; i < n; ++i) {
    if (m.selection.indices[i] >= kPixelCount ||
        (i > 0 && m.selection.indices[i] <= m.selection.indices[i - 1])) {
      throw Error(Errc::InvalidArgument, "selection indices must be increasing and < 2304");
    }
  }
  if (m.pressure_z.mean.size() != n || m.pressure_z.std.size() != n ||
      static_cast<std::size_t>(m.weights.size()) != n) {
    throw Error(Errc::InvalidArgument, "model vectors disagree with the selection size");
  }
  if (m.angle_z.mean.size() != 1 || m.angle_z.std.size() != 1) {
    throw Error(Errc::InvalidArgument, "angle standardization must have one channel");
  }
  if (!(m.lambda > 0.0) || !m.weights.allFinite()) {
    throw Error(Errc::InvalidArgument, "lambda must be positive and weights finite");
  }
  for (double s : m.pressure_z.std) {
    if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "pressure std must be positive");
  }
  if (!(m.angle_z.std[0] > 0.0)) throw Error(Errc::InvalidArgument, "angle std must be positive");
}

std::vector<double> predict(const RidgeModel& model, std::span<const PressureFrame> frames) {
  validate_model(model);
  const auto& idx = model.selection.indices;
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    validate_frame(f);
    double z = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      z += model.weights[static_cast<Eigen::Index>(i)] *
           ((f.values[idx[i]] - model.pressure_z.mean[i]) / model.pressure_z.std[i]);
    }
    out.push_back(z * model.angle_z.std[0] + model.angle_z.mean[0]);
  }
  return out;
}

double rmse(std::span<const double> measured, std::span<const double> estimated) {
  if (measured.size() != estimated.size()) {
    throw Error(Errc::LengthMismatch, "rmse: sequences differ in length");
  }
  if (measured.empty()) throw Error(Errc::TooShort, "rmse needs at least one sample");
  double ss = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const double d = measured[k] - estimated[k];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(measured.size()));
}

double r_squared(std::span<const double> measured, std::span<const double> estimated) {
  if (measured.size() != estimated.size()) {
    throw Error(Errc::LengthMismatch, "r_squared: sequences differ in length");
  }
  if (measured.size() < 2) throw Error(Errc::TooShort, "r_squared needs at least 2 samples");
  double mean = 0.0;
  for (double v : measured) mean += v;
  mean /= static_cast<double>(measured.size());
  double ss_res = 0.0, ss_tot = 0.0;
  bool constant = true;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    ss_res += (measured[k] - estimated[k]) * (measured[k] - estimated[k]);
    ss_tot += (measured[k] - mean) * (measured[k] - mean);
    constant = constant && measured[k] == measured[0];
  }
  if (constant || ss_tot == 0.0) {
    throw Error(Errc::ZeroVariance, "measured sequence is constant");
  }
  return 1.0 - ss_res / ss_tot;
}

TrialSplit split_trial(std::size_t n_samples, std::int64_t period_ms, const PipelineConfig& config) {
  if (config.split_train <= 0 || config.split_validation <= 0 || !(config.warmup_s >= 0.0) ||
      period_ms <= 0) {
    throw Error(Errc::InvalidArgument, "split parts, warmup and period must be positive");
  }
  const auto warmup =
      static_cast<std::size_t>(std::llround(config.warmup_s * 1000.0 / static_cast<double>(period_ms)));
  if (n_samples <= warmup) {
    throw Error(Errc::TooShort, "trial is not longer than the warmup");
  }
  const std::size_t usable = n_samples - warmup;
  const auto parts = static_cast<std::size_t>(config.split_train + config.split_validation);
  const std::size_t n_train = usable * static_cast<std::size_t>(config.split_train) / parts;
  const std::size_t n_val = usable - n_train;
  if (n_train < 2 || n_val < 2) {
    throw Error(Errc::TooShort, "trial leaves " + std::to_string(n_train) + " training and " +
                                    std::to_string(n_val) + " validation samples");
  }
  return {{warmup, n_train}, {warmup + n_train, n_val}};
}

TrialFit train_eval_trial(const TrialDataset& trial, const PipelineConfig& config) {
  validate_trial(trial);
  TrialFit fit;
  fit.split = split_trial(trial.size(), trial.period_ms, config);
  const IndexRange train = fit.split.training;
  const IndexRange val = fit.split.validation;

  fit.selection = select_pixels(trial, train, config.threshold);
  const auto& idx = fit.selection.indices;

  std::vector<std::vector<double>> pixel_train(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    pixel_train[i] = trial.pixel_series(idx[i], train.first, train.count);
  }
  const ZScoreParams pressure_z = zscore_fit(pixel_train);

  DesignMatrix P(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(train.count));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t k = 0; k < train.count; ++k) {
      P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          (pixel_train[i][k] - pressure_z.mean[i]) / pressure_z.std[i];
    }
  }
  pixel_train.clear();
  const RidgeSolver solver(P, config.lambda);

  const std::span<const PressureFrame> val_frames(trial.frames.data() + val.first, val.count);
  for (AngleChannel c : kAllChannels) {
    ChannelOutcome& out = fit.channels[index_of(c)];
    out.channel = c;
    try {
      const auto angle_train = trial.angle_series(c, train.first, train.count);
      RidgeModel model;
      model.channel = c;
      model.lambda = config.lambda;
      model.selection = fit.selection;
      model.pressure_z = pressure_z;
      model.angle_z = zscore_fit({angle_train});
      const auto theta = zscore_apply({angle_train}, model.angle_z).front();
      model.weights = solver.solve(theta);

      const auto measured = trial.angle_series(c, val.first, val.count);
      const auto estimated = predict(model, val_frames);
      EvalReport report;
      report.trial_id = trial.trial_id;
      report.participant_id = trial.participant_id;
      report.channel = c;
      report.condition = trial.condition;
      report.rmse_deg = rmse(measured, estimated);
      report.r2 = r_squared(measured, estimated);
      report.n_validation = val.count;
      out.model = std::move(model);
      out.report = report;
    } catch (const Error& e) {
      out.model.reset();
      out.report.reset();
      out.error = e.code();
      out.error_message = e.what();
    }
  }
  return fit;
}

}  // namespace plantar
