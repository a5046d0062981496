#include "plantar/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace plantar {

namespace {

bool is_constant(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

void check_range(const TrialDataset& trial, IndexRange r) {
  if (r.count < 2 || r.end() > trial.size()) {
    throw Error(Errc::OutOfRange, "training range [" + std::to_string(r.first) + ", " +
                                      std::to_string(r.end()) + ") invalid for a trial of " +
                                      std::to_string(trial.size()) + " samples");
  }
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, "pearson_r: sequences of length " +
                                          std::to_string(x.size()) + " and " +
                                          std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(Errc::TooShort, "pearson_r needs at least 2 points");
  if (is_constant(x) || is_constant(y)) return 0.0;

  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> max_abs_correlation(const TrialDataset& trial, IndexRange training) {
  check_range(trial, training);
  std::vector<std::vector<double>> angle(kChannelCount);
  for (AngleChannel c : kAllChannels) {
    angle[index_of(c)] = trial.angle_series(c, training.first, training.count);
  }

  std::vector<double> best(kPixelCount, 0.0);
  std::vector<double> px(training.count);
  for (std::size_t p = 0; p < kPixelCount; ++p) {
    for (std::size_t k = 0; k < training.count; ++k) {
      px[k] = trial.frames[training.first + k].values[p];
    }
    if (is_constant(px)) continue;
    for (const auto& a : angle) best[p] = std::max(best[p], std::abs(pearson_r(px, a)));
  }
  return best;
}

PixelSelection select_pixels(const TrialDataset& trial, IndexRange training, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw Error(Errc::InvalidArgument, "threshold must lie in [0, 1)");
  }
  const auto best = max_abs_correlation(trial, training);
  PixelSelection sel;
  sel.threshold = threshold;
  for (std::size_t p = 0; p < kPixelCount; ++p) {
    if (best[p] > threshold) sel.indices.push_back(p);
  }
  if (sel.indices.empty()) {
    throw Error(Errc::EmptySelection,
                "no pixel exceeds |r| > " + std::to_string(threshold) + " on the training range");
  }
  return sel;
}

ZScoreParams zscore_fit(const std::vector<std::vector<double>>& series) {
  ZScoreParams z;
  z.mean.reserve(series.size());
  z.std.reserve(series.size());
  for (std::size_t c = 0; c < series.size(); ++c) {
    const auto& s = series[c];
    if (s.size() < 2) throw Error(Errc::TooShort, "zscore_fit needs at least 2 samples");
    if (is_constant(s)) {
      throw Error(Errc::ZeroVariance, "channel " + std::to_string(c) + " is constant");
    }
    const double m = mean_of(s);
    double ss = 0.0;
    for (double v : s) ss += (v - m) * (v - m);
    z.mean.push_back(m);
    z.std.push_back(std::sqrt(ss / static_cast<double>(s.size())));
  }
  return z;
}

namespace {

template <class F>
std::vector<std::vector<double>> map_channels(const std::vector<std::vector<double>>& series,
                                              const ZScoreParams& params, F f) {
  if (series.size() != params.channels()) {
    throw Error(Errc::ChannelMismatch, std::to_string(series.size()) + " channels vs " +
                                           std::to_string(params.channels()) + " parameters");
  }
  std::vector<std::vector<double>> out(series.size());
  for (std::size_t c = 0; c < series.size(); ++c) {
    out[c].reserve(series[c].size());
    for (double v : series[c]) out[c].push_back(f(v, params.mean[c], params.std[c]));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> zscore_apply(const std::vector<std::vector<double>>& series,
                                              const ZScoreParams& params) {
  return map_channels(series, params, [](double v, double m, double s) { return (v - m) / s; });
}

std::vector<std::vector<double>> zscore_invert(const std::vector<std::vector<double>>& series,
                                               const ZScoreParams& params) {
  return map_channels(series, params, [](double v, double m, double s) { return v * s + m; });
}

}  // namespace plantar
