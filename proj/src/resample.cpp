#include "plantar/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace plantar {

void validate_series(const RawSeries& series) {
  if (series.empty()) throw Error(Errc::EmptySeries, "series has no samples");
  const std::size_t width = series.width();
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    const auto& s = series.samples[i];
    if (!std::isfinite(s.t_ms)) {
      throw Error(Errc::NonFinite, "non-finite timestamp at sample " + std::to_string(i));
    }
    if (s.values.size() != width) {
      throw Error(Errc::DimensionMismatch, "sample " + std::to_string(i) + " has width " +
                                               std::to_string(s.values.size()) + ", expected " +
                                               std::to_string(width));
    }
    if (i > 0 && !(s.t_ms > series.samples[i - 1].t_ms)) {
      throw Error(Errc::NonUniformSampling,
                  "timestamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

std::vector<std::int64_t> uniform_grid(std::int64_t t_start, std::int64_t t_end,
                                       std::int64_t period_ms) {
  if (period_ms <= 0) throw Error(Errc::InvalidArgument, "period_ms must be positive");
  std::vector<std::int64_t> grid;
  for (std::int64_t t = t_start; t <= t_end; t += period_ms) grid.push_back(t);
  return grid;
}

std::vector<std::vector<double>> resample_linear(const RawSeries& series, std::int64_t period_ms,
                                                 std::int64_t t_start, std::int64_t t_end) {
  validate_series(series);
  if (period_ms <= 0) throw Error(Errc::InvalidArgument, "period_ms must be positive");
  if (t_end < t_start) throw Error(Errc::InvalidArgument, "t_end precedes t_start");
  if (static_cast<double>(t_start) < series.start() || static_cast<double>(t_end) > series.end()) {
    throw Error(Errc::OutOfRange, "grid [" + std::to_string(t_start) + ", " +
                                      std::to_string(t_end) + "] ms leaves the raw span");
  }

  const auto& s = series.samples;
  const std::size_t width = series.width();
  std::vector<std::vector<double>> out;
  std::size_t lo = 0;  // s[lo].t <= t for the current grid time
  for (std::int64_t t_int : uniform_grid(t_start, t_end, period_ms)) {
    const double t = static_cast<double>(t_int);
    while (lo + 1 < s.size() && s[lo + 1].t_ms <= t) ++lo;
    std::vector<double> v(width);
    if (s[lo].t_ms == t || lo + 1 == s.size()) {
      v = s[lo].values;
    } else {
      const auto& a = s[lo];
      const auto& b = s[lo + 1];
      const double frac = (t - a.t_ms) / (b.t_ms - a.t_ms);
      for (std::size_t j = 0; j < width; ++j) {
        // std::lerp is exact at the endpoints and bounded for frac in [0, 1].
        v[j] = std::clamp(std::lerp(a.values[j], b.values[j], frac),
                          std::min(a.values[j], b.values[j]), std::max(a.values[j], b.values[j]));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

TrialDataset align_streams(const RawSeries& pressure, const RawSeries& angles,
                           std::int64_t period_ms, Condition condition) {
  validate_series(pressure);
  validate_series(angles);
  if (pressure.width() != kPixelCount) {
    throw Error(Errc::DimensionMismatch,
                "pressure stream width " + std::to_string(pressure.width()) + ", expected 2304");
  }
  if (angles.width() != kChannelCount) {
    throw Error(Errc::DimensionMismatch,
                "angle stream width " + std::to_string(angles.width()) + ", expected 4");
  }
  const double lo = std::max(pressure.start(), angles.start());
  const double hi = std::min(pressure.end(), angles.end());
  const auto t_start = static_cast<std::int64_t>(std::ceil(lo));
  const auto t_end = static_cast<std::int64_t>(std::floor(hi));
  if (t_end < t_start) throw Error(Errc::NoOverlap, "pressure and angle streams do not overlap");

  auto p = resample_linear(pressure, period_ms, t_start, t_end);
  auto a = resample_linear(angles, period_ms, t_start, t_end);

  TrialDataset trial;
  trial.period_ms = period_ms;
  trial.condition = condition;
  trial.frames.resize(p.size());
  trial.angles.resize(a.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::int64_t t = t_start + static_cast<std::int64_t>(k) * period_ms;
    trial.frames[k].t_ms = t;
    trial.frames[k].values = std::move(p[k]);
    trial.angles[k].t_ms = t;
    std::copy(a[k].begin(), a[k].end(), trial.angles[k].deg.begin());
  }
  return validate_trial(std::move(trial));
}

}  // namespace plantar
