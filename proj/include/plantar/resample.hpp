#pragma once

#include <cstdint>
#include <vector>

#include "plantar/core.hpp"

namespace plantar {

/// An irregularly sampled multichannel stream: strictly increasing times,
/// all value vectors of one width.
struct RawSeries {
  struct Sample {
    double t_ms;
    std::vector<double> values;
  };
  std::vector<Sample> samples;

  bool empty() const noexcept { return samples.empty(); }
  std::size_t width() const noexcept { return samples.empty() ? 0 : samples.front().values.size(); }
  double start() const { return samples.front().t_ms; }
  double end() const { return samples.back().t_ms; }
};

/// Throws EmptySeries, NonUniformSampling (times not strictly increasing)
/// or DimensionMismatch (ragged widths).
void validate_series(const RawSeries& series);

/// Integer grid times t_start, t_start + period, ... not exceeding t_end.
std::vector<std::int64_t> uniform_grid(std::int64_t t_start, std::int64_t t_end,
                                       std::int64_t period_ms);

/// Linear interpolation of series onto the uniform grid [t_start, t_end].
/// Never extrapolates: throws OutOfRange when the grid leaves the raw span.
std::vector<std::vector<double>> resample_linear(const RawSeries& series, std::int64_t period_ms,
                                                 std::int64_t t_start, std::int64_t t_end);

/// Resamples a 2304-wide pressure stream and a 4-wide angle stream onto a
/// common grid starting at the later of the two start times.
TrialDataset align_streams(const RawSeries& pressure, const RawSeries& angles,
                           std::int64_t period_ms, Condition condition);

}  // namespace plantar
