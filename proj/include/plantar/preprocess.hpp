#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plantar/core.hpp"

namespace plantar {

/// Half-open index range [first, first + count) into a trial's samples.
struct IndexRange {
  std::size_t first = 0;
  std::size_t count = 0;
  std::size_t end() const noexcept { return first + count; }
};

/// Pixels kept by the correlation filter, shared by all four angle models.
struct PixelSelection {
  std::vector<std::size_t> indices;  // strictly increasing flat indices
  double threshold = 0.0;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Per-channel standardization parameters (population standard deviation).
struct ZScoreParams {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t channels() const noexcept { return mean.size(); }
};

/// Pearson product-moment correlation. Returns 0 when either input is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Correlation filter over the training range: keeps a pixel iff the largest
/// |r| against any of the four angle channels exceeds threshold.
/// Throws EmptySelection when nothing passes.
PixelSelection select_pixels(const TrialDataset& trial, IndexRange training, double threshold);

/// Per-pixel max |r| over the four channels (0 for constant pixels); the
/// quantity select_pixels compares against the threshold.
std::vector<double> max_abs_correlation(const TrialDataset& trial, IndexRange training);

/// Channel-major input: series[c] is the sequence for channel c.
ZScoreParams zscore_fit(const std::vector<std::vector<double>>& series);
std::vector<std::vector<double>> zscore_apply(const std::vector<std::vector<double>>& series,
                                              const ZScoreParams& params);
std::vector<std::vector<double>> zscore_invert(const std::vector<std::vector<double>>& series,
                                               const ZScoreParams& params);

}  // namespace plantar
