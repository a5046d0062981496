#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plantar/core.hpp"
#include "plantar/regress.hpp"

namespace plantar {

struct ThresholdScore {
  double threshold = 0.0;
  /// Mean validation R^2 over every trial and channel; empty when skipped.
  std::optional<double> mean_r2;
};

struct GridSearchResult {
  double chosen = 0.0;
  std::vector<ThresholdScore> scores;  // in candidate order
};

/// Picks the correlation threshold with the highest mean validation R^2 over
/// condition-A trials. Candidates that empty the selection on any trial are
/// skipped; ties go to the smaller threshold.
GridSearchResult grid_search_threshold(std::span<const TrialDataset> trials,
                                       std::span<const double> candidates,
                                       const PipelineConfig& base = {});

}  // namespace plantar
