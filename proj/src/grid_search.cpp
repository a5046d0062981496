#include "plantar/grid_search.hpp"

#include <string>

namespace plantar {

GridSearchResult grid_search_threshold(std::span<const TrialDataset> trials,
                                       std::span<const double> candidates,
                                       const PipelineConfig& base) {
  if (candidates.empty()) throw Error(Errc::InvalidArgument, "no threshold candidates");
  if (trials.empty()) throw Error(Errc::InvalidArgument, "no trials for the grid search");
  for (const auto& t : trials) {
    if (t.condition != Condition::A_nothing) {
      throw Error(Errc::InvalidArgument,
                  "grid search uses condition-A trials only; got " + std::string(to_string(t.condition)));
    }
  }

  GridSearchResult result;
  // Nothing to compare against: a singleton grid is returned without scoring.
  if (candidates.size() == 1) {
    result.chosen = candidates.front();
    result.scores.push_back({candidates.front(), std::nullopt});
    return result;
  }
  std::optional<double> best_r2;
  for (double candidate : candidates) {
    PipelineConfig config = base;
    config.threshold = candidate;
    ThresholdScore score{candidate, std::nullopt};
    double sum = 0.0;
    std::size_t n = 0;
    bool skipped = false;
    for (const auto& trial : trials) {
      try {
        const TrialFit fit = train_eval_trial(trial, config);
        for (const auto& ch : fit.channels) {
          if (!ch.ok()) throw Error(*ch.error, ch.error_message);
          sum += ch.report->r2;
          ++n;
        }
      } catch (const Error& e) {
        if (e.code() != Errc::EmptySelection) throw;
        skipped = true;
        break;
      }
    }
    if (!skipped) score.mean_r2 = sum / static_cast<double>(n);
    result.scores.push_back(score);

    if (!score.mean_r2) continue;
    const bool better = !best_r2 || *score.mean_r2 > *best_r2 ||
                        (*score.mean_r2 == *best_r2 && candidate < result.chosen);
    if (better) {
      best_r2 = score.mean_r2;
      result.chosen = candidate;
    }
  }
  if (!best_r2) {
    throw Error(Errc::EmptySelection, "every threshold candidate emptied the selection");
  }
  return result;
}

}  // namespace plantar
