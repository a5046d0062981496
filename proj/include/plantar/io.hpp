#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plantar/core.hpp"
#include "plantar/regress.hpp"
#include "plantar/resample.hpp"
#include "plantar/stats.hpp"

namespace plantar::io {

namespace fs = std::filesystem;

inline constexpr int kModelVersion = 1;

/// 17 significant digits, '.' decimal point, independent of the global locale.
std::string format_double(double v);
/// Throws ParseError naming `line` when text is not a complete number.
double parse_double(std::string_view text, std::size_t line);

std::string pressure_header();
std::string angles_header();

/// Paths plus the labels that are not stored in the CSV files themselves.
struct TrialFilePair {
  fs::path pressure;
  fs::path angles;
  Condition condition = Condition::A_nothing;
  std::string participant_id;
  std::string trial_id;
  std::int64_t period_ms = kDefaultPeriodMs;
  /// Regrid irregular timestamps with align_streams instead of rejecting them.
  bool resample = false;
};

RawSeries read_pressure_series(const fs::path& path);
RawSeries read_angle_series(const fs::path& path);

TrialDataset load_trial(const TrialFilePair& pair);
void save_trial(const TrialDataset& trial, const fs::path& pressure, const fs::path& angles);

std::string model_to_string(const RidgeModel& model);
RidgeModel model_from_string(std::string_view text);
void save_model(const RidgeModel& model, const fs::path& path);
RidgeModel load_model(const fs::path& path);

/// |w| scattered onto the 48 x 48 grid; zero outside the selection.
struct WeightMap {
  std::vector<double> values = std::vector<double>(kPixelCount, 0.0);
};

WeightMap weight_map(const RidgeModel& model);
std::string weight_map_csv(const WeightMap& map);
WeightMap parse_weight_map_csv(std::string_view text);
/// Plain (P2) 8-bit PGM, max |w| mapped to 255.
std::string weight_map_pgm(const WeightMap& map);
/// Writes `<prefix>.csv` and `<prefix>.pgm`.
WeightMap export_weight_map(const RidgeModel& model, const fs::path& prefix);

/// One evaluation row; failed (trial, channel) pairs keep their reason.
struct EvalRecord {
  EvalReport report;
  std::string status = "ok";  // "ok" or an error code
  std::string reason;

  bool ok() const noexcept { return status == "ok"; }
};

std::string eval_records_csv(std::span<const EvalRecord> records);
std::vector<EvalRecord> parse_eval_records_csv(std::string_view text);

struct ComparisonRecord {
  stats::ComparisonResult result;
  std::string status = "ok";
  std::string reason;
};

std::string comparisons_csv(std::span<const ComparisonRecord> records);

/// Per condition x channel x metric: n, mean, sample sd and a "m ± sd" label.
std::string summary_csv(std::span<const EvalRecord> records);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

}  // namespace plantar::io
