#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "plantar/io.hpp"
#include "plantar/regress.hpp"

namespace plantar {

namespace fs = std::filesystem;

struct ManifestTrial {
  std::string id;
  std::string participant;
  Condition condition = Condition::A_nothing;
  fs::path pressure;  // resolved against the manifest directory
  fs::path angles;
  bool resample = false;
};

struct RunManifest {
  PipelineConfig config;
  std::int64_t period_ms = kDefaultPeriodMs;
  std::vector<ManifestTrial> trials;
};

/// Overlays the keys present in a JSON config object onto `config`/`period_ms`:
/// lambda, threshold, warmup_s, split ([train, validation]) and period_ms.
void apply_config_json(std::string_view json_text, PipelineConfig& config, std::int64_t& period_ms);
void validate_config(const PipelineConfig& config, std::int64_t period_ms);

/// Parses a manifest. Relative file paths are taken relative to `base_dir`.
/// Keys in the manifest's "config" object override the values already in
/// `defaults` (command-line flags).
RunManifest parse_manifest(std::string_view json_text, const fs::path& base_dir,
                           const RunManifest& defaults = {});
/// Also checks that every referenced file exists.
RunManifest load_manifest(const fs::path& path, const RunManifest& defaults = {});
std::string manifest_json(const RunManifest& manifest, const fs::path& base_dir);

/// One unit of pipeline work; `load` is called on the worker that runs it.
struct TrialJob {
  std::string trial_id;
  std::string participant_id;
  Condition condition = Condition::A_nothing;
  std::function<TrialDataset()> load;
};

/// Called once per successfully fitted trial, possibly from several threads.
using FitSink = std::function<void(std::size_t job, const TrialFit& fit)>;

/// 0 means std::thread::hardware_concurrency().
std::size_t resolve_workers(std::size_t requested);

/// Four records per job in job order, failures included. Each trial is
/// loaded, fitted and dropped before the worker takes the next job.
std::vector<io::EvalRecord> evaluate_trials(const std::vector<TrialJob>& jobs,
                                            const PipelineConfig& config, std::size_t workers,
                                            const FitSink& sink = {});

/// A-vs-B and A-vs-C for every metric and channel (16 rows). Comparisons
/// that cannot run are kept with their error code.
std::vector<io::ComparisonRecord> compare_all(const std::vector<io::EvalRecord>& records);

struct PipelineOptions {
  std::size_t workers = 0;
  bool weight_maps = true;
};

struct PipelineSummary {
  std::size_t trials = 0;
  std::size_t failed_trials = 0;
  std::size_t reports = 0;
  std::size_t comparisons = 0;
  std::size_t significant = 0;
};

/// Writes eval_reports.csv, comparisons.csv, summary.csv and, optionally,
/// weightmaps/<trial>_<channel>.{csv,pgm} under `out_dir`.
PipelineSummary run_pipeline(const RunManifest& manifest, const fs::path& out_dir,
                             const PipelineOptions& options = {});

}  // namespace plantar
