#include "plantar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <mutex>
#include <thread>

namespace plantar {

using json = nlohmann::json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::ParseError, std::string("manifest field '") + key + "' is missing or mistyped");
  }
}

void overlay_config(const json& j, PipelineConfig& config, std::int64_t& period_ms) {
  if (!j.is_object()) throw Error(Errc::ParseError, "config must be a JSON object");
  try {
    if (j.contains("lambda")) config.lambda = j["lambda"].get<double>();
    if (j.contains("threshold")) config.threshold = j["threshold"].get<double>();
    if (j.contains("warmup_s")) config.warmup_s = j["warmup_s"].get<double>();
    if (j.contains("period_ms")) period_ms = j["period_ms"].get<std::int64_t>();
    if (j.contains("split")) {
      const auto& s = j["split"];
      if (!s.is_array() || s.size() != 2) throw Error(Errc::ParseError, "split must be [train, validation]");
      config.split_train = s[0].get<int>();
      config.split_validation = s[1].get<int>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("bad config value: ") + e.what());
  }
}

}  // namespace

void validate_config(const PipelineConfig& c, std::int64_t period_ms) {
  if (!(c.lambda > 0.0) || !std::isfinite(c.lambda)) {
    throw Error(Errc::InvalidArgument, "lambda must be positive");
  }
  if (!(c.threshold >= 0.0 && c.threshold < 1.0)) {
    throw Error(Errc::InvalidArgument, "threshold must lie in [0, 1)");
  }
  if (!(c.warmup_s >= 0.0) || !std::isfinite(c.warmup_s)) {
    throw Error(Errc::InvalidArgument, "warmup must be >= 0 seconds");
  }
  if (c.split_train <= 0 || c.split_validation <= 0) {
    throw Error(Errc::InvalidArgument, "split ratios must be positive");
  }
  if (period_ms <= 0) throw Error(Errc::InvalidArgument, "period must be positive");
}

void apply_config_json(std::string_view json_text, PipelineConfig& config, std::int64_t& period_ms) {
  overlay_config(parse_json(json_text), config, period_ms);
  validate_config(config, period_ms);
}

RunManifest parse_manifest(std::string_view json_text, const fs::path& base_dir,
                           const RunManifest& defaults) {
  const json j = parse_json(json_text);
  if (!j.is_object()) throw Error(Errc::ParseError, "manifest must be a JSON object");
  RunManifest m;
  m.config = defaults.config;
  m.period_ms = defaults.period_ms;
  if (j.contains("config")) overlay_config(j["config"], m.config, m.period_ms);
  validate_config(m.config, m.period_ms);

  if (!j.contains("trials") || !j["trials"].is_array()) {
    throw Error(Errc::ParseError, "manifest needs a 'trials' array");
  }
  for (const auto& t : j["trials"]) {
    ManifestTrial trial;
    trial.id = get_as<std::string>(t, "id");
    trial.participant = get_as<std::string>(t, "participant");
    trial.condition = parse_condition(get_as<std::string>(t, "condition"));
    fs::path p = get_as<std::string>(t, "pressure");
    fs::path a = get_as<std::string>(t, "angles");
    trial.pressure = p.is_absolute() ? p : base_dir / p;
    trial.angles = a.is_absolute() ? a : base_dir / a;
    if (t.contains("resample")) trial.resample = get_as<bool>(t, "resample");
    m.trials.push_back(std::move(trial));
  }
  return m;
}

RunManifest load_manifest(const fs::path& path, const RunManifest& defaults) {
  RunManifest m = parse_manifest(io::read_text(path), path.parent_path(), defaults);
  for (const auto& t : m.trials) {
    for (const auto& f : {t.pressure, t.angles}) {
      if (!fs::exists(f)) throw Error(Errc::IoFailure, "trial " + t.id + ": missing file " + f.string());
    }
  }
  return m;
}

std::string manifest_json(const RunManifest& m, const fs::path& base_dir) {
  json j;
  j["config"] = {{"lambda", m.config.lambda},
                 {"threshold", m.config.threshold},
                 {"warmup_s", m.config.warmup_s},
                 {"split", {m.config.split_train, m.config.split_validation}},
                 {"period_ms", m.period_ms}};
  j["trials"] = json::array();
  for (const auto& t : m.trials) {
    auto rel = [&](const fs::path& p) { return p.lexically_proximate(base_dir).generic_string(); };
    json e = {{"id", t.id},
              {"participant", t.participant},
              {"condition", std::string(1, condition_letter(t.condition))},
              {"pressure", rel(t.pressure)},
              {"angles", rel(t.angles)}};
    if (t.resample) e["resample"] = true;
    j["trials"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<io::EvalRecord> evaluate_trials(const std::vector<TrialJob>& jobs,
                                            const PipelineConfig& config, std::size_t workers,
                                            const FitSink& sink) {
  std::vector<io::EvalRecord> records(jobs.size() * kChannelCount);
  auto fail_all = [&](std::size_t j, std::string status, std::string reason) {
    for (AngleChannel c : kAllChannels) {
      auto& rec = records[j * kChannelCount + index_of(c)];
      rec.report = {};
      rec.report.trial_id = jobs[j].trial_id;
      rec.report.participant_id = jobs[j].participant_id;
      rec.report.condition = jobs[j].condition;
      rec.report.channel = c;
      rec.status = status;
      rec.reason = reason;
    }
  };
  auto run_one = [&](std::size_t j) {
    try {
      const TrialDataset trial = jobs[j].load();
      const TrialFit fit = train_eval_trial(trial, config);
      for (const auto& ch : fit.channels) {
        auto& rec = records[j * kChannelCount + index_of(ch.channel)];
        if (ch.ok()) {
          rec.report = *ch.report;
        } else {
          rec.report.trial_id = jobs[j].trial_id;
          rec.report.participant_id = jobs[j].participant_id;
          rec.report.condition = jobs[j].condition;
          rec.report.channel = ch.channel;
          rec.status = std::string(to_string(*ch.error));
          rec.reason = ch.error_message;
        }
      }
      if (sink) sink(j, fit);
    } catch (const Error& e) {
      fail_all(j, std::string(to_string(e.code())), e.what());
    } catch (const std::exception& e) {
      fail_all(j, "INTERNAL", e.what());
    }
  };

  workers = std::min(resolve_workers(workers), std::max<std::size_t>(1, jobs.size()));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_one(j);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < jobs.size(); j = next++) run_one(j);
    });
  }
  for (auto& t : pool) t.join();
  return records;
}

std::vector<io::ComparisonRecord> compare_all(const std::vector<io::EvalRecord>& records) {
  std::vector<io::ComparisonRecord> out;
  constexpr Condition others[] = {Condition::B_rubber, Condition::C_plastic};
  for (Condition other : others) {
    for (stats::Metric metric : {stats::Metric::rmse, stats::Metric::r2}) {
      for (AngleChannel ch : kAllChannels) {
        std::vector<EvalReport> a, b;
        for (const auto& r : records) {
          if (!r.ok() || r.report.channel != ch) continue;
          if (r.report.condition == Condition::A_nothing) a.push_back(r.report);
          if (r.report.condition == other) b.push_back(r.report);
        }
        io::ComparisonRecord rec;
        rec.result.metric = metric;
        rec.result.channel = ch;
        rec.result.group_a = Condition::A_nothing;
        rec.result.group_b = other;
        try {
          rec.result = stats::compare_conditions(a, b, metric, ch);
          rec.result.group_a = Condition::A_nothing;
          rec.result.group_b = other;
        } catch (const Error& e) {
          for (const auto& r : a) rec.result.values_a.push_back(stats::metric_of(r, metric));
          for (const auto& r : b) rec.result.values_b.push_back(stats::metric_of(r, metric));
          rec.status = std::string(to_string(e.code()));
          rec.reason = e.what();
        }
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

PipelineSummary run_pipeline(const RunManifest& manifest, const fs::path& out_dir,
                             const PipelineOptions& options) {
  if (manifest.trials.empty()) throw Error(Errc::InvalidArgument, "manifest lists no trials");
  validate_config(manifest.config, manifest.period_ms);
  fs::create_directories(out_dir);

  std::vector<TrialJob> jobs;
  for (const auto& t : manifest.trials) {
    TrialJob job;
    job.trial_id = t.id;
    job.participant_id = t.participant;
    job.condition = t.condition;
    io::TrialFilePair pair{t.pressure, t.angles, t.condition, t.participant,
                           t.id,       manifest.period_ms, t.resample};
    job.load = [pair] { return io::load_trial(pair); };
    jobs.push_back(std::move(job));
  }

  const fs::path maps_dir = out_dir / "weightmaps";
  FitSink sink;
  if (options.weight_maps) {
    fs::create_directories(maps_dir);
    sink = [&](std::size_t j, const TrialFit& fit) {
      for (const auto& ch : fit.channels) {
        if (!ch.model) continue;
        io::export_weight_map(*ch.model,
                              maps_dir / (jobs[j].trial_id + "_" + std::string(to_string(ch.channel))));
      }
    };
  }

  const auto records = evaluate_trials(jobs, manifest.config, options.workers, sink);
  const auto comparisons = compare_all(records);
  io::write_text(out_dir / "eval_reports.csv", io::eval_records_csv(records));
  io::write_text(out_dir / "comparisons.csv", io::comparisons_csv(comparisons));
  io::write_text(out_dir / "summary.csv", io::summary_csv(records));

  PipelineSummary s;
  s.trials = jobs.size();
  s.reports = records.size();
  s.comparisons = comparisons.size();
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    bool any_ok = false;
    for (std::size_t c = 0; c < kChannelCount; ++c) any_ok |= records[j * kChannelCount + c].ok();
    if (!any_ok) ++s.failed_trials;
  }
  for (const auto& c : comparisons) s.significant += (c.status == "ok" && c.result.significant);
  return s;
}

}  // namespace plantar
