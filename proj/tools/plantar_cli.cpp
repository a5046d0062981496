// plantar: command-line front end for the plantar-pressure joint-angle toolkit.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "plantar/core.hpp"
#include "plantar/grid_search.hpp"
#include "plantar/io.hpp"
#include "plantar/pipeline.hpp"
#include "plantar/regress.hpp"
#include "plantar/stats.hpp"
#include "plantar/synth.hpp"

namespace fs = std::filesystem;
using namespace plantar;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr const char* kOutDirEnv = "PLANTAR_OUT_DIR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flags shared by every command that trains or scores a model.
struct ConfigFlags {
  double lambda = 10.0;
  double threshold = 0.15;
  double warmup_s = 3.0;
  std::string split = "5:1";
  std::int64_t period_ms = kDefaultPeriodMs;
  std::string config_file;

  void add_to(CLI::App* app) {
    app->add_option("--lambda", lambda, "Ridge regularization strength")->capture_default_str();
    app->add_option("--threshold", threshold, "Correlation threshold for pixel selection")
        ->capture_default_str();
    app->add_option("--warmup", warmup_s, "Seconds dropped from the start of each trial")
        ->capture_default_str();
    app->add_option("--split", split, "Training:validation ratio")->capture_default_str();
    app->add_option("--period", period_ms, "Sample period in ms")->capture_default_str();
    app->add_option("--config", config_file,
                    "JSON config; its keys override the flags above");
  }

  /// Defaults < flags < config file.
  std::pair<PipelineConfig, std::int64_t> resolve() const {
    PipelineConfig c;
    c.lambda = lambda;
    c.threshold = threshold;
    c.warmup_s = warmup_s;
    const auto colon = split.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(split);
      c.split_train = std::stoi(split.substr(0, colon));
      c.split_validation = std::stoi(split.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("--split expects TRAIN:VALIDATION, e.g. 5:1");
    }
    std::int64_t period = period_ms;
    if (!config_file.empty()) apply_config_json(io::read_text(config_file), c, period);
    validate_config(c, period);
    return {c, period};
  }
};

fs::path output_dir(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  throw UsageError(std::string("no output directory: pass --out or set ") + kOutDirEnv);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text(path, text);
  }
}

// ---------------------------------------------------------------------------

struct SynthCmd {
  std::vector<std::string> conditions{"a", "b", "c"};
  int participants = 7;
  std::vector<int> trials{5, 3, 3};
  std::uint64_t seed = 1;
  double duration_s = 30.0;
  std::size_t workers = 0;
  std::string out;

  int run() const {
    synth::BatchSpec spec;
    spec.participants = participants;
    spec.seed = seed;
    spec.squat.duration_s = duration_s;
    if (trials.size() != 1 && trials.size() != 3) {
      throw UsageError("--trials-per-condition takes one count or three (A B C)");
    }
    std::array<int, 3> selected{0, 0, 0};
    for (const auto& name : conditions) selected[static_cast<std::size_t>(parse_condition(name))] = 1;
    for (std::size_t i = 0; i < 3; ++i) {
      spec.trials_per_condition[i] = selected[i] ? (trials.size() == 1 ? trials[0] : trials[i]) : 0;
    }
    const auto plan = synth::plan_batch(spec);
    const fs::path dir = output_dir(out);
    fs::create_directories(dir);

    RunManifest manifest;
    for (const auto& t : plan) {
      manifest.trials.push_back({t.trial_id, t.participant_id, t.condition,
                                 dir / (t.trial_id + "_pressure.csv"),
                                 dir / (t.trial_id + "_angles.csv"), false});
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::optional<Error> first_error;
    auto worker = [&] {
      for (std::size_t i = next++; i < plan.size(); i = next++) {
        try {
          const TrialDataset trial = synth::generate_planned(plan[i], spec);
          io::save_trial(trial, manifest.trials[i].pressure, manifest.trials[i].angles);
        } catch (const Error& e) {
          std::lock_guard lock(err_mutex);
          if (!first_error) first_error = e;
        }
      }
    };
    const std::size_t n = std::min(resolve_workers(workers), std::max<std::size_t>(1, plan.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (first_error) throw *first_error;

    io::write_text(dir / "manifest.json", manifest_json(manifest, dir));
    std::cout << "wrote " << plan.size() << " trials and " << (dir / "manifest.json").string()
              << "\n";
    return 0;
  }
};

struct TrainCmd {
  std::string pressure, angles, channel, condition = "a", out;
  bool resample = false;
  ConfigFlags flags;

  int run() const {
    const auto [config, period] = flags.resolve();
    const AngleChannel ch = parse_channel(channel);
    const TrialDataset trial = io::load_trial(
        {pressure, angles, parse_condition(condition), "", fs::path(pressure).stem().string(), period,
         resample});
    const TrialFit fit = train_eval_trial(trial, config);
    const auto& outcome = fit.channels[index_of(ch)];
    if (!outcome.ok()) throw Error(*outcome.error, outcome.error_message);
    io::save_model(*outcome.model, out);
    std::cout << "channel=" << to_string(ch) << " pixels=" << fit.selection.size()
              << " rmse_deg=" << io::format_double(outcome.report->rmse_deg)
              << " r2=" << io::format_double(outcome.report->r2) << "\n";
    return 0;
  }
};

TrialDataset frames_only(const std::string& pressure, std::int64_t period) {
  const RawSeries raw = io::read_pressure_series(pressure);
  TrialDataset t;
  t.period_ms = period;
  for (const auto& s : raw.samples) {
    PressureFrame f;
    f.t_ms = static_cast<std::int64_t>(std::llround(s.t_ms));
    if (static_cast<double>(f.t_ms) != s.t_ms) {
      throw Error(Errc::NonUniformSampling, "fractional timestamp " + io::format_double(s.t_ms));
    }
    f.values = s.values;
    validate_frame(f);
    t.frames.push_back(std::move(f));
  }
  return t;
}

struct PredictCmd {
  std::string model, pressure, out;
  std::int64_t period_ms = kDefaultPeriodMs;

  int run() const {
    const RidgeModel m = io::load_model(model);
    const TrialDataset t = frames_only(pressure, period_ms);
    const auto est = plantar::predict(m, t.frames);
    std::string csv = "t_ms," + std::string(to_string(m.channel)) + "_deg\n";
    for (std::size_t k = 0; k < est.size(); ++k) {
      csv += std::to_string(t.frames[k].t_ms) + "," + io::format_double(est[k]) + "\n";
    }
    write_or_print(out, csv);
    return 0;
  }
};

struct EvalCmd {
  std::string model, pressure, angles, condition = "a", trial_id, participant, segment = "validation",
                                      out;
  bool resample = false;
  ConfigFlags flags;

  int run() const {
    const auto [config, period] = flags.resolve();
    const RidgeModel m = io::load_model(model);
    const TrialDataset trial = io::load_trial(
        {pressure, angles, parse_condition(condition), participant,
         trial_id.empty() ? fs::path(pressure).stem().string() : trial_id, period, resample});
    IndexRange range{0, trial.size()};
    if (segment == "validation") range = split_trial(trial.size(), period, config).validation;
    const std::span<const PressureFrame> frames(trial.frames.data() + range.first, range.count);
    const auto measured = trial.angle_series(m.channel, range.first, range.count);
    const auto estimated = plantar::predict(m, frames);
    io::EvalRecord rec;
    rec.report = {trial.trial_id, trial.participant_id, m.channel, trial.condition,
                  rmse(measured, estimated), 0.0, range.count};
    try {
      rec.report.r2 = r_squared(measured, estimated);
    } catch (const Error& e) {
      rec.status = std::string(to_string(e.code()));
      rec.reason = e.what();
    }
    write_or_print(out, io::eval_records_csv(std::span(&rec, 1)));
    return 0;
  }
};

std::vector<io::EvalRecord> read_group(const fs::path& where) {
  std::vector<fs::path> files;
  if (fs::is_directory(where)) {
    for (const auto& e : fs::directory_iterator(where)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(where);
  }
  std::vector<io::EvalRecord> out;
  for (const auto& f : files) {
    const std::string text = io::read_text(f);
    if (fs::is_directory(where) && text.rfind("trial_id,", 0) != 0) continue;  // not a report
    for (auto& r : io::parse_eval_records_csv(text)) {
      if (r.ok()) out.push_back(std::move(r));
    }
  }
  if (out.empty()) throw Error(Errc::EmptySeries, "no evaluation reports under " + where.string());
  return out;
}

struct StatsCmd {
  std::string metric = "r2", group_a, group_b, channel = "all", out;

  int run() const {
    const auto m = stats::parse_metric(metric);
    std::vector<EvalReport> a, b;
    for (const auto& r : read_group(group_a)) a.push_back(r.report);
    for (const auto& r : read_group(group_b)) b.push_back(r.report);
    std::vector<AngleChannel> channels(kAllChannels.begin(), kAllChannels.end());
    if (channel != "all") channels = {parse_channel(channel)};
    std::vector<io::ComparisonRecord> rows;
    for (AngleChannel ch : channels) {
      io::ComparisonRecord rec;
      rec.result.metric = m;
      rec.result.channel = ch;
      try {
        rec.result = stats::compare_conditions(a, b, m, ch);
      } catch (const Error& e) {
        if (channels.size() == 1) throw;
        rec.status = std::string(to_string(e.code()));
        rec.reason = e.what();
      }
      rows.push_back(std::move(rec));
    }
    write_or_print(out, io::comparisons_csv(rows));
    return 0;
  }
};

struct WeightmapCmd {
  std::string model, out;

  int run() const {
    fs::path prefix = out;
    if (prefix.extension() == ".csv" || prefix.extension() == ".pgm") prefix.replace_extension();
    const auto map = io::export_weight_map(io::load_model(model), prefix);
    std::size_t nonzero = 0;
    for (double v : map.values) nonzero += v > 0.0;
    std::cout << "wrote " << prefix.string() << ".csv and .pgm (" << nonzero << " weighted cells)\n";
    return 0;
  }
};

struct GridsearchCmd {
  std::string manifest, out;
  std::vector<double> thresholds{0.10, 0.15, 0.20, 0.25};
  ConfigFlags flags;

  int run() const {
    const auto [config, period] = flags.resolve();
    RunManifest defaults;
    defaults.config = config;
    defaults.period_ms = period;
    const RunManifest m = load_manifest(manifest, defaults);
    std::vector<TrialDataset> trials;
    for (const auto& t : m.trials) {
      if (t.condition != Condition::A_nothing) continue;
      trials.push_back(io::load_trial(
          {t.pressure, t.angles, t.condition, t.participant, t.id, m.period_ms, t.resample}));
    }
    if (trials.empty()) throw UsageError("manifest has no condition-A trials");
    const auto result = grid_search_threshold(trials, thresholds, m.config);
    std::string csv = "threshold,mean_r2,chosen\n";
    for (const auto& s : result.scores) {
      csv += io::format_double(s.threshold) + "," + (s.mean_r2 ? io::format_double(*s.mean_r2) : "") +
             "," + (s.threshold == result.chosen ? "true" : "false") + "\n";
    }
    write_or_print(out, csv);
    return 0;
  }
};

struct PipelineCmd {
  std::string manifest, out;
  std::size_t workers = 0;
  bool no_weightmaps = false;
  ConfigFlags flags;

  int run() const {
    const auto [config, period] = flags.resolve();
    RunManifest defaults;
    defaults.config = config;
    defaults.period_ms = period;
    RunManifest m = load_manifest(manifest, defaults);
    // An explicit --config file outranks the manifest's own config block.
    if (!flags.config_file.empty()) apply_config_json(io::read_text(flags.config_file), m.config, m.period_ms);
    if (m.trials.empty()) throw UsageError("manifest lists no trials");
    const fs::path dir = output_dir(out);
    const auto s = run_pipeline(m, dir, {workers, !no_weightmaps});
    std::cout << "trials=" << s.trials << " failed=" << s.failed_trials << " reports=" << s.reports
              << " comparisons=" << s.comparisons << " significant=" << s.significant
              << " out=" << dir.string() << "\n";
    if (s.failed_trials == s.trials) {
      std::cerr << "error: ALL_TRIALS_FAILED: every trial failed; see " << (dir / "eval_reports.csv").string()
                << "\n";
      return kExitFailure;
    }
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-angle estimation from plantar pressure distributions"};
  app.require_subcommand(1);
  std::function<int()> action;

  SynthCmd synth_cmd;
  auto* synth = app.add_subcommand("synth", "Generate synthetic squat trials and a manifest");
  synth->add_option("--condition", synth_cmd.conditions, "Conditions to generate (a, b, c)")
      ->capture_default_str();
  synth->add_option("--participants", synth_cmd.participants)->capture_default_str();
  synth->add_option("--trials-per-condition", synth_cmd.trials,
                    "One count for every condition, or three counts (A B C)")
      ->capture_default_str();
  synth->add_option("--seed", synth_cmd.seed)->capture_default_str();
  synth->add_option("--duration", synth_cmd.duration_s, "Trial length in seconds")->capture_default_str();
  synth->add_option("--workers", synth_cmd.workers, "0 = all cores")->capture_default_str();
  synth->add_option("--out", synth_cmd.out, std::string("Output directory (default $") + kOutDirEnv + ")");
  synth->callback([&] { action = [&] { return synth_cmd.run(); }; });

  TrainCmd train_cmd;
  auto* train = app.add_subcommand("train", "Fit one channel's readout on a trial");
  train->add_option("--pressure", train_cmd.pressure)->required();
  train->add_option("--angles", train_cmd.angles)->required();
  train->add_option("--channel", train_cmd.channel, "ankle, knee, hip or upper")->required();
  train->add_option("--condition", train_cmd.condition)->capture_default_str();
  train->add_flag("--resample", train_cmd.resample, "Regrid irregular timestamps");
  train->add_option("--out", train_cmd.out, "Model file")->required();
  train_cmd.flags.add_to(train);
  train->callback([&] { action = [&] { return train_cmd.run(); }; });

  PredictCmd predict_cmd;
  auto* predict = app.add_subcommand("predict", "Estimate angles from a pressure file");
  predict->add_option("--model", predict_cmd.model)->required();
  predict->add_option("--pressure", predict_cmd.pressure)->required();
  predict->add_option("--period", predict_cmd.period_ms)->capture_default_str();
  predict->add_option("--out", predict_cmd.out, "CSV path (default stdout)");
  predict->callback([&] { action = [&] { return predict_cmd.run(); }; });

  EvalCmd eval_cmd;
  auto* eval = app.add_subcommand("eval", "Score a model against measured angles");
  eval->add_option("--model", eval_cmd.model)->required();
  eval->add_option("--pressure", eval_cmd.pressure)->required();
  eval->add_option("--angles", eval_cmd.angles)->required();
  eval->add_option("--condition", eval_cmd.condition)->capture_default_str();
  eval->add_option("--trial-id", eval_cmd.trial_id);
  eval->add_option("--participant", eval_cmd.participant);
  eval->add_option("--segment", eval_cmd.segment, "validation or all")
      ->check(CLI::IsMember({"validation", "all"}))
      ->capture_default_str();
  eval->add_flag("--resample", eval_cmd.resample);
  eval->add_option("--out", eval_cmd.out, "CSV path (default stdout)");
  eval_cmd.flags.add_to(eval);
  eval->callback([&] { action = [&] { return eval_cmd.run(); }; });

  StatsCmd stats_cmd;
  auto* stats = app.add_subcommand("stats", "Compare two groups of evaluation reports");
  stats->add_option("--metric", stats_cmd.metric, "rmse or r2")->capture_default_str();
  stats->add_option("--group-a", stats_cmd.group_a, "Report CSV or directory of them")->required();
  stats->add_option("--group-b", stats_cmd.group_b, "Report CSV or directory of them")->required();
  stats->add_option("--channel", stats_cmd.channel)->capture_default_str();
  stats->add_option("--out", stats_cmd.out, "CSV path (default stdout)");
  stats->callback([&] { action = [&] { return stats_cmd.run(); }; });

  WeightmapCmd weightmap_cmd;
  auto* weightmap = app.add_subcommand("weightmap", "Export |w| as CSV and PGM");
  weightmap->add_option("--model", weightmap_cmd.model)->required();
  weightmap->add_option("--out", weightmap_cmd.out, "Output prefix")->required();
  weightmap->callback([&] { action = [&] { return weightmap_cmd.run(); }; });

  GridsearchCmd grid_cmd;
  auto* grid = app.add_subcommand("gridsearch", "Score correlation thresholds on condition-A trials");
  grid->add_option("--manifest", grid_cmd.manifest)->required();
  grid->add_option("--thresholds", grid_cmd.thresholds)->delimiter(',')->capture_default_str();
  grid->add_option("--out", grid_cmd.out, "CSV path (default stdout)");
  grid_cmd.flags.add_to(grid);
  grid->callback([&] { action = [&] { return grid_cmd.run(); }; });

  PipelineCmd pipe_cmd;
  auto* pipe = app.add_subcommand("pipeline", "Train, evaluate and compare every trial in a manifest");
  pipe->add_option("--manifest", pipe_cmd.manifest)->required();
  pipe->add_option("--out", pipe_cmd.out, std::string("Output directory (default $") + kOutDirEnv + ")");
  pipe->add_option("--workers", pipe_cmd.workers, "0 = all cores; 1 is bitwise reproducible")
      ->capture_default_str();
  pipe->add_flag("--no-weightmaps", pipe_cmd.no_weightmaps);
  pipe_cmd.flags.add_to(pipe);
  pipe->callback([&] { action = [&] { return pipe_cmd.run(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: USAGE: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: USAGE: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: INTERNAL: " << e.what() << "\n";
    return kExitFailure;
  }
}
