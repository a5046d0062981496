// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "plantar/grid_search.hpp"
#include "plantar/io.hpp"
#include "plantar/pipeline.hpp"
#include "plantar/regress.hpp"
#include "plantar/resample.hpp"
#include "plantar/stats.hpp"
#include "plantar/synth.hpp"

using namespace plantar;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome ridge_exactness() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> pixels(10, 100), steps(100, 1000);
  std::normal_distribution<double> n;
  const double lambdas[] = {0.1, 10.0, 1000.0};
  double worst = 0.0, ridge_time = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t np = pixels(rng), ns = steps(rng);
    const double lambda = lambdas[i % 3];
    DesignMatrix P(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(ns));
    oracle::Dense dense{np, ns, std::vector<double>(np * ns)};
    for (std::size_t r = 0; r < np; ++r) {
      for (std::size_t c = 0; c < ns; ++c) {
        dense.a[r * ns + c] = P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = n(rng);
      }
    }
    std::vector<double> theta(ns);
    for (auto& t : theta) t = n(rng);

    const auto t0 = Clock::now();
    const Eigen::VectorXd w = ridge_fit(P, theta, lambda);
    ridge_time += seconds_since(t0);
    const auto ref = oracle::ridge_gd(dense, theta, lambda);
    for (std::size_t r = 0; r < np; ++r) {
      worst = std::max(worst, std::abs(w[static_cast<Eigen::Index>(r)] - ref[r]));
    }
  }
  return {worst < 1e-6 && ridge_time < 5.0,
          fmt("50 instances, max |w - w_gd| = %.3g (< 1e-6), ridge time %.3f s (< 5 s)", worst, ridge_time)};
}

// 2 -------------------------------------------------------------------------
Outcome linear_world() {
  const TrialDataset t = testing::linear_world(2);
  const TrialFit fit = train_eval_trial(t, {});
  double worst = 1.0;
  for (const auto& ch : fit.channels) {
    if (!ch.ok()) return {false, "channel " + std::string(to_string(ch.channel)) + " failed: " + ch.error_message};
    worst = std::min(worst, ch.report->r2);
  }
  return {worst > 0.999, fmt("min validation R^2 over 4 channels = %.6f (> 0.999), %zu pixels selected",
                             worst, fit.selection.size())};
}

// 3 -------------------------------------------------------------------------
Outcome ablation() {
  const auto t0 = Clock::now();
  const synth::BatchSpec spec;
  const auto plan = synth::plan_batch(spec);
  std::vector<TrialJob> jobs;
  for (const auto& p : plan) {
    // Each job generates its trial on the worker and drops it after fitting.
    jobs.push_back({p.trial_id, p.participant_id, p.condition, [&spec, p] {
                      return synth::generate_planned(p, spec);
                    }});
  }
  const auto records = evaluate_trials(jobs, {}, 0);
  const double elapsed = seconds_since(t0);

  std::size_t ok = 0;
  for (const auto& r : records) ok += r.ok();
  bool pass = plan.size() == 77 && ok == 308 && elapsed < 60.0;
  std::ostringstream detail;
  detail << plan.size() << " trials, " << ok << "/308 reports, " << fmt("%.1f s (< 60 s)", elapsed);

  detail << "; A mean R^2";
  for (AngleChannel ch : kAllChannels) {
    std::vector<double> v;
    for (const auto& r : records) {
      if (r.ok() && r.report.condition == Condition::A_nothing && r.report.channel == ch) v.push_back(r.report.r2);
    }
    const double m = stats::mean(v);
    pass = pass && m >= 0.85;
    detail << " " << to_string(ch) << fmt("=%.3f", m);
  }
  detail << " (>= 0.85); Welch p on R^2";
  for (const auto& c : compare_all(records)) {
    if (c.result.metric != stats::Metric::r2 || c.result.channel == AngleChannel::upper) continue;
    const bool sig = c.status == "ok" && c.result.welch.p_value < 0.05;
    pass = pass && sig;
    detail << " A-" << condition_letter(c.result.group_b) << "/" << to_string(c.result.channel)
           << fmt("=%.2g", c.result.welch.p_value);
  }
  detail << " (< 0.05)";
  return {pass, detail.str()};
}

// 4 -------------------------------------------------------------------------
Outcome statistics() {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const auto w = stats::welch_t(a, b);
  const auto sw3 = stats::shapiro_wilk(a);
  // Reference sample, W and p from scipy.stats.shapiro.
  const std::vector<double> ref{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236};
  const auto sw = stats::shapiro_wilk(ref);
  const double dw = std::abs(sw.statistic - 0.7888146948631716);
  const double dp = std::abs(sw.p_value - 0.006703814061898823);
  const bool pass = std::abs(w.statistic + 1.2247) < 1e-4 && std::abs(w.df - 4.0) < 1e-9 &&
                    std::abs(sw3.statistic - 1.0) < 1e-9 && dw < 1e-3 && dp < 1e-3;
  return {pass, fmt("welch t=%.6f df=%.12g; SW(1,2,3) W=%.12g; reference |dW|=%.2g |dp|=%.2g (< 1e-3)",
                    w.statistic, w.df, sw3.statistic, dw, dp)};
}

// 5 -------------------------------------------------------------------------
Outcome resampling() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> gap(0.3, 45.0), coef(-50.0, 50.0), value(-1e3, 1e3);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double slope = coef(rng) / 100.0, offset = coef(rng);
    RawSeries s;
    for (double t = 0.0; t < 2000.0; t += gap(rng)) s.samples.push_back({t, {slope * t + offset}});
    const auto end = static_cast<std::int64_t>(std::floor(s.end()));
    const auto out = resample_linear(s, 20, 0, end);
    for (std::size_t k = 0; k < out.size(); ++k) {
      worst = std::max(worst, std::abs(out[k][0] - (slope * 20.0 * static_cast<double>(k) + offset)));
    }
  }
  std::size_t violations = 0, cases = 0;
  while (cases < 10000) {
    RawSeries s;
    double t = 0.0;
    for (int i = 0; i < 12; ++i, t += gap(rng)) s.samples.push_back({t, {value(rng)}});
    const auto out = resample_linear(s, 20, 0, static_cast<std::int64_t>(std::floor(s.end())));
    std::size_t lo = 0;
    for (std::size_t k = 0; k < out.size() && cases < 10000; ++k, ++cases) {
      const double tk = 20.0 * static_cast<double>(k);
      while (lo + 1 < s.samples.size() && s.samples[lo + 1].t_ms <= tk) ++lo;
      const std::size_t hi = std::min(lo + 1, s.samples.size() - 1);
      const double a = s.samples[lo].values[0], b = s.samples[hi].values[0];
      violations += out[k][0] < std::min(a, b) || out[k][0] > std::max(a, b);
    }
  }
  return {worst < 1e-12 && violations == 0,
          fmt("affine max error %.3g (< 1e-12); %zu/%zu bracket violations", worst, violations, cases)};
}

// 6 -------------------------------------------------------------------------
Outcome plateau() {
  synth::BatchSpec spec;
  spec.trials_per_condition = {1, 0, 0};
  std::vector<TrialDataset> trials;
  for (const auto& p : synth::plan_batch(spec)) trials.push_back(synth::generate_planned(p, spec));
  const std::vector<double> grid{0.10, 0.15, 0.20, 0.25};
  const auto r = grid_search_threshold(trials, grid, {});
  double lo = 1e300, hi = -1e300;
  std::ostringstream detail;
  for (const auto& s : r.scores) {
    if (!s.mean_r2) return {false, "a candidate emptied the selection"};
    lo = std::min(lo, *s.mean_r2);
    hi = std::max(hi, *s.mean_r2);
    detail << fmt("%.2f:%.4f ", s.threshold, *s.mean_r2);
  }
  detail << fmt("spread %.4f (< 0.02), chosen %.2f, %zu trials", hi - lo, r.chosen, trials.size());
  return {hi - lo < 0.02, detail.str()};
}

// 7 -------------------------------------------------------------------------
Outcome round_trip() {
  const fs::path dir = testing::scratch_dir("acceptance_roundtrip");
  synth::SquatConfig squat;
  squat.duration_s = 10.0;
  const TrialDataset trial = synth::generate_trial(31, Condition::A_nothing, squat, synth::make_foot_model(31));
  io::save_trial(trial, dir / "p.csv", dir / "a.csv");
  const TrialDataset back = io::load_trial({dir / "p.csv", dir / "a.csv"});
  double trial_err = 0.0;
  bool times_exact = back.size() == trial.size();
  for (std::size_t k = 0; times_exact && k < trial.size(); ++k) {
    times_exact = back.frames[k].t_ms == trial.frames[k].t_ms && back.angles[k].t_ms == trial.angles[k].t_ms;
    for (std::size_t i = 0; i < kPixelCount; ++i) {
      trial_err = std::max(trial_err, std::abs(back.frames[k].values[i] - trial.frames[k].values[i]));
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      trial_err = std::max(trial_err, std::abs(back.angles[k].deg[c] - trial.angles[k].deg[c]));
    }
  }

  std::mt19937_64 rng(77);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double pred_err = 0.0;
  bool indices_exact = true;
  for (int i = 0; i < 100; ++i) {
    RidgeModel m;
    m.channel = kAllChannels[static_cast<std::size_t>(i) % kChannelCount];
    m.lambda = std::exp(4.0 * n(rng));
    m.selection.threshold = 0.5 * u(rng);
    for (std::size_t p = 0; p < kPixelCount; ++p) {
      if (u(rng) < 0.05) m.selection.indices.push_back(p);
    }
    if (m.selection.indices.empty()) m.selection.indices.push_back(1000);
    for (std::size_t j = 0; j < m.selection.size(); ++j) {
      m.pressure_z.mean.push_back(std::abs(n(rng)) * 3.0);
      m.pressure_z.std.push_back(0.01 + std::abs(n(rng)));
    }
    m.angle_z = {{40.0 * n(rng)}, {0.1 + 10.0 * u(rng)}};
    m.weights.resize(static_cast<Eigen::Index>(m.selection.size()));
    for (auto& w : m.weights) w = n(rng) / std::sqrt(static_cast<double>(m.selection.size()));

    const fs::path path = dir / ("m" + std::to_string(i) + ".txt");
    io::save_model(m, path);
    const RidgeModel loaded = io::load_model(path);
    indices_exact = indices_exact && loaded.selection.indices == m.selection.indices;
    const auto a = predict(m, trial.frames);
    const auto b = predict(loaded, trial.frames);
    for (std::size_t k = 0; k < a.size(); ++k) pred_err = std::max(pred_err, std::abs(a[k] - b[k]));
  }
  fs::remove_all(dir);
  return {times_exact && indices_exact && trial_err < 1e-9 && pred_err < 1e-9,
          fmt("trial max error %.3g (< 1e-9), timestamps %s; 100 models: indices %s, max prediction diff %.3g deg "
              "(< 1e-9)",
              trial_err, times_exact ? "exact" : "DIFFER", indices_exact ? "exact" : "DIFFER", pred_err)};
}

// 8 -------------------------------------------------------------------------
Outcome determinism() {
  const fs::path dir = testing::scratch_dir("acceptance_determinism");
  const std::string cli = PLANTAR_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (dir / "log.txt").string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  if (run("synth --participants 3 --trials-per-condition 3 --duration 12 --seed 8 --out \"" +
          (dir / "data").string() + "\"") != 0) {
    return {false, "synth failed: " + io::read_text(dir / "log.txt")};
  }
  for (const char* out : {"run1", "run2"}) {
    if (run("pipeline --workers 1 --manifest \"" + (dir / "data" / "manifest.json").string() + "\" --out \"" +
            (dir / out).string() + "\"") != 0) {
      return {false, std::string("pipeline failed: ") + io::read_text(dir / "log.txt")};
    }
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "run1")) {
    if (!e.is_regular_file()) continue;
    const fs::path other = dir / "run2" / fs::relative(e.path(), dir / "run1");
    ++files;
    if (!fs::exists(other) || io::read_text(e.path()) != io::read_text(other)) ++differing;
  }
  fs::remove_all(dir);
  return {files > 3 && differing == 0,
          fmt("CLI pipeline --workers 1 twice: %zu report files, %zu differ", files, differing)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"ridge exactness", ridge_exactness}, {"linear-world recovery", linear_world},
      {"condition ablation", ablation},     {"statistics fixtures", statistics},
      {"resampling exactness", resampling}, {"threshold plateau", plateau},
      {"round-trip fidelity", round_trip},  {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index << "] " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << 8 - failed << "/8 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
