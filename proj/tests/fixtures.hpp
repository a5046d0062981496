#pragma once

// Test fixtures shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "plantar/core.hpp"

namespace plantar::testing {

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("plantar_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Trial whose four angles are exact affine functions of `n_active` pixels.
/// Each active pixel is an offset sum of incommensurate sinusoids so the
/// columns are far from collinear; every other pixel is zero.
inline TrialDataset linear_world(std::uint64_t seed, std::size_t n_samples = 1500,
                                 std::size_t n_active = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.1, 2.5), phase(0.0, 2.0 * std::numbers::pi),
      coef(-3.0, 3.0);
  std::uniform_int_distribution<std::size_t> pixel(0, kPixelCount - 1);

  std::vector<std::size_t> active;
  while (active.size() < n_active) {
    const std::size_t p = pixel(rng);
    if (std::find(active.begin(), active.end(), p) == active.end()) active.push_back(p);
  }
  std::vector<std::array<double, 6>> waves(n_active);
  for (auto& w : waves) {
    for (auto& v : w) v = (&v - w.data()) % 2 == 0 ? freq(rng) : phase(rng);
  }
  std::array<std::vector<double>, kChannelCount> beta;
  for (auto& b : beta) {
    b.resize(n_active);
    for (auto& v : b) v = coef(rng);
  }

  TrialDataset t;
  t.trial_id = "linear";
  t.participant_id = "L";
  t.frames.resize(n_samples);
  t.angles.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto t_ms = static_cast<std::int64_t>(k) * kDefaultPeriodMs;
    const double s = static_cast<double>(t_ms) / 1000.0;
    t.frames[k].t_ms = t_ms;
    t.angles[k].t_ms = t_ms;
    for (std::size_t i = 0; i < n_active; ++i) {
      const auto& w = waves[i];
      double v = 4.0;
      for (std::size_t h = 0; h < 3; ++h) v += std::sin(2.0 * std::numbers::pi * w[2 * h] * s + w[2 * h + 1]);
      t.frames[k].values[active[i]] = v;
    }
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      double a = 20.0 + 10.0 * static_cast<double>(c);
      for (std::size_t i = 0; i < n_active; ++i) a += beta[c][i] * t.frames[k].values[active[i]];
      t.angles[k].deg[c] = a;
    }
  }
  return t;
}

}  // namespace plantar::testing
