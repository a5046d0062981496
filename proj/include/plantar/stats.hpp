#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "plantar/core.hpp"
#include "plantar/regress.hpp"

namespace plantar::stats {

inline constexpr double kAlpha = 0.05;

enum class TestKind { shapiro_wilk, f_var, welch_t };
enum class Metric { rmse, r2 };

std::string_view to_string(TestKind k);
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

struct TestResult {
  TestKind kind = TestKind::welch_t;
  double statistic = 0.0;
  double p_value = 1.0;
  /// Degrees of freedom; df2 is only used by the F-test. Zero when not applicable.
  double df = 0.0;
  double df2 = 0.0;
};

/// Regularized incomplete beta I_x(a, b) and lower regularized gamma P(a, x).
double regularized_beta(double a, double b, double x);
double regularized_gamma_p(double a, double x);

/// Shapiro-Wilk W with Royston's (AS R94) coefficients and p-value.
/// Requires 3 <= n <= 5000 and a non-constant sample.
TestResult shapiro_wilk(std::span<const double> sample);

/// Two-sided variance-ratio test; larger sample variance on top, doubled
/// upper tail capped at 1.
TestResult f_test_var(std::span<const double> a, std::span<const double> b);

/// Welch's unequal-variance t-test, Welch-Satterthwaite df, two-sided p.
TestResult welch_t(std::span<const double> a, std::span<const double> b);

struct ComparisonResult {
  Metric metric = Metric::r2;
  AngleChannel channel = AngleChannel::ankle;
  Condition group_a = Condition::A_nothing;
  Condition group_b = Condition::B_rubber;
  std::vector<double> values_a;
  std::vector<double> values_b;
  TestResult normality_a;
  TestResult normality_b;
  TestResult variance_test;
  TestResult welch;
  bool significant = false;  // welch.p_value < kAlpha
};

double metric_of(const EvalReport& r, Metric m);

/// Pools the metric for `channel` from each group and runs Shapiro-Wilk per
/// group, the F-test and Welch's t. Each group needs at least 3 reports.
ComparisonResult compare_conditions(std::span<const EvalReport> reports_a,
                                    std::span<const EvalReport> reports_b, Metric metric,
                                    AngleChannel channel);

double mean(std::span<const double> x);
/// Sample standard deviation (divisor n - 1).
double sample_sd(std::span<const double> x);

}  // namespace plantar::stats
