#include "plantar/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace plantar::stats {

namespace bm = boost::math;

std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::shapiro_wilk: return "shapiro_wilk";
    case TestKind::f_var: return "f_var";
    case TestKind::welch_t: return "welch_t";
  }
  return "?";
}

std::string_view to_string(Metric m) { return m == Metric::rmse ? "rmse" : "r2"; }

Metric parse_metric(std::string_view text) {
  if (text == "rmse") return Metric::rmse;
  if (text == "r2" || text == "R2") return Metric::r2;
  throw Error(Errc::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

double regularized_beta(double a, double b, double x) { return bm::ibeta(a, b, x); }
double regularized_gamma_p(double a, double x) { return bm::gamma_p(a, x); }

double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double sample_var(std::span<const double> x) {
  const double sd = sample_sd(x);
  return sd * sd;
}

// c[0] + c[1] x + ... + c[n-1] x^(n-1)
template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

double normal_quantile(double p) { return bm::quantile(bm::normal(), p); }
double normal_upper_tail(double z, double mu, double sigma) {
  return bm::cdf(bm::complement(bm::normal(mu, sigma), z));
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(Errc::TooSmall, "Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw Error(Errc::TooLarge, "Shapiro-Wilk supports at most 5000 values");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 0.0)) throw Error(Errc::DegenerateSample, "all values are equal");

  // Royston's polynomial approximations (AS R94).
  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  // a[i], i = 0..half-1: weight of the i-th order statistic from each end.
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      const double m = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      a[i] = m;
      summ2 += m * m;
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - a[0] / ssumm2;
    std::size_t first_scaled = 1;
    double fac = 0.0;
    if (n > 5) {
      first_scaled = 2;
      const double a2 = -a[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first_scaled; i < half; ++i) a[i] /= -fac;
  }

  // W is the squared correlation between the ordered data and the
  // antisymmetric coefficient vector.
  auto coef = [&](std::size_t i) {
    const std::size_t j = n - 1 - i;
    if (i < j) return -a[i];
    if (i > j) return a[j];
    return 0.0;
  };
  double sa = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += coef(i);
    sx += x[i] / range;
  }
  sa /= an;
  sx /= an;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double asa = coef(i) - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  // 1 - W, formed this way to keep precision when W is close to 1.
  const double w1 = std::max(0.0, (ssassx - sax) * (ssassx + sax) / (ssa * ssx));

  TestResult r;
  r.kind = TestKind::shapiro_wilk;
  r.statistic = 1.0 - w1;
  r.df = an;

  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(r.statistic)) - stqr), 0.0, 1.0);
    return r;
  }
  if (w1 <= 0.0) {
    r.p_value = 1.0;
    return r;
  }
  double y = std::log(w1);
  const double xx = std::log(an);
  double m = 0.0, s = 0.0;
  if (n <= 11) {
    const double gamma = poly(g, an);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    m = poly(c3, an);
    s = std::exp(poly(c4, an));
  } else {
    m = poly(c5, xx);
    s = std::exp(poly(c6, xx));
  }
  r.p_value = std::clamp(normal_upper_tail(y, m, s), 0.0, 1.0);
  return r;
}

TestResult f_test_var(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::TooSmall, "F-test needs n >= 2 per group");
  if (is_constant(a) || is_constant(b)) {
    throw Error(Errc::DegenerateSample, "F-test needs non-zero variance in both groups");
  }
  double va = sample_var(a), vb = sample_var(b);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  if (va < vb) {
    std::swap(va, vb);
    std::swap(na, nb);
  }
  TestResult r;
  r.kind = TestKind::f_var;
  r.statistic = va / vb;
  r.df = na - 1.0;
  r.df2 = nb - 1.0;
  const double upper = bm::cdf(bm::complement(bm::fisher_f(r.df, r.df2), r.statistic));
  r.p_value = std::min(1.0, 2.0 * upper);
  return r;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::TooSmall, "Welch's t needs n >= 2 per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = sample_var(a) / na;
  const double sb = sample_var(b) / nb;
  if (sa == 0.0 && sb == 0.0) {
    throw Error(Errc::DegenerateBoth, "both groups are constant");
  }
  TestResult r;
  r.kind = TestKind::welch_t;
  const double se2 = sa + sb;
  r.statistic = (mean(a) - mean(b)) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  if (r.statistic == 0.0) {
    r.p_value = 1.0;
  } else {
    const double tail =
        bm::cdf(bm::complement(bm::students_t(r.df), std::abs(r.statistic)));
    r.p_value = std::min(1.0, 2.0 * tail);
  }
  return r;
}

double metric_of(const EvalReport& r, Metric m) { return m == Metric::rmse ? r.rmse_deg : r.r2; }

ComparisonResult compare_conditions(std::span<const EvalReport> reports_a,
                                    std::span<const EvalReport> reports_b, Metric metric,
                                    AngleChannel channel) {
  ComparisonResult out;
  out.metric = metric;
  out.channel = channel;
  for (const auto& r : reports_a) {
    if (r.channel == channel) {
      out.group_a = r.condition;
      out.values_a.push_back(metric_of(r, metric));
    }
  }
  for (const auto& r : reports_b) {
    if (r.channel == channel) {
      out.group_b = r.condition;
      out.values_b.push_back(metric_of(r, metric));
    }
  }
  if (out.values_a.size() < 3 || out.values_b.size() < 3) {
    throw Error(Errc::InsufficientGroup,
                "need >= 3 reports per group for " + std::string(plantar::to_string(channel)) +
                    ", got " + std::to_string(out.values_a.size()) + " and " +
                    std::to_string(out.values_b.size()));
  }
  out.normality_a = shapiro_wilk(out.values_a);
  out.normality_b = shapiro_wilk(out.values_b);
  out.variance_test = f_test_var(out.values_a, out.values_b);
  out.welch = welch_t(out.values_a, out.values_b);
  out.significant = out.welch.p_value < kAlpha;
  return out;
}

}  // namespace plantar::stats
