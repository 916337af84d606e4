#include "polaris/stats_math.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polaris {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

// Series representation of P(a,x), valid/fast for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x), valid/fast for x >= a+1.
double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double mult = d * c;
    h *= mult;
    if (std::fabs(mult - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

double chi_square_pvalue(double chi2, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof must be >= 1");
  if (chi2 <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * chi2);
}

ChiSquare2x2 chi_square_independence_2x2(const std::array<std::array<std::uint64_t, 2>, 2>& o) {
  ChiSquare2x2 r;
  const double a = static_cast<double>(o[0][0]);
  const double b = static_cast<double>(o[0][1]);
  const double c = static_cast<double>(o[1][0]);
  const double d = static_cast<double>(o[1][1]);
  const double n = a + b + c + d;
  if (n == 0.0) throw std::invalid_argument("chi_square_independence_2x2: empty table");
  const double r0 = a + b, r1 = c + d, c0 = a + c, c1 = b + d;
  if (r0 == 0.0 || r1 == 0.0 || c0 == 0.0 || c1 == 0.0) {
    throw std::invalid_argument("chi_square_independence_2x2: zero marginal");
  }
  r.expected = {{{r0 * c0 / n, r0 * c1 / n}, {r1 * c0 / n, r1 * c1 / n}}};
  r.min_expected = std::min({r.expected[0][0], r.expected[0][1], r.expected[1][0], r.expected[1][1]});
  r.low_expected_warning = r.min_expected < 5.0;
  // 2x2 closed form: n (ad - bc)^2 / (row and column marginal product).
  const double det = a * d - b * c;
  r.chi2 = n * det * det / (r0 * r1 * c0 * c1);
  r.p_value = chi_square_pvalue(r.chi2, 1);
  return r;
}

double percentile_interpolated(std::span<const double> sorted_values, double y) {
  if (sorted_values.empty()) throw std::invalid_argument("percentile_interpolated: empty sample");
  if (y < 0.0) y = 0.0;
  if (y > 100.0) y = 100.0;
  const std::size_t k = sorted_values.size();
  if (k == 1) return sorted_values[0];
  const double h = y / 100.0 * static_cast<double>(k - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, k - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::vector<double> midrank_percentiles(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 share the average rank
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    const double pct = 100.0 * (avg_rank - 0.5) / static_cast<double>(n);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = pct;
    i = j + 1;
  }
  return out;
}

std::vector<double> cumulative_percentiles(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double pct = 100.0 * static_cast<double>(j + 1) / static_cast<double>(n);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = pct;
    i = j + 1;
  }
  return out;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean_of(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(n - 1));
}

}  // namespace polaris
