#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cmv/error.hpp"
#include "cmv/models.hpp"
#include "cmv/util.hpp"

namespace cmv::models {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::InvalidConfig, "score/label count mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Midranks over tied scores.
  double pos_rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += mid;
        ++npos;
      }
    }
    i = j;
  }
  const std::size_t nneg = scores.size() - npos;
  if (npos == 0 || nneg == 0) throw Error(Errc::DegenerateLabels, "AUC needs both classes");
  const double np = static_cast<double>(npos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(nneg));
}

double mcnemar(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  if (n <= 25) {
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    const double tail = boost::math::cdf(dist, static_cast<double>(std::min(b, c)));
    return std::min(1.0, 2.0 * tail);
  }
  const double diff = std::max(0.0, std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
  const double stat = diff * diff / static_cast<double>(n);
  const boost::math::chi_squared_distribution<double> dist(1.0);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double mcnemar(const std::vector<bool>& correct_a, const std::vector<bool>& correct_b) {
  if (correct_a.size() != correct_b.size()) throw Error(Errc::InvalidConfig, "prediction count mismatch");
  std::size_t b = 0, c = 0;
  for (std::size_t i = 0; i < correct_a.size(); ++i) {
    if (correct_a[i] && !correct_b[i]) ++b;
    if (!correct_a[i] && correct_b[i]) ++c;
  }
  return mcnemar(b, c);
}

PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   std::span<const int> labels, const Metric& metric, std::size_t n_resamples,
                                   std::uint64_t seed) {
  if (a.size() != b.size() || a.size() != labels.size()) throw Error(Errc::InvalidConfig, "size mismatch");
  PermutationResult r;
  r.observed = metric(a, labels) - metric(b, labels);
  std::mt19937_64 rng(seed);
  std::vector<double> pa(a.size()), pb(b.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n_resamples; ++s) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool swap = (rng() & 1u) != 0;
      pa[i] = swap ? b[i] : a[i];
      pb[i] = swap ? a[i] : b[i];
    }
    const double d = metric(pa, labels) - metric(pb, labels);
    if (d >= r.observed - 1e-12) ++hits;
  }
  r.p = static_cast<double>(hits + 1) / static_cast<double>(n_resamples + 1);
  return r;
}

BootstrapResult bootstrap_auc_test(std::span<const double> scores, std::span<const int> labels,
                                   std::size_t n_resamples, std::uint64_t seed, double null_auc) {
  BootstrapResult r;
  r.observed = auc(scores, labels);
  std::mt19937_64 rng(seed);
  const std::size_t n = scores.size();
  std::vector<double> s(n);
  std::vector<int> l(n);
  std::size_t at_or_below = 0;
  for (std::size_t k = 0; k < n_resamples; ++k) {
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = uniform_below(rng, n);
      s[i] = scores[j];
      l[i] = labels[j];
      (l[i] ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    ++r.valid;
    if (auc(s, l) <= null_auc) ++at_or_below;
  }
  r.p = r.valid ? static_cast<double>(at_or_below) / static_cast<double>(r.valid) : 1.0;
  return r;
}

double student_t_two_sided(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t_distribution<double> dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TTest paired_t_test(std::span<const double> diffs) {
  TTest r;
  r.n = diffs.size();
  if (r.n == 0) return r;
  r.mean_diff = mean_of(diffs);
  if (r.n < 2) return r;
  r.df = static_cast<double>(r.n - 1);
  const double var = sample_var(diffs, r.mean_diff);
  if (var == 0.0) {
    if (r.mean_diff == 0.0) return r;
    r.t = r.mean_diff > 0 ? INFINITY : -INFINITY;
    r.p = 0.0;
    return r;
  }
  r.t = r.mean_diff / std::sqrt(var / static_cast<double>(r.n));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  TTest r;
  r.n = a.size() + b.size();
  if (a.empty() || b.empty()) return r;
  const double ma = mean_of(a), mb = mean_of(b);
  r.mean_diff = ma - mb;
  if (a.size() < 2 || b.size() < 2) return r;
  const double va = sample_var(a, ma) / static_cast<double>(a.size());
  const double vb = sample_var(b, mb) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    if (r.mean_diff == 0.0) return r;
    r.t = r.mean_diff > 0 ? INFINITY : -INFINITY;
    r.p = 0.0;
    r.df = static_cast<double>(r.n - 2);
    return r;
  }
  r.t = r.mean_diff / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace cmv::models
