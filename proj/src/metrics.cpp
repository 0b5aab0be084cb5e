#include "laip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace laip::metrics {

namespace {

void check_dims(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw DimensionMismatch("vectors have different lengths");
  if (p.empty()) throw DimensionMismatch("empty input");
}

double kl_to_mixture(std::span<const double> p, std::span<const double> q, double log_den) {
  // KL(p || (p+q)/2) with the 0*log(0) = 0 convention.
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    double m = 0.5 * (p[i] + q[i]);
    s += p[i] * std::log(p[i] / m) / log_den;
  }
  return s;
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_var(std::span<const double> x, double mu) {
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

double jsd(std::span<const double> p, std::span<const double> q, LogBase base) {
  check_dims(p, q);
  double log_den = base == LogBase::two ? std::log(2.0) : 1.0;
  return 0.5 * kl_to_mixture(p, q, log_den) + 0.5 * kl_to_mixture(q, p, log_den);
}

double hellinger(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    s += d * d;
  }
  return std::sqrt(s) / std::sqrt(2.0);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y);
  if (x.size() < 3) throw DegenerateInput("need at least 3 points");
  double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DegenerateInput("constant input vector");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based ranks
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y);
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  return pearson_r(rx, ry);
}

TTestResult two_sample_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DegenerateInput("each sample needs at least 2 observations");
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double ma = mean(a), mb = mean(b);
  double va = sample_var(a, ma), vb = sample_var(b, mb);
  int dof = static_cast<int>(a.size() + b.size()) - 2;
  double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / static_cast<double>(dof);
  if (pooled <= 0.0) {
    if (ma == mb) return {0.0, dof, 0.0, 1.0};
    throw DegenerateInput("zero pooled variance with unequal means");
  }
  double sp = std::sqrt(pooled);
  TTestResult r;
  r.dof = dof;
  r.t = (ma - mb) / (sp * std::sqrt(1.0 / na + 1.0 / nb));
  r.cohens_d = (ma - mb) / sp;
  boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace laip::metrics
