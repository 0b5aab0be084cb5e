#pragma once

#include <span>
#include <vector>

#include "laip/errors.hpp"

namespace laip::metrics {

enum class LogBase { two, natural };

// Jensen-Shannon divergence between two distributions of equal dimension.
// Base-2 logarithms bound it to [0, 1]; 0*log(0) counts as 0.
double jsd(std::span<const double> p, std::span<const double> q,
           LogBase base = LogBase::two);

// Hellinger distance: ||sqrt(p) - sqrt(q)||_2 / sqrt(2), in [0, 1].
double hellinger(std::span<const double> p, std::span<const double> q);

// Product-moment correlation. Requires length >= 3 and non-constant inputs
// (DegenerateInput otherwise).
double pearson_r(std::span<const double> x, std::span<const double> y);

// Rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct TTestResult {
  double t = 0.0;
  int dof = 0;
  double cohens_d = 0.0;
  double p_value = 1.0;
};

// Independent two-sample t test with pooled variance (dof = n + m - 2) and
// Cohen's d computed against the pooled standard deviation.
TTestResult two_sample_t(std::span<const double> a, std::span<const double> b);

// One comparison row between a model configuration and the reference model.
struct MetricReport {
  double jsd = 0.0;
  double hellinger = 0.0;
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double t_stat = 0.0;
  int dof = 0;
  double cohens_d = 0.0;
  double p_value = 1.0;
};

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace laip::metrics
