#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "laip/errors.hpp"

namespace laip {

// A normalized probability vector over an indexed option set. Every update
// in the library produces and consumes one of these.
class ProbabilityDistribution {
 public:
  ProbabilityDistribution() = default;

  static ProbabilityDistribution uniform(std::size_t n) {
    ProbabilityDistribution d;
    d.v_.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    return d;
  }

  // Normalizes non-negative masses. Throws DegenerateInput when the total
  // mass is not positive and finite.
  static ProbabilityDistribution from_masses(std::vector<double> masses) {
    double total = 0.0;
    for (double m : masses) {
      if (!std::isfinite(m) || m < 0.0)
        throw DegenerateInput("mass vector has a negative or non-finite entry");
      total += m;
    }
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegenerateInput("mass vector has no positive mass");
    for (double& m : masses) m /= total;
    ProbabilityDistribution d;
    d.v_ = std::move(masses);
    return d;
  }

  // Wraps values that must already sum to 1 within `tol`.
  static ProbabilityDistribution from_normalized(std::vector<double> values,
                                                 double tol = 1e-9) {
    double total = 0.0;
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0)
        throw DegenerateInput("distribution entry negative or non-finite");
      total += v;
    }
    if (std::abs(total - 1.0) > tol)
      throw DegenerateInput("distribution does not sum to 1");
    ProbabilityDistribution d;
    d.v_ = std::move(values);
    return d;
  }

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }

  double sum() const {
    double s = 0.0;
    for (double v : v_) s += v;
    return s;
  }

  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v_.size(); ++i)
      if (v_[i] > v_[best]) best = i;
    return best;
  }

  bool is_simplex(double tol = 1e-9) const {
    if (v_.empty()) return false;
    double s = 0.0;
    for (double v : v_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tol) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= tol;
  }

  bool operator==(const ProbabilityDistribution&) const = default;

 private:
  std::vector<double> v_;
};

}  // namespace laip
