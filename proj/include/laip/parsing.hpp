#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "laip/simplex.hpp"

namespace laip::provider {

struct ParseOptions {
  // Applied to each extracted probability before normalization so no entry
  // is exactly zero; zero disables the floor (exactness profiles).
  double floor = 1e-6;
};

// Extracts exactly `k` probabilities from free text and returns them
// clamped to [0,1], floored, and normalized. Tries, in order: a JSON array,
// "A<i>: value" / "<i>. value" labeled lines, then all bare numbers in
// reading order. Values suffixed with '%' are divided by 100. Throws
// ParseFailure on a count mismatch or no extractable numbers.
ProbabilityDistribution parse_distribution(const std::string& text, std::size_t k,
                                           const ParseOptions& opts = {});

struct ParsedHypotheses {
  std::vector<std::string> texts;
  ProbabilityDistribution prior;
};

// Parses a numbered hypothesis list with per-item probabilities; requires
// exactly `expected_n` items, each carrying at least one number (the last
// number in the item is taken as its mass). Order is preserved.
ParsedHypotheses parse_hypotheses(const std::string& text, std::size_t expected_n,
                                  const ParseOptions& opts = {});

// Numbered free-text list ("1. ..." / "A3: ...") of exactly k items.
std::vector<std::string> parse_numbered_list(const std::string& text, std::size_t k);

// All finite numbers in the text, percent-aware. Exposed for tests.
std::vector<double> extract_numbers(const std::string& text);

}  // namespace laip::provider
