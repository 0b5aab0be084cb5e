#include "laip/parsing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

#include <json.hpp>

#include "laip/errors.hpp"

namespace laip::provider {

namespace {

bool is_number_start(const std::string& s, std::size_t i) {
  char c = s[i];
  if (std::isdigit(static_cast<unsigned char>(c))) return true;
  if ((c == '-' || c == '+' || c == '.') && i + 1 < s.size())
    return std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
           (c != '.' && s[i + 1] == '.' && i + 2 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i + 2])));
  return false;
}

struct NumberToken {
  double value;
  std::size_t begin;
  std::size_t end;  // one past the last consumed char (incl. '%')
};

std::vector<NumberToken> scan_numbers(const std::string& text) {
  std::vector<NumberToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_number_start(text, i)) {
      ++i;
      continue;
    }
    const char* start = text.c_str() + i;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start) {
      ++i;
      continue;
    }
    std::size_t stop = static_cast<std::size_t>(end - text.c_str());
    if (!std::isfinite(v)) {  // "inf"/"nan" spellings are not probabilities
      i = stop;
      continue;
    }
    std::size_t after = stop;
    while (after < text.size() && text[after] == ' ') ++after;
    if (after < text.size() && text[after] == '%') {
      v /= 100.0;
      stop = after + 1;
    }
    out.push_back({v, i, stop});
    i = stop;
  }
  return out;
}

// Lines of the text with their offsets into the original string.
struct Line {
  std::size_t begin;
  std::size_t end;
  std::string_view view;
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back({start, i, std::string_view(text).substr(start, i - start)});
      start = i + 1;
    }
  }
  return lines;
}

// Recognizes an item marker at the start of a line: optional bullet, an
// optional A/H/"Hypothesis" prefix, digits, then one of ": . ) -".
// Returns the 1-based index and the offset just past the marker.
std::optional<std::pair<std::size_t, std::size_t>> item_marker(std::string_view line) {
  std::size_t i = 0;
  auto skip_ws = [&] { while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i; };
  skip_ws();
  if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
    ++i;
    skip_ws();
  }
  if (i < line.size() && (line[i] == 'A' || line[i] == 'H' || line[i] == 'a' || line[i] == 'h')) {
    static constexpr std::string_view kWord = "ypothesis";
    if (line.substr(i + 1, kWord.size()) == kWord) i += 1 + kWord.size();
    else ++i;
    skip_ws();
  }
  std::size_t digits_start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == digits_start || i - digits_start > 6) return std::nullopt;
  std::size_t index = 0;
  for (std::size_t k = digits_start; k < i; ++k) index = index * 10 + (line[k] - '0');
  skip_ws();
  if (i >= line.size()) return std::nullopt;
  if (line[i] != ':' && line[i] != '.' && line[i] != ')' && line[i] != '-') return std::nullopt;
  ++i;
  return std::make_pair(index, i);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

ProbabilityDistribution finalize(std::vector<double> values, const ParseOptions& opts) {
  for (double& v : values) {
    v = std::clamp(v, 0.0, 1.0);
    if (v < opts.floor) v = opts.floor;
  }
  double total = 0.0;
  for (double v : values) total += v;
  if (!(total > 0.0))
    throw ParseFailure("extracted probabilities have no positive mass");
  for (double& v : values) v /= total;
  return ProbabilityDistribution::from_normalized(std::move(values), 1e-6);
}

// First well-formed JSON array of k numbers found in the text, if any.
std::optional<std::vector<double>> try_json_array(const std::string& text, std::size_t k) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    int depth = 0;
    for (std::size_t j = i; j < text.size(); ++j) {
      if (text[j] == '[') ++depth;
      if (text[j] == ']' && --depth == 0) {
        auto j_arr = nlohmann::json::parse(text.substr(i, j - i + 1), nullptr, false);
        if (j_arr.is_array() && j_arr.size() == k) {
          std::vector<double> vals;
          for (const auto& x : j_arr) {
            if (!x.is_number()) break;
            double v = x.get<double>();
            if (!std::isfinite(v)) break;
            vals.push_back(v);
          }
          if (vals.size() == k) return vals;
        }
        break;
      }
    }
  }
  return std::nullopt;
}

// Values from "A<i>: 0.4"-style items when every index 1..k appears once.
// Items may share a line separated by commas or semicolons.
std::optional<std::vector<double>> try_labeled_items(const std::string& text, std::size_t k) {
  std::vector<std::optional<double>> slots(k);
  std::size_t found = 0;
  for (const Line& line : split_lines(text)) {
    std::size_t seg_start = 0;
    std::string_view view = line.view;
    for (std::size_t i = 0; i <= view.size(); ++i) {
      if (i < view.size() && view[i] != ',' && view[i] != ';') continue;
      std::string_view segment = view.substr(seg_start, i - seg_start);
      seg_start = i + 1;
      auto marker = item_marker(segment);
      if (!marker) continue;
      auto [index, offset] = *marker;
      if (index < 1 || index > k) continue;
      auto nums = scan_numbers(std::string(segment.substr(offset)));
      if (nums.empty()) continue;
      if (!slots[index - 1]) {
        slots[index - 1] = nums.front().value;
        ++found;
      }
    }
  }
  if (found != k) return std::nullopt;
  std::vector<double> vals(k);
  for (std::size_t i = 0; i < k; ++i) vals[i] = *slots[i];
  return vals;
}

}  // namespace

std::vector<double> extract_numbers(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : scan_numbers(text)) out.push_back(tok.value);
  return out;
}

ProbabilityDistribution parse_distribution(const std::string& text, std::size_t k,
                                           const ParseOptions& opts) {
  if (k == 0) throw ParseFailure("cannot parse a distribution over zero options");
  if (auto vals = try_json_array(text, k)) return finalize(std::move(*vals), opts);
  if (auto vals = try_labeled_items(text, k)) return finalize(std::move(*vals), opts);
  auto nums = extract_numbers(text);
  if (nums.size() != k)
    throw ParseFailure("expected " + std::to_string(k) + " probabilities, found " +
                       std::to_string(nums.size()));
  return finalize(std::move(nums), opts);
}

ParsedHypotheses parse_hypotheses(const std::string& text, std::size_t expected_n,
                                  const ParseOptions& opts) {
  if (expected_n == 0) throw ParseFailure("expected_n must be positive");
  const auto lines = split_lines(text);

  struct Item {
    std::string body;
  };
  std::vector<Item> items;
  bool in_item = false;
  std::size_t next_index = 1;
  for (const Line& line : lines) {
    auto marker = item_marker(line.view);
    if (marker && marker->first == next_index) {
      items.push_back({trim(line.view.substr(marker->second))});
      ++next_index;
      in_item = true;
    } else if (in_item && !trim(line.view).empty() && !marker) {
      // continuation line
      items.back().body += " " + trim(line.view);
    } else if (marker) {
      // out-of-sequence numbering
      throw ParseFailure("hypothesis list numbering is not sequential");
    }
  }
  if (items.size() != expected_n)
    throw ParseFailure("expected " + std::to_string(expected_n) + " hypotheses, found " +
                       std::to_string(items.size()));

  ParsedHypotheses out;
  std::vector<double> masses;
  for (auto& item : items) {
    auto nums = scan_numbers(item.body);
    if (nums.empty())
      throw ParseFailure("hypothesis item has no probability: " + item.body.substr(0, 60));
    const NumberToken& prob = nums.back();
    masses.push_back(prob.value);
    // Strip the probability and any "(Probability: ...)" style decoration
    // trailing the statement text.
    std::size_t cut = prob.begin;
    static constexpr std::string_view kTrail = " \t-(:,=";
    while (cut > 0 && kTrail.find(item.body[cut - 1]) != std::string_view::npos) --cut;
    for (std::string_view word :
         {std::string_view("probability"), std::string_view("likelihood"),
          std::string_view("prior")}) {
      if (cut < word.size()) continue;
      std::size_t word_at = cut - word.size();
      if (word_at > 0 && kTrail.find(item.body[word_at - 1]) == std::string_view::npos)
        continue;  // must sit on a word boundary
      std::string tail = item.body.substr(word_at, word.size());
      std::transform(tail.begin(), tail.end(), tail.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (tail == word) {
        cut = word_at;
        while (cut > 0 && kTrail.find(item.body[cut - 1]) != std::string_view::npos) --cut;
        break;
      }
    }
    std::string stmt = trim(item.body.substr(0, cut));
    if (stmt.empty())
      throw ParseFailure("hypothesis item has no statement text");
    out.texts.push_back(std::move(stmt));
  }
  out.prior = finalize(std::move(masses), opts);
  return out;
}

std::vector<std::string> parse_numbered_list(const std::string& text, std::size_t k) {
  if (k == 0) throw ParseFailure("cannot parse a list of zero items");
  std::vector<std::string> items;
  for (const Line& line : split_lines(text)) {
    auto marker = item_marker(line.view);
    if (!marker) continue;
    if (marker->first != items.size() + 1) continue;
    std::string body = trim(line.view.substr(marker->second));
    if (body.empty()) continue;
    items.push_back(std::move(body));
  }
  if (items.size() != k)
    throw ParseFailure("expected " + std::to_string(k) + " list items, found " +
                       std::to_string(items.size()));
  return items;
}

}  // namespace laip::provider
