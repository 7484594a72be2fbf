#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsb/prompting.hpp"

namespace tsb {

// Lowercased tokens split at alphanumeric boundaries. Deterministic; shared
// by all text-overlap metrics.
std::vector<std::string> metric_tokenize(std::string_view text);

// ROUGE-N F1 over clipped n-gram overlap. 0 when either side has no n-grams.
double rouge_n(const std::string& candidate, const std::string& reference, std::size_t n);

// ROUGE-L F1 from sentence-level longest-common-subsequence length.
double rouge_l(const std::string& candidate, const std::string& reference);

// METEOR with exact + Porter-stem matching stages (no synonym stage),
// Fmean = 10PR / (R + 9P), penalty = 0.5 * (chunks / matches)^3. Alignment
// is greedy leftmost. 0 when there are no matches.
double meteor(const std::string& candidate, const std::string& reference);

struct EvalCellStats {
    std::size_t n_examples = 0;
    double value = 0.0;            // accuracy in [0,1]
    std::size_t format_failures = 0;
};

// Accuracy with format-failure accounting: a FormatError counts as incorrect
// and increments format_failures. Throws EmptyInput on an empty list.
EvalCellStats accuracy(const std::vector<std::pair<ExtractionResult, std::string>>& results);

struct PercentChange {
    double value = 0.0;
    bool absolute = false;  // baseline was 0: value is an absolute delta
};

// 100 * (value - baseline) / baseline; absolute delta when baseline is 0.
PercentChange percent_change(double baseline, double value);

}  // namespace tsb
