#include "tsb/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "tsb/errors.hpp"
#include "tsb/stemmer.hpp"

namespace tsb {

std::vector<std::string> metric_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

double f1(double matches, double cand_total, double ref_total) {
    if (cand_total == 0.0 || ref_total == 0.0 || matches == 0.0) return 0.0;
    const double p = matches / cand_total;
    const double r = matches / ref_total;
    return 2.0 * p * r / (p + r);
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

}  // namespace

double rouge_n(const std::string& candidate, const std::string& reference, std::size_t n) {
    const auto cand = metric_tokenize(candidate);
    const auto ref = metric_tokenize(reference);
    if (cand.size() < n || ref.size() < n) return 0.0;
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    std::size_t matches = 0;
    for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    return f1(static_cast<double>(matches), static_cast<double>(cand.size() - n + 1),
              static_cast<double>(ref.size() - n + 1));
}

double rouge_l(const std::string& candidate, const std::string& reference) {
    const auto cand = metric_tokenize(candidate);
    const auto ref = metric_tokenize(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    // Iterative DP with a rolling row.
    std::vector<std::size_t> prev(ref.size() + 1, 0), curr(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            if (cand[i - 1] == ref[j - 1]) curr[j] = prev[j - 1] + 1;
            else curr[j] = std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    const double lcs = static_cast<double>(prev[ref.size()]);
    return f1(lcs, static_cast<double>(cand.size()), static_cast<double>(ref.size()));
}

double meteor(const std::string& candidate, const std::string& reference) {
    const auto cand = metric_tokenize(candidate);
    const auto ref = metric_tokenize(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);
    std::vector<std::size_t> cand_to_ref(cand.size(), kUnmatched);
    std::vector<bool> ref_used(ref.size(), false);

    auto align = [&](auto&& key) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (cand_to_ref[i] != kUnmatched) continue;
            for (std::size_t j = 0; j < ref.size(); ++j) {
                if (ref_used[j] || key(cand[i]) != key(ref[j])) continue;
                cand_to_ref[i] = j;
                ref_used[j] = true;
                break;
            }
        }
    };
    align([](const std::string& w) { return w; });              // exact stage
    align([](const std::string& w) { return porter_stem(w); }); // stemmed stage

    std::size_t matches = 0, chunks = 0;
    std::size_t prev_ref = kUnmatched;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (cand_to_ref[i] == kUnmatched) {
            prev_ref = kUnmatched;
            continue;
        }
        ++matches;
        if (prev_ref == kUnmatched || cand_to_ref[i] != prev_ref + 1) ++chunks;
        prev_ref = cand_to_ref[i];
    }
    if (matches == 0) return 0.0;

    const double m = static_cast<double>(matches);
    const double p = m / static_cast<double>(cand.size());
    const double r = m / static_cast<double>(ref.size());
    const double fmean = 10.0 * p * r / (r + 9.0 * p);
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

EvalCellStats accuracy(const std::vector<std::pair<ExtractionResult, std::string>>& results) {
    if (results.empty()) throw EmptyInput("accuracy over an empty result list");
    EvalCellStats stats;
    stats.n_examples = results.size();
    std::size_t correct = 0;
    for (const auto& [extraction, reference] : results) {
        if (!extraction.ok) {
            ++stats.format_failures;  // counts as incorrect
            continue;
        }
        if (extraction.label == reference) ++correct;
    }
    stats.value = static_cast<double>(correct) / static_cast<double>(results.size());
    return stats;
}

PercentChange percent_change(double baseline, double value) {
    if (baseline == 0.0) return {value - baseline, true};
    return {100.0 * (value - baseline) / baseline, false};
}

}  // namespace tsb
