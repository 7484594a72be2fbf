#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "testutil.hpp"
#include "tsb/errors.hpp"
#include "tsb/scoring.hpp"
#include "tsb/stemmer.hpp"

using namespace tsb;
namespace tu = testutil;

TEST_CASE("metric tokenization lowercases and splits at alphanumeric boundaries") {
    CHECK(metric_tokenize("Police kill gunman!") ==
          std::vector<std::string>{"police", "kill", "gunman"});
    CHECK(metric_tokenize("it's a 2-part answer") ==
          std::vector<std::string>{"it", "s", "a", "2", "part", "answer"});
    CHECK(metric_tokenize("   ").empty());
    CHECK(metric_tokenize("").empty());
}

TEST_CASE("rouge hand-computed values") {
    CHECK(rouge_n("the cat sat", "the cat", 1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(rouge_n("the cat sat on the mat", "the cat sat on the mat", 1) == 1.0);
    CHECK(rouge_n("a b c d", "a b c e", 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rouge_n("completely different words", "nothing shared here", 1) == 0.0);
    CHECK(rouge_n("one two", "one two three", 3) == 0.0);  // too short for trigrams
    CHECK(rouge_l("a b c d", "a c b d") == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(rouge_l("same text", "same text") == 1.0);
    CHECK(rouge_l("", "anything") == 0.0);

    // Repetition is clipped: candidate "the the the" can match "the" once.
    CHECK(rouge_n("the the the", "the", 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rouge agrees with the independent oracle on all fixture pairs") {
    for (const auto& [cand, ref] : tu::metric_pairs()) {
        CAPTURE(cand);
        CAPTURE(ref);
        CHECK(rouge_n(cand, ref, 1) == doctest::Approx(tu::oracle_rouge_n(cand, ref, 1)).epsilon(1e-12));
        CHECK(rouge_n(cand, ref, 2) == doctest::Approx(tu::oracle_rouge_n(cand, ref, 2)).epsilon(1e-12));
        CHECK(rouge_l(cand, ref) == doctest::Approx(tu::oracle_rouge_l(cand, ref)).epsilon(1e-12));
    }
}

TEST_CASE("rouge F1 is symmetric and bounded") {
    for (const auto& [cand, ref] : tu::metric_pairs()) {
        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            const double ab = rouge_n(cand, ref, n);
            CHECK(ab >= 0.0);
            CHECK(ab <= 1.0);
            CHECK(ab == doctest::Approx(rouge_n(ref, cand, n)).epsilon(1e-12));
        }
        CHECK(rouge_l(cand, ref) == doctest::Approx(rouge_l(ref, cand)).epsilon(1e-12));
    }
}

TEST_CASE("porter stemmer full-pipeline outputs on classic examples") {
    const std::pair<const char*, const char*> cases[] = {
        {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},
        {"caress", "caress"},   {"cats", "cat"},          {"feed", "feed"},
        {"agreed", "agre"},     {"plastered", "plaster"}, {"bled", "bled"},
        {"motoring", "motor"},  {"sing", "sing"},         {"conflated", "conflat"},
        {"troubled", "troubl"},{"sized", "size"},        {"hopping", "hop"},
        {"tanned", "tan"},      {"falling", "fall"},      {"hissing", "hiss"},
        {"fizzed", "fizz"},     {"failing", "fail"},      {"filing", "file"},
        {"happy", "happi"},     {"sky", "sky"},           {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"},
        {"triplicate", "triplic"},    {"formative", "form"},
        {"formalize", "formal"},      {"electricity", "electr"},
        {"hopefulness", "hope"},      {"probate", "probat"},
        {"rate", "rate"},             {"cease", "ceas"},
        {"controll", "control"},      {"roll", "roll"},
    };
    for (const auto& [in, out] : cases) {
        CAPTURE(in);
        CHECK(porter_stem(in) == out);
    }
    // Short words pass through untouched.
    CHECK(porter_stem("a") == "a");
    CHECK(porter_stem("is") == "is");
}

TEST_CASE("meteor hand-computed values") {
    // Identical 4-token sentences: P = R = 1, one chunk of four matches,
    // penalty 0.5 * (1/4)^3.
    CHECK(meteor("the cat sat down", "the cat sat down") ==
          doctest::Approx(0.9921875).epsilon(1e-12));
    // Stem-stage match, both words: one contiguous chunk of two.
    CHECK(meteor("cats sit", "cat sits") == doctest::Approx(0.9375).epsilon(1e-12));
    // One exact match out of two tokens each: Fmean 0.5, fully fragmented.
    CHECK(meteor("the cat", "the dog") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(meteor("completely different", "nothing shared") == 0.0);
    CHECK(meteor("", "reference") == 0.0);
    // Reordering splits chunks and lowers the score below the identity case.
    CHECK(meteor("down sat cat the", "the cat sat down") <
          meteor("the cat sat down", "the cat sat down"));
}

TEST_CASE("meteor is bounded on all fixture pairs") {
    for (const auto& [cand, ref] : tu::metric_pairs()) {
        const double v = meteor(cand, ref);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("accuracy counts format failures as incorrect") {
    using P = std::pair<ExtractionResult, std::string>;
    std::vector<P> results;
    results.emplace_back(ExtractionResult::success("A", "A"), "A");
    results.emplace_back(ExtractionResult::success("B", "B"), "A");
    results.emplace_back(ExtractionResult::format_error("??"), "A");
    results.emplace_back(ExtractionResult::success("A", "A"), "A");
    EvalCellStats stats = accuracy(results);
    CHECK(stats.n_examples == 4);
    CHECK(stats.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats.format_failures == 1);
}

TEST_CASE("accuracy: 31 correct of 99 with 7 format failures reads 31.31%") {
    std::vector<std::pair<ExtractionResult, std::string>> results;
    for (int i = 0; i < 31; ++i) results.emplace_back(ExtractionResult::success("A", ""), "A");
    for (int i = 0; i < 7; ++i) results.emplace_back(ExtractionResult::format_error(""), "A");
    for (int i = 0; i < 61; ++i) results.emplace_back(ExtractionResult::success("B", ""), "A");
    EvalCellStats stats = accuracy(results);
    CHECK(stats.n_examples == 99);
    CHECK(stats.format_failures == 7);
    CHECK(std::abs(stats.value * 100.0 - 31.31) < 0.005);
}

TEST_CASE("accuracy on an empty cell raises EmptyInput") {
    CHECK_THROWS_AS(accuracy({}), EmptyInput);
}

TEST_CASE("percent change") {
    PercentChange pc = percent_change(50.0, 45.0);
    CHECK_FALSE(pc.absolute);
    CHECK(pc.value == doctest::Approx(-10.0).epsilon(1e-12));

    CHECK(percent_change(0.42, 0.42).value == 0.0);

    pc = percent_change(0.3131, 0.3033);
    CHECK(std::abs(pc.value - (-3.13)) < 0.01);

    pc = percent_change(0.0, 0.25);
    CHECK(pc.absolute);
    CHECK(pc.value == doctest::Approx(0.25).epsilon(1e-12));

    pc = percent_change(0.0, 0.0);
    CHECK(pc.absolute);
    CHECK(pc.value == 0.0);
}
