#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"
#include "tsb/prompting.hpp"

using namespace tsb;
namespace tu = testutil;

TEST_CASE("rendered prompts match the golden files byte for byte") {
    for (const auto& inst : tu::golden_instances()) {
        RenderedPrompt prompt = render_user_prompt(inst);
        CHECK(prompt.kind == inst.kind);
        CHECK(prompt.instance_id == inst.id);
        const std::string expected = tu::read_file(tu::golden_dir() / tu::golden_file(inst.kind));
        REQUIRE_FALSE(expected.empty());
        CHECK(prompt.text == expected);
    }
}

TEST_CASE("no template placeholder survives rendering") {
    for (const auto& inst : tu::golden_instances()) {
        const std::string text = render_user_prompt(inst).text;
        CHECK(text.find('{') == std::string::npos);
        CHECK(text.find('}') == std::string::npos);
    }
}

TEST_CASE("mcq topic slot defaults to Abstract Algebra") {
    TaskInstance inst = tu::golden_mcq();
    inst.fields.erase("topic");
    CHECK(render_user_prompt(inst).text ==
          tu::read_file(tu::golden_dir() / "mcq.txt"));

    inst.fields["topic"] = "Number Theory";
    CHECK(render_user_prompt(inst).text.find(
              "a multiple choice question on Number Theory.") != std::string::npos);
}

TEST_CASE("fixed template phrases are present") {
    CHECK(render_user_prompt(tu::golden_sentiment()).text.find(
              "<Answer> positive / negative </Answer>.") != std::string::npos);
    const std::string sentiment = render_user_prompt(tu::golden_sentiment()).text;
    CHECK(sentiment.substr(sentiment.size() - 22) == "Do not output neutral.");
    CHECK(render_user_prompt(tu::golden_summarization()).text.rfind(
              "Please summarize the following article.\n", 0) == 0);
    CHECK(render_user_prompt(tu::golden_qa()).text.rfind(
              "Read the given tweet and answer the corresponding question.\n", 0) == 0);
}

TEST_CASE("reference responses: tags for classification, verbatim otherwise") {
    CHECK(render_reference_response(tu::golden_mcq()) == "<Answer> B </Answer>");
    CHECK(render_reference_response(tu::golden_sentiment()) == "<Answer> positive </Answer>");
    CHECK(render_reference_response(tu::golden_summarization()) ==
          "league cup decided on penalties");
    CHECK(render_reference_response(tu::golden_qa()) == "the eclipse");
}

TEST_CASE("extraction round-trips the teacher-forced reference") {
    // A model that answers exactly like the forced history turns must always
    // be extractable and correct.
    for (const auto& inst : {tu::golden_mcq(), tu::golden_sentiment()}) {
        ExtractionResult r = extract_answer(render_reference_response(inst), inst.kind);
        REQUIRE(r.ok);
        CHECK(r.label == inst.reference);
    }
    for (const char* letter : {"A", "B", "C", "D"}) {
        TaskInstance inst = tu::golden_mcq();
        inst.reference = letter;
        ExtractionResult r = extract_answer(render_reference_response(inst), inst.kind);
        REQUIRE(r.ok);
        CHECK(r.label == letter);
    }
}

TEST_CASE("extraction fixture table (40 cases)") {
    const auto& cases = tu::extraction_cases();
    REQUIRE(cases.size() == 40);
    for (const auto& c : cases) {
        CAPTURE(c.raw);
        ExtractionResult r = extract_answer(c.raw, c.kind);
        CHECK(r.ok == c.ok);
        if (c.ok) CHECK(r.label == c.label);
        CHECK(r.raw == c.raw);  // raw text preserved for diagnostics
    }
}
