#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"
#include "testutil.hpp"
#include "tsb/dialogue.hpp"

using namespace tsb;
namespace tu = testutil;

namespace {

std::vector<TaskInstance> history_of(std::size_t L) {
    std::vector<TaskInstance> out;
    for (std::size_t i = 0; i < L; ++i) {
        TaskInstance inst = tu::golden_sentiment();
        inst.id = "hist-" + std::to_string(i);
        inst.fields["review"] = "history review number " + std::to_string(i);
        inst.reference = i % 2 ? "negative" : "positive";
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace

TEST_CASE("L=0 conversation flattens to the single zero-shot user message") {
    Conversation conv = build_history({}, tu::golden_mcq(), "sent_demo", "mcq_demo");
    CHECK(conv.history.empty());
    CHECK(conv.history_task == "sent_demo");
    CHECK(conv.target_task == "mcq_demo");
    auto msgs = to_messages(conv);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].role == "user");
    CHECK(msgs[0].content == render_user_prompt(tu::golden_mcq()).text);
}

TEST_CASE("message counts are 2L+1 with alternating roles ending in user") {
    for (std::size_t L : {std::size_t{1}, std::size_t{2}, std::size_t{6}, std::size_t{11}}) {
        Conversation conv = build_history(history_of(L), tu::golden_mcq(), "sent", "mcq");
        auto msgs = to_messages(conv);
        REQUIRE(msgs.size() == 2 * L + 1);
        for (std::size_t i = 0; i < msgs.size(); ++i)
            CHECK(msgs[i].role == (i % 2 == 0 ? "user" : "assistant"));
        CHECK(msgs.back().role == "user");
    }
}

TEST_CASE("history turns are teacher-forced: rendered prompt + tagged reference") {
    auto hist = history_of(3);
    Conversation conv = build_history(hist, tu::golden_mcq(), "sent", "mcq");
    REQUIRE(conv.history.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(conv.history[i].user == render_user_prompt(hist[i]).text);
        CHECK(conv.history[i].assistant == render_reference_response(hist[i]));
        CHECK(conv.history[i].assistant ==
              "<Answer> " + hist[i].reference + " </Answer>");
    }
    CHECK(conv.target.text == render_user_prompt(tu::golden_mcq()).text);
}

TEST_CASE("generative history turns carry the reference verbatim") {
    TaskInstance sum = tu::golden_summarization();
    Conversation conv = build_history({sum}, tu::golden_mcq(), "sum", "mcq");
    REQUIRE(conv.history.size() == 1);
    CHECK(conv.history[0].assistant == sum.reference);
}

TEST_CASE("the single task switch happens at the final turn") {
    auto hist = history_of(4);
    Conversation conv = build_history(hist, tu::golden_mcq(), "sent", "mcq");
    auto msgs = to_messages(conv);
    // All history user turns share the CH template; only the last user turn
    // switches task.
    for (std::size_t i = 0; i + 1 < msgs.size(); i += 2)
        if (i + 2 < msgs.size())
            CHECK(msgs[i].content.rfind("Can you choose only one sentiment", 0) == 0);
    CHECK(msgs.back().content.rfind("You have a multiple choice question", 0) == 0);
}

TEST_CASE("message JSON serialization round-trips") {
    Message m{"assistant", "<Answer> B </Answer>"};
    nlohmann::json j = m;
    CHECK(j["role"] == "assistant");
    CHECK(j["content"] == "<Answer> B </Answer>");
    Message back = j.get<Message>();
    CHECK(back == m);
}
