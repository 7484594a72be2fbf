#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "testutil.hpp"
#include "tsb/dialogue.hpp"
#include "tsb/errors.hpp"
#include "tsb/mock_backend.hpp"
#include "tsb/sensitivity.hpp"

using namespace tsb;
namespace tu = testutil;

namespace {

// A sentiment target plus L dummy history instances (the mocks key on
// history length only, so the history content is irrelevant).
TaskInstance target_instance() {
    TaskInstance inst = tu::golden_sentiment();
    inst.id = "sens-target";
    return inst;
}

Conversation conversation_with(std::size_t L) {
    std::vector<TaskInstance> hist;
    for (std::size_t i = 0; i < L; ++i) {
        TaskInstance h = tu::golden_sentiment();
        h.id = "hist-" + std::to_string(i);
        hist.push_back(std::move(h));
    }
    return build_history(hist, target_instance(), "sent_demo", "sent_demo");
}

// Program the TableMock for the full pipeline at one history length:
// generation path emits r* = "B" with probability p_rstar; the tagged
// reference "<Answer> positive </Answer>" is scorable with the given
// step probabilities.
void program_level(TableMock& mock, std::size_t L, const std::string& user, double p_rstar,
                   double p_tag, double p_pos, double p_close) {
    // Remaining mass is split across two filler tokens so r* stays the
    // argmax of the root distribution.
    const double rest = (1.0 - p_rstar - p_tag) / 2.0;
    TableMock::Distribution root{
        {"B", p_rstar}, {"<Answer>", p_tag}, {"<f1>", rest}, {"<f2>", rest}};
    mock.set_distribution(L, user, {}, root);
    mock.set_distribution(L, user, {"B"}, {{kEos, 1.0}});
    mock.set_distribution(L, user, {"<Answer>"}, {{"positive", p_pos}, {"<filler>", 1.0 - p_pos}});
    mock.set_distribution(L, user, {"<Answer>", "positive"},
                          {{"</Answer>", p_close}, {"<filler>", 1.0 - p_close}});
}

}  // namespace

TEST_CASE("compute_zero_shot captures the greedy decode and its logprob") {
    TableMock mock;
    const std::string user = render_user_prompt(target_instance()).text;
    mock.program_response(0, user, {"B"}, {0.9});
    ZeroShotRecord zs = compute_zero_shot(mock, target_instance(), 8);
    CHECK(zs.instance_id == "sens-target");
    CHECK(zs.r_star == "B");
    REQUIRE(zs.logp_rstar_u.has_value());
    CHECK(*zs.logp_rstar_u == doctest::Approx(std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("log-rho terms match hand-computed ratios") {
    TableMock mock;
    const std::string user = render_user_prompt(target_instance()).text;
    // P(B | u) = 0.9, P(B | u, h) = 0.45: rho_1 = 2, log rho_1 = ln 2.
    program_level(mock, 0, user, 0.9, 0.05, 0.5, 0.5);
    program_level(mock, 6, user, 0.45, 0.04, 0.4, 0.4);

    ZeroShotRecord zs = compute_zero_shot(mock, target_instance(), 8);
    Conversation conv = conversation_with(6);
    GenerationResult actual = mock.generate(to_messages(conv), 8);
    CHECK(actual.text == "B");  // argmax still r* at L=6

    SensitivityRecord rec = compute_sensitivity(mock, conv, zs,
                                                render_reference_response(target_instance()),
                                                actual.text);
    CHECK(rec.L == 6);
    CHECK(rec.history_task == "sent_demo");
    CHECK(rec.logp_rstar_u == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(rec.logp_rstar_uh == doctest::Approx(std::log(0.45)).epsilon(1e-12));
    CHECK(rec.log_rho_zero_shot == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // actual == r*, so the confidence variant coincides here.
    CHECK(rec.log_rho_confidence == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    // Reference "<Answer> positive </Answer>": 0.05*0.5*0.5 vs 0.04*0.4*0.4.
    const double expected_loss = std::log(0.05 * 0.5 * 0.5) - std::log(0.04 * 0.4 * 0.4);
    CHECK(rec.logp_ref_u == doctest::Approx(std::log(0.05 * 0.5 * 0.5)).epsilon(1e-12));
    CHECK(rec.log_rho_loss == doctest::Approx(expected_loss).epsilon(1e-9));
}

TEST_CASE("negative sensitivity when history helps") {
    TableMock mock;
    const std::string user = render_user_prompt(target_instance()).text;
    // P(B | u) = 0.5, P(B | u, h) = 0.8: log rho_1 = ln 0.625 < 0.
    program_level(mock, 0, user, 0.5, 0.05, 0.5, 0.5);
    program_level(mock, 4, user, 0.8, 0.05, 0.5, 0.5);

    ZeroShotRecord zs = compute_zero_shot(mock, target_instance(), 8);
    Conversation conv = conversation_with(4);
    SensitivityRecord rec = compute_sensitivity(mock, conv, zs,
                                                render_reference_response(target_instance()),
                                                mock.generate(to_messages(conv), 8).text);
    CHECK(rec.log_rho_zero_shot == doctest::Approx(std::log(0.625)).epsilon(1e-12));
    CHECK(rec.log_rho_zero_shot < 0.0);
    // Sign semantics: with-history logprob above the zero-shot one implies a
    // negative log-rho, and vice versa.
    CHECK((rec.logp_rstar_uh > rec.logp_rstar_u) == (rec.log_rho_zero_shot < 0.0));
}

TEST_CASE("identity invariants hold on computed records") {
    BigramMock mock = BigramMock::mcq_demo(0.8);
    TaskInstance inst = tu::golden_mcq();
    inst.id = "bigram-target";
    inst.fields["D"] = "the option ending with alpha";
    inst.reference = "A";

    ZeroShotRecord zs = compute_zero_shot(mock, inst, 3);
    std::vector<TaskInstance> hist(4, inst);
    for (std::size_t i = 0; i < hist.size(); ++i) hist[i].id = "h" + std::to_string(i);
    Conversation conv = build_history(hist, inst, "mcq_demo", "mcq_demo");
    std::string actual = mock.generate(to_messages(conv), 3).text;
    SensitivityRecord rec =
        compute_sensitivity(mock, conv, zs, render_reference_response(inst), actual);

    CHECK(rec.log_rho_zero_shot ==
          doctest::Approx(rec.logp_rstar_u - rec.logp_rstar_uh).epsilon(1e-12));
    CHECK(rec.log_rho_confidence ==
          doctest::Approx(rec.logp_rstar_u - rec.logp_actual_uh).epsilon(1e-12));
    CHECK(rec.log_rho_loss == doctest::Approx(rec.logp_ref_u - rec.logp_ref_uh).epsilon(1e-12));
}

TEST_CASE("beta=0 bigram model yields exactly zero sensitivity") {
    BigramMock mock = BigramMock::mcq_demo(0.0);
    TaskInstance inst = tu::golden_mcq();
    inst.id = "bigram-zero";
    inst.fields["D"] = "the option ending with bravo";
    inst.reference = "B";

    ZeroShotRecord zs = compute_zero_shot(mock, inst, 3);
    for (std::size_t L : {std::size_t{1}, std::size_t{3}, std::size_t{6}}) {
        std::vector<TaskInstance> hist(L, inst);
        for (std::size_t i = 0; i < L; ++i) hist[i].id = "h" + std::to_string(i);
        Conversation conv = build_history(hist, inst, "mcq_demo", "mcq_demo");
        SensitivityRecord rec = compute_sensitivity(
            mock, conv, zs, render_reference_response(inst),
            mock.generate(to_messages(conv), 3).text);
        CHECK(rec.log_rho_zero_shot == 0.0);
        CHECK(rec.log_rho_confidence == 0.0);
        CHECK(rec.log_rho_loss == 0.0);
    }
}

TEST_CASE("compute_sensitivity guards its inputs") {
    TableMock mock;
    Conversation conv = conversation_with(0);

    ZeroShotRecord wrong;
    wrong.instance_id = "someone-else";
    wrong.logp_rstar_u = -1.0;
    CHECK_THROWS_AS(compute_sensitivity(mock, conv, wrong, "ref", "actual"),
                    std::invalid_argument);

    ZeroShotRecord unscored;
    unscored.instance_id = "sens-target";  // matches, but no logprob
    CHECK_THROWS_AS(compute_sensitivity(mock, conv, unscored, "ref", "actual"),
                    ScoringUnsupported);
}

namespace {

SensitivityRecord rec_with(double rho, std::size_t L = 6, const std::string& ch = "sent_demo") {
    SensitivityRecord r;
    r.instance_id = "x";
    r.L = L;
    r.history_task = ch;
    r.log_rho_zero_shot = rho;
    r.log_rho_confidence = rho * 2.0;
    r.log_rho_loss = rho * 3.0;
    return r;
}

}  // namespace

TEST_CASE("tau_estimate averages per-example log-rho values") {
    std::vector<SensitivityRecord> records{rec_with(0.2), rec_with(0.4)};
    TauEstimate tau = tau_estimate(records, SensitivityVariant::ZeroShot, "mcq_demo");
    CHECK(tau.value == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(tau.n == 2);
    CHECK(tau.L == 6);
    CHECK(tau.history_task == "sent_demo");
    CHECK(tau.target_task == "mcq_demo");
    // sample std of {0.2, 0.4} is 0.1*sqrt(2); stderr divides by sqrt(2).
    CHECK(tau.std_err == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(tau_estimate(records, SensitivityVariant::Confidence, "mcq_demo").value ==
          doctest::Approx(0.6).epsilon(1e-12));
    CHECK(tau_estimate(records, SensitivityVariant::Loss, "mcq_demo").value ==
          doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("tau_estimate input guards") {
    CHECK_THROWS_AS(tau_estimate({}, SensitivityVariant::ZeroShot, "t"), EmptyInput);
    std::vector<SensitivityRecord> mixed{rec_with(0.1, 2), rec_with(0.1, 4)};
    CHECK_THROWS_AS(tau_estimate(mixed, SensitivityVariant::ZeroShot, "t"),
                    std::invalid_argument);
    std::vector<SensitivityRecord> mixed_ch{rec_with(0.1, 2, "a"), rec_with(0.1, 2, "b")};
    CHECK_THROWS_AS(tau_estimate(mixed_ch, SensitivityVariant::ZeroShot, "t"),
                    std::invalid_argument);
    std::vector<SensitivityRecord> single{rec_with(0.0)};
    TauEstimate tau = tau_estimate(single, SensitivityVariant::ZeroShot, "t");
    CHECK(tau.value == 0.0);
    CHECK(tau.std_err == 0.0);
}

TEST_CASE("variant names") {
    CHECK(to_string(SensitivityVariant::ZeroShot) == "zero_shot");
    CHECK(to_string(SensitivityVariant::Confidence) == "confidence");
    CHECK(to_string(SensitivityVariant::Loss) == "loss");
}
