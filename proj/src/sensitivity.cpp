#include "tsb/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

#include "tsb/errors.hpp"

namespace tsb {

std::string to_string(SensitivityVariant variant) {
    switch (variant) {
        case SensitivityVariant::ZeroShot: return "zero_shot";
        case SensitivityVariant::Confidence: return "confidence";
        case SensitivityVariant::Loss: return "loss";
    }
    return "?";
}

ZeroShotRecord compute_zero_shot(ModelBackend& backend, const TaskInstance& target,
                                 std::size_t max_tokens) {
    Conversation conv = build_history({}, target, "", "");
    const auto messages = to_messages(conv);
    ZeroShotRecord record;
    record.instance_id = target.id;
    record.r_star = backend.generate(messages, max_tokens).text;
    if (backend.supports_scoring())
        record.logp_rstar_u = backend.score(messages, record.r_star).total_logprob;
    return record;
}

SensitivityRecord compute_sensitivity(ModelBackend& backend, const Conversation& conversation,
                                      const ZeroShotRecord& zero_shot,
                                      const std::string& reference_response,
                                      const std::string& actual_response) {
    if (conversation.target.instance_id != zero_shot.instance_id)
        throw std::invalid_argument("zero-shot record belongs to a different instance");
    if (!zero_shot.logp_rstar_u)
        throw ScoringUnsupported();

    Conversation zero_conv = conversation;
    zero_conv.history.clear();
    const auto messages_u = to_messages(zero_conv);
    const auto messages_uh = to_messages(conversation);

    SensitivityRecord rec;
    rec.instance_id = zero_shot.instance_id;
    rec.L = conversation.history.size();
    rec.history_task = conversation.history_task;
    rec.logp_rstar_u = *zero_shot.logp_rstar_u;
    rec.logp_rstar_uh = backend.score(messages_uh, zero_shot.r_star).total_logprob;
    rec.logp_actual_uh = backend.score(messages_uh, actual_response).total_logprob;
    rec.logp_ref_u = backend.score(messages_u, reference_response).total_logprob;
    rec.logp_ref_uh = backend.score(messages_uh, reference_response).total_logprob;
    rec.log_rho_zero_shot = rec.logp_rstar_u - rec.logp_rstar_uh;
    rec.log_rho_confidence = rec.logp_rstar_u - rec.logp_actual_uh;
    rec.log_rho_loss = rec.logp_ref_u - rec.logp_ref_uh;
    return rec;
}

TauEstimate tau_estimate(const std::vector<SensitivityRecord>& records,
                         SensitivityVariant variant, const std::string& target_task) {
    if (records.empty()) throw EmptyInput("tau over an empty record list");
    for (const auto& rec : records)
        if (rec.history_task != records.front().history_task || rec.L != records.front().L)
            throw std::invalid_argument("tau records must share (history task, L)");

    auto pick = [&](const SensitivityRecord& rec) {
        switch (variant) {
            case SensitivityVariant::ZeroShot: return rec.log_rho_zero_shot;
            case SensitivityVariant::Confidence: return rec.log_rho_confidence;
            case SensitivityVariant::Loss: return rec.log_rho_loss;
        }
        return 0.0;
    };

    TauEstimate tau;
    tau.history_task = records.front().history_task;
    tau.target_task = target_task;
    tau.variant = variant;
    tau.L = records.front().L;
    tau.n = records.size();
    double sum = 0.0;
    for (const auto& rec : records) sum += pick(rec);
    tau.value = sum / static_cast<double>(tau.n);
    if (tau.n > 1) {
        double ss = 0.0;
        for (const auto& rec : records) {
            const double d = pick(rec) - tau.value;
            ss += d * d;
        }
        tau.std_err = std::sqrt(ss / static_cast<double>(tau.n - 1)) /
                      std::sqrt(static_cast<double>(tau.n));
    }
    return tau;
}

}  // namespace tsb
