#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsb/backend.hpp"
#include "tsb/corpus.hpp"
#include "tsb/dialogue.hpp"

namespace tsb {

// Zero-shot anchor for one target instance: the greedy response with empty
// history and its log-probability under the same empty-history context.
// logp_rstar_u is absent when the backend cannot score (tau not calculable).
struct ZeroShotRecord {
    std::string instance_id;
    std::string r_star;
    std::optional<double> logp_rstar_u;
};

// Per-example log-probability terms and the three log-rho sensitivities.
// All probabilities are unnormalized token-logprob sums; r* is fixed from
// the zero-shot decode and re-scored verbatim under history.
struct SensitivityRecord {
    std::string instance_id;
    std::size_t L = 0;
    std::string history_task;
    double logp_rstar_u = 0.0;
    double logp_rstar_uh = 0.0;
    double logp_actual_uh = 0.0;
    double logp_ref_u = 0.0;
    double logp_ref_uh = 0.0;
    double log_rho_zero_shot = 0.0;   // logp_rstar_u - logp_rstar_uh
    double log_rho_confidence = 0.0;  // logp_rstar_u - logp_actual_uh
    double log_rho_loss = 0.0;        // logp_ref_u - logp_ref_uh
};

enum class SensitivityVariant { ZeroShot, Confidence, Loss };
std::string to_string(SensitivityVariant variant);

struct TauEstimate {
    std::string history_task;
    std::string target_task;
    SensitivityVariant variant = SensitivityVariant::ZeroShot;
    std::size_t L = 0;
    double value = 0.0;    // mean of the per-example log-rho values
    std::size_t n = 0;
    double std_err = 0.0;  // sample std / sqrt(n); 0 when n < 2
};

// Greedy zero-shot decode plus its own-context log-probability. When the
// backend cannot score, the record carries text only.
ZeroShotRecord compute_zero_shot(ModelBackend& backend, const TaskInstance& target,
                                 std::size_t max_tokens);

// Fill all probability terms for one conversation. `actual_response` is the
// backend's with-history generation for the same conversation (r_{L+1});
// `reference_response` is the teacher-forced reference for the target.
// Requires a scorable zero-shot record of the same instance.
SensitivityRecord compute_sensitivity(ModelBackend& backend, const Conversation& conversation,
                                      const ZeroShotRecord& zero_shot,
                                      const std::string& reference_response,
                                      const std::string& actual_response);

// Mean and standard error of one log-rho variant across records that share
// (history task, L). Throws EmptyInput on an empty list.
TauEstimate tau_estimate(const std::vector<SensitivityRecord>& records,
                         SensitivityVariant variant, const std::string& target_task);

}  // namespace tsb
