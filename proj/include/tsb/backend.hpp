#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tsb {

struct Message {
    std::string role;  // "user" or "assistant"
    std::string content;

    bool operator==(const Message&) const = default;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

struct GenerationResult {
    std::string text;
    std::size_t token_count = 0;
    bool truncated = false;  // finish reason was a length cap
};

// Log-probability of a fixed response continuing the conversation. Natural
// log units; prompt tokens contribute nothing.
struct ScoreResult {
    double total_logprob = 0.0;
    std::vector<std::pair<std::string, double>> per_token;
};

// Uniform model access: greedy (temperature-0) generation plus fixed-response
// scoring. Implementations must be safe for concurrent calls.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual std::string model_id() const = 0;
    virtual bool supports_scoring() const = 0;

    // Greedy completion of the conversation. Last message role must be user.
    virtual GenerationResult generate(const std::vector<Message>& messages,
                                      std::size_t max_tokens) = 0;

    // Total log-probability of exactly fixed_response's tokens continuing
    // the conversation. Throws ScoringUnsupported if !supports_scoring().
    virtual ScoreResult score(const std::vector<Message>& messages,
                              const std::string& fixed_response) = 0;
};

}  // namespace tsb
