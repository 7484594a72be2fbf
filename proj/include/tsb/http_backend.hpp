#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "tsb/backend.hpp"

namespace tsb {

struct HttpBackendConfig {
    std::string base_url;         // e.g. "http://localhost:8000"
    std::string model;            // model id sent in request bodies
    std::string api_key_env;      // env var holding the bearer token; may be empty
    bool scoring = true;          // endpoints without echo-logprobs: set false
    double timeout_s = 120.0;
    std::size_t max_in_flight = 8;
    std::size_t max_attempts = 5;
    double backoff_base_s = 0.5;  // exponential: base * 2^attempt
};

// OpenAI-style HTTP backend.
//
// Generation: POST {base_url}/v1/chat/completions with
//   {model, messages, temperature: 0, max_tokens}.
//
// Scoring: POST {base_url}/v1/completions with echo=true, logprobs=1,
// max_tokens=0. The chat conversation is flattened to a plain prompt:
// each message becomes "User: {content}\n" or "Assistant: {content}\n",
// then "Assistant: " opens the response and fixed_response is appended
// directly. Token logprobs are summed from the first echoed token at or
// past the context/response boundary; a token straddling the boundary is a
// TokenizationMismatch.
//
// Transport errors and HTTP 429/5xx are retried with exponential backoff up
// to max_attempts; other statuses raise EndpointError immediately.
class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    static std::string flatten_for_scoring(const std::vector<Message>& messages);

    std::string model_id() const override;
    bool supports_scoring() const override;
    GenerationResult generate(const std::vector<Message>& messages,
                              std::size_t max_tokens) override;
    ScoreResult score(const std::vector<Message>& messages,
                      const std::string& fixed_response) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tsb
