#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include "json.hpp"
#include "tsb/backend.hpp"

namespace tsb {

// Hex-encoded SHA-256.
std::string sha256_hex(const std::string& data);

// Content-addressed response cache wrapping any backend. Keys are the
// SHA-256 of (endpoint, model id, request body); entries are appended to a
// JSONL file as they arrive, so a killed run resumes from where it stopped.
class CachingBackend final : public ModelBackend {
public:
    CachingBackend(ModelBackend& inner, std::filesystem::path cache_file);

    static std::string generate_key(const std::string& model_id,
                                    const std::vector<Message>& messages,
                                    std::size_t max_tokens);
    static std::string score_key(const std::string& model_id,
                                 const std::vector<Message>& messages,
                                 const std::string& fixed_response);

    std::string model_id() const override { return inner_.model_id(); }
    bool supports_scoring() const override { return inner_.supports_scoring(); }
    GenerationResult generate(const std::vector<Message>& messages,
                              std::size_t max_tokens) override;
    ScoreResult score(const std::vector<Message>& messages,
                      const std::string& fixed_response) override;

    // Calls that reached the wrapped backend (i.e. cache misses).
    std::size_t inner_calls() const;

private:
    nlohmann::json fetch(const std::string& key, const std::function<nlohmann::json()>& miss);

    ModelBackend& inner_;
    std::filesystem::path cache_file_;
    mutable std::mutex mutex_;
    std::map<std::string, nlohmann::json> entries_;
    std::size_t inner_calls_ = 0;
};

}  // namespace tsb
