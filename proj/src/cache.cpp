#include "tsb/cache.hpp"

#include <openssl/evp.h>

#include <fstream>

#include "tsb/errors.hpp"

namespace tsb {

using nlohmann::json;

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

CachingBackend::CachingBackend(ModelBackend& inner, std::filesystem::path cache_file)
    : inner_(inner), cache_file_(std::move(cache_file)) {
    std::filesystem::create_directories(cache_file_.parent_path());
    std::ifstream in(cache_file_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json entry = json::parse(line, nullptr, /*allow_exceptions=*/false);
        // A partial trailing line from a killed run is skipped; the entry is
        // simply refetched and re-appended.
        if (entry.is_discarded() || !entry.contains("key") || !entry.contains("response"))
            continue;
        entries_[entry["key"].get<std::string>()] = entry["response"];
    }
}

std::string CachingBackend::generate_key(const std::string& model_id,
                                         const std::vector<Message>& messages,
                                         std::size_t max_tokens) {
    json body{{"endpoint", "generate"},
              {"model", model_id},
              {"body", {{"messages", messages}, {"temperature", 0}, {"max_tokens", max_tokens}}}};
    return sha256_hex(body.dump());
}

std::string CachingBackend::score_key(const std::string& model_id,
                                      const std::vector<Message>& messages,
                                      const std::string& fixed_response) {
    json body{{"endpoint", "score"},
              {"model", model_id},
              {"body", {{"messages", messages}, {"fixed_response", fixed_response}}}};
    return sha256_hex(body.dump());
}

json CachingBackend::fetch(const std::string& key, const std::function<json()>& miss) {
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
    }
    json response = miss();
    std::lock_guard lock(mutex_);
    ++inner_calls_;
    auto [it, inserted] = entries_.emplace(key, response);
    if (inserted) {
        std::ofstream out(cache_file_, std::ios::binary | std::ios::app);
        out << json{{"key", key}, {"response", response}}.dump() << "\n";
    }
    return it->second;
}

GenerationResult CachingBackend::generate(const std::vector<Message>& messages,
                                          std::size_t max_tokens) {
    const std::string key = generate_key(inner_.model_id(), messages, max_tokens);
    json r = fetch(key, [&] {
        GenerationResult g = inner_.generate(messages, max_tokens);
        return json{{"text", g.text}, {"token_count", g.token_count}, {"truncated", g.truncated}};
    });
    return {r["text"].get<std::string>(), r["token_count"].get<std::size_t>(),
            r["truncated"].get<bool>()};
}

ScoreResult CachingBackend::score(const std::vector<Message>& messages,
                                  const std::string& fixed_response) {
    if (!inner_.supports_scoring()) throw ScoringUnsupported();
    const std::string key = score_key(inner_.model_id(), messages, fixed_response);
    json r = fetch(key, [&] {
        ScoreResult s = inner_.score(messages, fixed_response);
        json per_token = json::array();
        for (const auto& [tok, lp] : s.per_token) per_token.push_back({tok, lp});
        return json{{"total_logprob", s.total_logprob}, {"per_token", per_token}};
    });
    ScoreResult s;
    s.total_logprob = r["total_logprob"].get<double>();
    for (const auto& e : r["per_token"])
        s.per_token.emplace_back(e[0].get<std::string>(), e[1].get<double>());
    return s;
}

std::size_t CachingBackend::inner_calls() const {
    std::lock_guard lock(mutex_);
    return inner_calls_;
}

}  // namespace tsb
