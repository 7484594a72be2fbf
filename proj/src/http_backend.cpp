#include "tsb/http_backend.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tsb/errors.hpp"

namespace tsb {

using nlohmann::json;

namespace {

// Counting semaphore bounding in-flight requests. std::counting_semaphore
// needs a compile-time max; a mutex/condvar pair keeps the limit runtime
// configurable.
class Gate {
public:
    explicit Gate(std::size_t limit) : available_(limit) {}
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(m_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    std::size_t available_;
};

struct GateGuard {
    Gate& gate;
    explicit GateGuard(Gate& g) : gate(g) { gate.acquire(); }
    ~GateGuard() { gate.release(); }
};

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

struct HttpBackend::Impl {
    HttpBackendConfig config;
    httplib::Client client;
    Gate gate;

    explicit Impl(HttpBackendConfig cfg)
        : config(std::move(cfg)), client(config.base_url), gate(config.max_in_flight) {
        client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));
        client.set_write_timeout(std::chrono::duration<double>(config.timeout_s));
        if (!config.api_key_env.empty()) {
            if (const char* key = std::getenv(config.api_key_env.c_str()))
                client.set_bearer_token_auth(key);
        }
    }

    json post(const std::string& path, const json& body) {
        GateGuard guard(gate);
        int last_status = 0;
        std::string last_body;
        for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
            if (attempt > 0) {
                auto delay = std::chrono::duration<double>(
                    config.backoff_base_s * static_cast<double>(1ULL << (attempt - 1)));
                std::this_thread::sleep_for(delay);
            }
            auto res = client.Post(path, body.dump(), "application/json");
            if (!res) {  // transport error
                last_status = 0;
                last_body = httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) {
                json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
                if (parsed.is_discarded())
                    throw EndpointError(res->status, "unparseable response body");
                return parsed;
            }
            last_status = res->status;
            last_body = res->body;
            if (!retryable_status(res->status)) break;
        }
        throw EndpointError(last_status, last_body);
    }
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpBackend::~HttpBackend() = default;

std::string HttpBackend::model_id() const { return impl_->config.model; }
bool HttpBackend::supports_scoring() const { return impl_->config.scoring; }

std::string HttpBackend::flatten_for_scoring(const std::vector<Message>& messages) {
    std::string prompt;
    for (const auto& m : messages) {
        prompt += (m.role == "assistant") ? "Assistant: " : "User: ";
        prompt += m.content;
        prompt.push_back('\n');
    }
    prompt += "Assistant: ";
    return prompt;
}

GenerationResult HttpBackend::generate(const std::vector<Message>& messages,
                                       std::size_t max_tokens) {
    json body{{"model", impl_->config.model},
              {"messages", messages},
              {"temperature", 0},
              {"max_tokens", max_tokens}};
    json res = impl_->post("/v1/chat/completions", body);
    if (!res.contains("choices") || res["choices"].empty())
        throw EndpointError(200, "no choices in completion response");
    const json& choice = res["choices"][0];
    GenerationResult out;
    out.text = choice.value("message", json::object()).value("content", "");
    out.truncated = choice.value("finish_reason", "") == "length";
    out.token_count = res.value("usage", json::object()).value("completion_tokens", 0u);
    return out;
}

ScoreResult HttpBackend::score(const std::vector<Message>& messages,
                               const std::string& fixed_response) {
    if (!impl_->config.scoring) throw ScoringUnsupported();
    const std::string context = flatten_for_scoring(messages);
    json body{{"model", impl_->config.model},
              {"prompt", context + fixed_response},
              {"echo", true},
              {"logprobs", 1},
              {"max_tokens", 0},
              {"temperature", 0}};
    json res = impl_->post("/v1/completions", body);
    if (!res.contains("choices") || res["choices"].empty())
        throw EndpointError(200, "no choices in scoring response");
    const json& lp = res["choices"][0].value("logprobs", json::object());
    if (!lp.contains("tokens") || !lp.contains("token_logprobs") || !lp.contains("text_offset"))
        throw EndpointError(200, "scoring response lacks echoed logprobs");
    const json& tokens = lp["tokens"];
    const json& logprobs = lp["token_logprobs"];
    const json& offsets = lp["text_offset"];
    if (tokens.size() != logprobs.size() || tokens.size() != offsets.size())
        throw TokenizationMismatch("echoed logprob arrays have inconsistent lengths");

    ScoreResult out;
    if (fixed_response.empty()) return out;  // empty product
    const std::size_t boundary = context.size();
    bool found = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::size_t off = offsets[i].get<std::size_t>();
        if (off < boundary) continue;
        if (!found && off != boundary)
            throw TokenizationMismatch("echoed token straddles the response boundary");
        found = true;
        if (logprobs[i].is_null())
            throw TokenizationMismatch("null logprob inside the scored response");
        const double l = logprobs[i].get<double>();
        out.per_token.emplace_back(tokens[i].get<std::string>(), l);
        out.total_logprob += l;
    }
    if (!found) throw TokenizationMismatch("no echoed tokens cover the scored response");
    return out;
}

}  // namespace tsb
