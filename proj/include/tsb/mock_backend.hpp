#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tsb/backend.hpp"

namespace tsb {

// Mock backends tokenize on whitespace: one word = one token. Generation
// walks the programmed next-token distribution greedily until the stop
// token kEos or max_tokens.

inline constexpr const char* kEos = "</s>";

// Explicit context -> next-token distribution map for unit tests. Contexts
// are keyed by (history length, final user message, response tokens so far);
// history *content* is deliberately ignored so tests can program with-history
// behavior without reproducing sampled turns.
class TableMock final : public ModelBackend {
public:
    using Distribution = std::vector<std::pair<std::string, double>>;

    explicit TableMock(std::string model_id = "table-mock") : model_id_(std::move(model_id)) {}

    static std::string context_key(std::size_t history_len, const std::string& final_user,
                                   const std::vector<std::string>& partial);

    // Program the distribution for one decoding step. Entries must sum to 1
    // within 1e-9. Greedy ties break toward the earliest entry.
    void set_distribution(std::size_t history_len, const std::string& final_user,
                          const std::vector<std::string>& partial, Distribution dist);

    // Convenience: program a whole greedy response. Step k emits tokens[k]
    // with probability probs[k] (remaining mass on a filler token), then the
    // stop token with probability eos_prob.
    void program_response(std::size_t history_len, const std::string& final_user,
                          const std::vector<std::string>& tokens,
                          const std::vector<double>& probs, double eos_prob = 1.0);

    std::string model_id() const override { return model_id_; }
    bool supports_scoring() const override { return true; }
    GenerationResult generate(const std::vector<Message>& messages,
                              std::size_t max_tokens) override;
    ScoreResult score(const std::vector<Message>& messages,
                      const std::string& fixed_response) override;

private:
    const Distribution& lookup(std::size_t history_len, const std::string& final_user,
                               const std::vector<std::string>& partial) const;

    std::string model_id_;
    std::map<std::string, Distribution> table_;
};

// Smoothed bigram language model over a small vocabulary with a tunable
// history-bias coefficient beta. The conditional distribution of the next
// token given the previous one is
//   P(next | prev, L) = softmax( ln base[prev][next] - beta * L * [next = argmax base[prev]] )
// where L is the number of history turns. beta = 0 reproduces the base
// bigram exactly (the response is conditionally independent of the history);
// beta > 0 drains mass from the zero-shot greedy path as history grows;
// beta < 0 concentrates it.
class BigramMock final : public ModelBackend {
public:
    BigramMock(std::vector<std::string> vocab,
               std::map<std::string, std::vector<double>> base_rows, std::string default_prev,
               double beta, std::string model_id = "bigram-mock");

    // Canned instance used by the harness demo and the acceptance suite:
    // MCQ-style vocabulary where a cue word at the end of the prompt
    // ("alpha" -> answer A, "bravo" -> answer B) determines the response.
    static BigramMock mcq_demo(double beta);

    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::vector<double>& base_row(const std::string& prev) const;
    double beta() const { return beta_; }

    // Exact conditional distribution used for both decoding and scoring.
    std::vector<double> conditional(const std::string& prev, std::size_t history_len) const;

    // Last in-vocabulary token of `text`, scanning backward; empty if none.
    std::string cue_token(const std::string& text) const;

    std::string model_id() const override { return model_id_; }
    bool supports_scoring() const override { return true; }
    GenerationResult generate(const std::vector<Message>& messages,
                              std::size_t max_tokens) override;
    ScoreResult score(const std::vector<Message>& messages,
                      const std::string& fixed_response) override;

private:
    struct Context {
        std::size_t history_len;
        std::string prev;  // row for the first response token
    };
    Context resolve_context(const std::vector<Message>& messages) const;

    std::vector<std::string> vocab_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<double>> rows_;
    std::string default_prev_;
    double beta_;
    std::string model_id_;
};

}  // namespace tsb
