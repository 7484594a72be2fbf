#include "tsb/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tsb/errors.hpp"

namespace tsb {

namespace {

std::vector<std::string> split_ws(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

void check_distribution(const std::vector<std::pair<std::string, double>>& dist) {
    double sum = 0.0;
    for (const auto& [tok, p] : dist) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability out of range for " + tok);
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("distribution sums to " + std::to_string(sum));
}

// history length = assistant turns before the final user message; trailing
// assistant messages are a partial continuation being scored, not history.
struct SplitMessages {
    std::size_t history_len = 0;
    const Message* final_user = nullptr;
    std::vector<std::string> continuation_tokens;
};

SplitMessages split_messages(const std::vector<Message>& messages) {
    SplitMessages out;
    std::size_t last_user = messages.size();
    for (std::size_t i = messages.size(); i-- > 0;) {
        if (messages[i].role == "user") {
            last_user = i;
            break;
        }
    }
    if (last_user == messages.size()) throw std::invalid_argument("no user message present");
    out.final_user = &messages[last_user];
    for (std::size_t i = 0; i < last_user; ++i)
        if (messages[i].role == "assistant") ++out.history_len;
    for (std::size_t i = last_user + 1; i < messages.size(); ++i) {
        auto toks = split_ws(messages[i].content);
        out.continuation_tokens.insert(out.continuation_tokens.end(), toks.begin(), toks.end());
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TableMock

std::string TableMock::context_key(std::size_t history_len, const std::string& final_user,
                                   const std::vector<std::string>& partial) {
    std::string key = std::to_string(history_len);
    key.push_back('\x1f');
    key += final_user;
    key.push_back('\x1f');
    for (std::size_t i = 0; i < partial.size(); ++i) {
        if (i) key.push_back(' ');
        key += partial[i];
    }
    return key;
}

void TableMock::set_distribution(std::size_t history_len, const std::string& final_user,
                                 const std::vector<std::string>& partial, Distribution dist) {
    check_distribution(dist);
    table_[context_key(history_len, final_user, partial)] = std::move(dist);
}

void TableMock::program_response(std::size_t history_len, const std::string& final_user,
                                 const std::vector<std::string>& tokens,
                                 const std::vector<double>& probs, double eos_prob) {
    if (tokens.size() != probs.size())
        throw std::invalid_argument("tokens/probs length mismatch");
    std::vector<std::string> partial;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Distribution dist{{tokens[i], probs[i]}};
        if (probs[i] < 1.0) dist.emplace_back("<filler>", 1.0 - probs[i]);
        set_distribution(history_len, final_user, partial, std::move(dist));
        partial.push_back(tokens[i]);
    }
    Distribution final_dist{{kEos, eos_prob}};
    if (eos_prob < 1.0) final_dist.emplace_back("<filler>", 1.0 - eos_prob);
    set_distribution(history_len, final_user, partial, std::move(final_dist));
}

const TableMock::Distribution& TableMock::lookup(std::size_t history_len,
                                                 const std::string& final_user,
                                                 const std::vector<std::string>& partial) const {
    auto it = table_.find(context_key(history_len, final_user, partial));
    if (it == table_.end())
        throw EndpointError(0, "table mock: no distribution programmed for context");
    return it->second;
}

GenerationResult TableMock::generate(const std::vector<Message>& messages,
                                     std::size_t max_tokens) {
    auto split = split_messages(messages);
    std::vector<std::string> tokens = split.continuation_tokens;
    GenerationResult out;
    while (out.token_count < max_tokens) {
        const auto& dist = lookup(split.history_len, split.final_user->content, tokens);
        const auto best = std::max_element(
            dist.begin(), dist.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
        if (best->first == kEos) break;
        tokens.push_back(best->first);
        ++out.token_count;
        if (out.token_count == max_tokens) out.truncated = true;
    }
    std::string text;
    for (std::size_t i = split.continuation_tokens.size(); i < tokens.size(); ++i) {
        if (!text.empty()) text.push_back(' ');
        text += tokens[i];
    }
    out.text = std::move(text);
    return out;
}

ScoreResult TableMock::score(const std::vector<Message>& messages,
                             const std::string& fixed_response) {
    auto split = split_messages(messages);
    std::vector<std::string> partial = split.continuation_tokens;
    ScoreResult out;
    for (const auto& tok : split_ws(fixed_response)) {
        const auto& dist = lookup(split.history_len, split.final_user->content, partial);
        auto it = std::find_if(dist.begin(), dist.end(),
                               [&](const auto& e) { return e.first == tok; });
        if (it == dist.end() || it->second <= 0.0)
            throw TokenizationMismatch("table mock: token '" + tok +
                                       "' has no probability in this context");
        double lp = std::log(it->second);
        out.per_token.emplace_back(tok, lp);
        out.total_logprob += lp;
        partial.push_back(tok);
    }
    return out;
}

// ---------------------------------------------------------------------------
// BigramMock

BigramMock::BigramMock(std::vector<std::string> vocab,
                       std::map<std::string, std::vector<double>> base_rows,
                       std::string default_prev, double beta, std::string model_id)
    : vocab_(std::move(vocab)),
      rows_(std::move(base_rows)),
      default_prev_(std::move(default_prev)),
      beta_(beta),
      model_id_(std::move(model_id)) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_[vocab_[i]] = i;
    if (!rows_.count(default_prev_)) throw std::invalid_argument("default row missing");
    for (const auto& [prev, row] : rows_) {
        if (row.size() != vocab_.size())
            throw std::invalid_argument("row size mismatch for '" + prev + "'");
        double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("row for '" + prev + "' sums to " + std::to_string(sum));
    }
}

BigramMock BigramMock::mcq_demo(double beta) {
    // vocab order: alpha bravo A B <Answer> </Answer> </s>
    std::vector<std::string> vocab = {"alpha", "bravo", "A", "B", "<Answer>", "</Answer>", kEos};
    std::map<std::string, std::vector<double>> rows;
    rows["alpha"]     = {0.03, 0.03, 0.75, 0.10, 0.03, 0.03, 0.03};
    rows["bravo"]     = {0.03, 0.03, 0.10, 0.75, 0.03, 0.03, 0.03};
    rows["A"]         = {0.03, 0.03, 0.03, 0.03, 0.03, 0.10, 0.75};
    rows["B"]         = {0.03, 0.03, 0.03, 0.03, 0.03, 0.10, 0.75};
    rows["<Answer>"]  = {0.05, 0.05, 0.40, 0.35, 0.05, 0.05, 0.05};
    rows["</Answer>"] = {0.05, 0.05, 0.05, 0.05, 0.025, 0.025, 0.75};
    rows[kEos]        = std::vector<double>(7, 1.0 / 7.0);
    return BigramMock(std::move(vocab), std::move(rows), "alpha", beta);
}

const std::vector<double>& BigramMock::base_row(const std::string& prev) const {
    auto it = rows_.find(prev);
    return it == rows_.end() ? rows_.at(default_prev_) : it->second;
}

std::vector<double> BigramMock::conditional(const std::string& prev,
                                            std::size_t history_len) const {
    std::vector<double> row = base_row(prev);
    const double shift = beta_ * static_cast<double>(history_len);
    if (shift == 0.0) return row;  // exact base: no float churn at beta=0 or L=0
    const std::size_t am =
        static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    row[am] *= std::exp(-shift);
    const double z = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& p : row) p /= z;
    return row;
}

std::string BigramMock::cue_token(const std::string& text) const {
    auto tokens = split_ws(text);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it)
        if (index_.count(*it)) return *it;
    return {};
}

BigramMock::Context BigramMock::resolve_context(const std::vector<Message>& messages) const {
    auto split = split_messages(messages);
    Context ctx{split.history_len, default_prev_};
    for (auto it = split.continuation_tokens.rbegin(); it != split.continuation_tokens.rend();
         ++it) {
        if (index_.count(*it)) return {split.history_len, *it};
    }
    std::string cue = cue_token(split.final_user->content);
    if (!cue.empty()) ctx.prev = cue;
    return ctx;
}

GenerationResult BigramMock::generate(const std::vector<Message>& messages,
                                      std::size_t max_tokens) {
    Context ctx = resolve_context(messages);
    GenerationResult out;
    std::string prev = ctx.prev;
    while (out.token_count < max_tokens) {
        std::vector<double> dist = conditional(prev, ctx.history_len);
        const std::size_t am =
            static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        if (vocab_[am] == kEos) break;
        if (!out.text.empty()) out.text.push_back(' ');
        out.text += vocab_[am];
        prev = vocab_[am];
        ++out.token_count;
        if (out.token_count == max_tokens) out.truncated = true;
    }
    return out;
}

ScoreResult BigramMock::score(const std::vector<Message>& messages,
                              const std::string& fixed_response) {
    Context ctx = resolve_context(messages);
    ScoreResult out;
    std::string prev = ctx.prev;
    for (const auto& tok : split_ws(fixed_response)) {
        auto it = index_.find(tok);
        if (it == index_.end())
            throw TokenizationMismatch("bigram mock: token '" + tok + "' not in vocabulary");
        const double p = conditional(prev, ctx.history_len)[it->second];
        const double lp = std::log(p);
        out.per_token.emplace_back(tok, lp);
        out.total_logprob += lp;
        prev = tok;
    }
    return out;
}

}  // namespace tsb
