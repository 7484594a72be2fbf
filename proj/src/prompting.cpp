#include "tsb/prompting.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <string_view>

namespace tsb {

namespace {

std::string slot(const TaskInstance& inst, const std::string& name) {
    auto it = inst.fields.find(name);
    return it == inst.fields.end() ? std::string{} : it->second;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Canonical label if `text` is exactly one label of the kind, allowing for
// Mcq the "(B)", "B.", "B)" one-letter forms. Case-insensitive.
std::optional<std::string> match_label(std::string_view text, TaskKind kind) {
    std::string t = lower(trim(text));
    if (kind == TaskKind::SentimentBinary) {
        if (t == "positive" || t == "negative") return t;
        return std::nullopt;
    }
    // Mcq: strip a single layer of (), trailing '.' or ')'
    if (t.size() >= 2 && t.front() == '(' && t.back() == ')') t = t.substr(1, t.size() - 2);
    if (t.size() == 2 && (t[1] == '.' || t[1] == ')')) t = t.substr(0, 1);
    if (t.size() == 1 && t[0] >= 'a' && t[0] <= 'd')
        return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(t[0]))));
    return std::nullopt;
}

std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0) {
    std::string h = lower(haystack), n = lower(needle);
    return h.find(n, from);
}

}  // namespace

RenderedPrompt render_user_prompt(const TaskInstance& inst) {
    std::string text;
    switch (inst.kind) {
        case TaskKind::Mcq: {
            std::string topic = slot(inst, "topic");
            if (topic.empty()) topic = "Abstract Algebra";
            text = "You have a multiple choice question on " + topic +
                   ". Only one of the options is correct: A, B, C, or D. Give your answer in "
                   "the following format with the tags provided: <Answer> </Answer>. Please "
                   "read the following question and options and answer the question\n"
                   "Question: " + slot(inst, "question") + "\n"
                   "(A) " + slot(inst, "A") + "\n"
                   "(B) " + slot(inst, "B") + "\n"
                   "(C) " + slot(inst, "C") + "\n"
                   "(D) " + slot(inst, "D");
            break;
        }
        case TaskKind::SentimentBinary:
            text = "Can you choose only one sentiment ['negative', 'positive'] for this "
                   "review.\n"
                   "review: " + slot(inst, "review") + "\n"
                   "Return only the sentiment label without any other text. Make sure to "
                   "follow the format otherwise your answer will be disqualified:\n"
                   "<Answer> positive / negative </Answer>.\n"
                   "Do not output neutral.";
            break;
        case TaskKind::Summarization:
            text = "Please summarize the following article.\n" + slot(inst, "article");
            break;
        case TaskKind::ExtractiveQa:
            text = "Read the given tweet and answer the corresponding question.\n"
                   "tweet: " + slot(inst, "tweet") + "\n"
                   "question: " + slot(inst, "question");
            break;
    }
    return {std::move(text), inst.kind, inst.id};
}

std::string render_reference_response(const TaskInstance& inst) {
    if (is_classification(inst.kind)) return "<Answer> " + inst.reference + " </Answer>";
    return inst.reference;
}

ExtractionResult extract_answer(const std::string& raw, TaskKind kind) {
    // Rule 1: first well-formed <Answer>...</Answer> span.
    std::size_t open = ifind(raw, "<answer>");
    if (open != std::string::npos) {
        std::size_t body = open + 8;
        std::size_t close = ifind(raw, "</answer>", body);
        if (close != std::string::npos) {
            std::string_view inner = std::string_view(raw).substr(body, close - body);
            if (auto lab = match_label(inner, kind)) return ExtractionResult::success(*lab, raw);
            // Tagged but unresolvable ("positive/negative", "neutral", prose):
            // the model committed to the format and failed it.
            return ExtractionResult::format_error(raw);
        }
    }

    // Rule 2: bare label as the whole trimmed response.
    if (auto lab = match_label(trim(raw), kind)) return ExtractionResult::success(*lab, raw);

    if (kind == TaskKind::Mcq) {
        // Two distinct parenthesized letters are ambiguous, whatever else the
        // text contains (mirrors the "positive/negative" rejection).
        std::optional<char> paren_letter;
        bool paren_ambiguous = false;
        for (std::size_t i = 0; i + 2 < raw.size(); ++i) {
            if (raw[i] != '(' || raw[i + 2] != ')') continue;
            char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[i + 1])));
            if (c < 'A' || c > 'D') continue;
            if (paren_letter && *paren_letter != c) paren_ambiguous = true;
            paren_letter = c;
        }
        if (paren_ambiguous) return ExtractionResult::format_error(raw);

        // Rule 3a: leading letter, optionally parenthesized, followed by a
        // non-alphanumeric boundary (the Open-LLM leaderboard convention).
        std::string_view t = trim(raw);
        if (!t.empty()) {
            std::size_t i = 0;
            bool paren = t[0] == '(';
            if (paren) ++i;
            if (i < t.size()) {
                char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t[i])));
                if (c >= 'A' && c <= 'D') {
                    std::size_t j = i + 1;
                    bool boundary = j >= t.size() ||
                                    !std::isalnum(static_cast<unsigned char>(t[j]));
                    bool closed = !paren || (j < t.size() && t[j] == ')');
                    if (boundary && closed) return ExtractionResult::success(std::string(1, c), raw);
                }
            }
        }
        // Rule 3b: the unique parenthesized letter anywhere in the text.
        if (paren_letter) return ExtractionResult::success(std::string(1, *paren_letter), raw);
    }

    return ExtractionResult::format_error(raw);
}

}  // namespace tsb
