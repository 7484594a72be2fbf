#pragma once

#include <string>

#include "tsb/corpus.hpp"

namespace tsb {

struct RenderedPrompt {
    std::string text;
    TaskKind kind;
    std::string instance_id;
};

// Outcome of answer extraction for classification kinds. FormatError is a
// value, not a failure: it feeds the format-failure counters.
struct ExtractionResult {
    bool ok = false;
    std::string label;  // canonical: A-D, or lowercase positive/negative
    std::string raw;    // original model output (kept for FormatError diagnostics)

    static ExtractionResult success(std::string canonical, std::string raw_text) {
        return {true, std::move(canonical), std::move(raw_text)};
    }
    static ExtractionResult format_error(std::string raw_text) {
        return {false, {}, std::move(raw_text)};
    }
};

// Render the user prompt for one instance. Byte-exact per the fixed
// per-kind templates (golden files under tests/golden/). MCQ instances may
// carry an optional "topic" slot; it defaults to "Abstract Algebra".
RenderedPrompt render_user_prompt(const TaskInstance& instance);

// Teacher-forced assistant response placed in the history. Classification
// kinds are wrapped in the answer tags the prompt demands; generative kinds
// pass the reference through verbatim.
std::string render_reference_response(const TaskInstance& instance);

// Lenient answer extraction for classification outputs. Cascade:
//   1. first well-formed <Answer>...</Answer> span whose content resolves
//      to a canonical label;
//   2. the whole trimmed response is a bare canonical label;
//   3. (Mcq) a leading "A" / "(A)"-style letter, then a unique
//      parenthesized letter anywhere in the text.
// Matching is case-insensitive; output is canonical-case. Ambiguous or
// unresolvable responses (including "neutral" for sentiment) are
// FormatError.
ExtractionResult extract_answer(const std::string& raw, TaskKind kind);

}  // namespace tsb
