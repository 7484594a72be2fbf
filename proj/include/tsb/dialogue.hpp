#pragma once

#include <string>
#include <vector>

#include "tsb/backend.hpp"
#include "tsb/corpus.hpp"
#include "tsb/prompting.hpp"

namespace tsb {

// One teacher-forced turn: the rendered user prompt paired with the
// ground-truth response (simulating perfect performance on the CH task).
struct Turn {
    std::string user;
    std::string assistant;
};

struct Conversation {
    std::vector<Turn> history;  // length L; empty means h = null
    RenderedPrompt target;      // u_{L+1}
    std::string history_task;   // T_h dataset name
    std::string target_task;    // T_t dataset name
};

// Build an L-turn conversation: every history instance becomes a
// (prompt, teacher-forced reference) turn, the target instance becomes the
// final user request. The single task switch happens at the final turn.
Conversation build_history(const std::vector<TaskInstance>& history_instances,
                           const TaskInstance& target_instance,
                           const std::string& history_task, const std::string& target_task);

// Flatten to the wire message list: user/assistant alternating, final role
// user. With L=0 this is exactly the zero-shot message list.
std::vector<Message> to_messages(const Conversation& conv);

}  // namespace tsb
