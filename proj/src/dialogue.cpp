#include "tsb/dialogue.hpp"

namespace tsb {

void to_json(nlohmann::json& j, const Message& m) {
    j = nlohmann::json{{"role", m.role}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, Message& m) {
    j.at("role").get_to(m.role);
    j.at("content").get_to(m.content);
}

Conversation build_history(const std::vector<TaskInstance>& history_instances,
                           const TaskInstance& target_instance,
                           const std::string& history_task, const std::string& target_task) {
    Conversation conv;
    conv.history_task = history_task;
    conv.target_task = target_task;
    conv.history.reserve(history_instances.size());
    for (const auto& inst : history_instances)
        conv.history.push_back({render_user_prompt(inst).text, render_reference_response(inst)});
    conv.target = render_user_prompt(target_instance);
    return conv;
}

std::vector<Message> to_messages(const Conversation& conv) {
    std::vector<Message> msgs;
    msgs.reserve(conv.history.size() * 2 + 1);
    for (const auto& turn : conv.history) {
        msgs.push_back({"user", turn.user});
        msgs.push_back({"assistant", turn.assistant});
    }
    msgs.push_back({"user", conv.target.text});
    return msgs;
}

}  // namespace tsb
