#include "tsb/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "tsb/errors.hpp"
#include "tsb/rng.hpp"

namespace tsb {

using nlohmann::json;

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::Mcq: return "mcq";
        case TaskKind::SentimentBinary: return "sentiment";
        case TaskKind::Summarization: return "summarization";
        case TaskKind::ExtractiveQa: return "qa";
    }
    return "?";
}

TaskKind kind_from_string(const std::string& name) {
    if (name == "mcq") return TaskKind::Mcq;
    if (name == "sentiment") return TaskKind::SentimentBinary;
    if (name == "summarization") return TaskKind::Summarization;
    if (name == "qa") return TaskKind::ExtractiveQa;
    throw ConfigError("unknown task kind: " + name);
}

const std::vector<std::string>& required_slots(TaskKind kind) {
    static const std::vector<std::string> mcq = {"question", "A", "B", "C", "D"};
    static const std::vector<std::string> sentiment = {"review"};
    static const std::vector<std::string> summarization = {"article"};
    static const std::vector<std::string> qa = {"tweet", "question"};
    switch (kind) {
        case TaskKind::Mcq: return mcq;
        case TaskKind::SentimentBinary: return sentiment;
        case TaskKind::Summarization: return summarization;
        case TaskKind::ExtractiveQa: return qa;
    }
    return mcq;
}

bool is_classification(TaskKind kind) {
    return kind == TaskKind::Mcq || kind == TaskKind::SentimentBinary;
}

namespace {

void validate_reference(const TaskInstance& inst, std::size_t line_no) {
    if (inst.reference.empty()) throw MalformedRecord(line_no, "empty reference");
    if (inst.kind == TaskKind::Mcq) {
        if (inst.reference.size() != 1 || inst.reference[0] < 'A' || inst.reference[0] > 'D')
            throw MalformedRecord(line_no, "mcq reference must be one of A-D, got '" +
                                               inst.reference + "'");
    } else if (inst.kind == TaskKind::SentimentBinary) {
        if (inst.reference != "positive" && inst.reference != "negative")
            throw MalformedRecord(line_no,
                                  "sentiment reference must be positive or negative, got '" +
                                      inst.reference + "'");
    }
}

TaskInstance parse_record(const std::string& line, TaskKind kind, std::size_t line_no) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::parse_error& e) {
        throw MalformedRecord(line_no, e.what());
    }
    if (!rec.is_object()) throw MalformedRecord(line_no, "record is not a JSON object");
    for (const char* key : {"id", "kind", "fields", "reference"})
        if (!rec.contains(key)) throw MalformedRecord(line_no, std::string("missing '") + key + "'");
    if (!rec["id"].is_string() || !rec["kind"].is_string() || !rec["fields"].is_object() ||
        !rec["reference"].is_string())
        throw MalformedRecord(line_no, "wrong field types");

    TaskInstance inst;
    inst.id = rec["id"].get<std::string>();
    if (inst.id.empty()) throw MalformedRecord(line_no, "empty id");
    TaskKind record_kind;
    try {
        record_kind = kind_from_string(rec["kind"].get<std::string>());
    } catch (const ConfigError& e) {
        throw MalformedRecord(line_no, e.what());
    }
    if (record_kind != kind)
        throw KindMismatch(line_no, "record kind '" + rec["kind"].get<std::string>() +
                                        "' does not match expected '" + to_string(kind) + "'");
    inst.kind = kind;
    for (auto& [slot, value] : rec["fields"].items()) {
        if (!value.is_string()) throw MalformedRecord(line_no, "slot '" + slot + "' is not a string");
        inst.fields[slot] = value.get<std::string>();
    }
    for (const auto& slot : required_slots(kind)) {
        auto it = inst.fields.find(slot);
        if (it == inst.fields.end() || it->second.empty())
            throw MalformedRecord(line_no, "missing or empty slot '" + slot + "' for kind '" +
                                               to_string(kind) + "'");
    }
    inst.reference = rec["reference"].get<std::string>();
    validate_reference(inst, line_no);
    return inst;
}

}  // namespace

std::vector<TaskInstance> load_split(const std::filesystem::path& path, TaskKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset file: " + path.string());
    std::vector<TaskInstance> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        TaskInstance inst = parse_record(line, kind, line_no);
        if (!seen.insert(inst.id).second)
            throw MalformedRecord(line_no, "duplicate id '" + inst.id + "'");
        out.push_back(std::move(inst));
    }
    return out;
}

Dataset load_dataset(const std::string& name, TaskKind kind,
                     const std::optional<std::filesystem::path>& train_path,
                     const std::filesystem::path& test_path) {
    Dataset ds;
    ds.name = name;
    ds.kind = kind;
    if (train_path) ds.train = load_split(*train_path, kind);
    ds.test = load_split(test_path, kind);
    std::set<std::string> train_ids;
    for (const auto& inst : ds.train) train_ids.insert(inst.id);
    for (const auto& inst : ds.test)
        if (train_ids.count(inst.id))
            throw ConfigError("dataset '" + name + "': id '" + inst.id +
                              "' appears in both train and test");
    return ds;
}

std::vector<TaskInstance> sample_history_instances(const Dataset& dataset, std::size_t L,
                                                   std::uint64_t seed) {
    if (L > dataset.train.size())
        throw InsufficientTrain("dataset '" + dataset.name + "': requested L=" +
                                std::to_string(L) + " but train split has " +
                                std::to_string(dataset.train.size()) + " instances");
    if (L == 0) return {};

    // Priority-key sampling: every train instance gets a deterministic key
    // from (seed, dataset name, instance id); the L smallest keys win. This
    // gives without-replacement draws whose length-L result is a prefix of
    // the length-(L+1) result.
    const std::uint64_t base = mix64(seed, fnv1a64(dataset.name));
    std::vector<std::size_t> order(dataset.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::uint64_t> keys(dataset.train.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
        keys[i] = mix64(base, fnv1a64(dataset.train[i].id));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return a < b;  // file order breaks (astronomically unlikely) key ties
    });

    std::vector<TaskInstance> out;
    out.reserve(L);
    for (std::size_t i = 0; i < L; ++i) out.push_back(dataset.train[order[i]]);
    return out;
}

}  // namespace tsb
