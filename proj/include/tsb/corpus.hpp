#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsb {

enum class TaskKind { Mcq, SentimentBinary, Summarization, ExtractiveQa };

// Wire names used in the JSONL schema and CLI flags.
std::string to_string(TaskKind kind);
TaskKind kind_from_string(const std::string& name);

// Template slots a record of this kind must provide (non-empty).
const std::vector<std::string>& required_slots(TaskKind kind);

// Whether the task is evaluated by answer extraction + accuracy (as opposed
// to text-overlap metrics).
bool is_classification(TaskKind kind);

struct TaskInstance {
    std::string id;
    TaskKind kind;
    std::map<std::string, std::string> fields;
    std::string reference;
};

struct Dataset {
    std::string name;
    TaskKind kind;
    std::vector<TaskInstance> train;  // sampled for conversation histories
    std::vector<TaskInstance> test;   // evaluated as the final-turn target
};

// Load one JSONL split. Each line:
//   {"id": str, "kind": str, "fields": {slot: str, ...}, "reference": str}
// Throws MalformedRecord / KindMismatch with the offending 1-based line number.
std::vector<TaskInstance> load_split(const std::filesystem::path& path, TaskKind kind);

// Load a dataset from its train/test files. train_path may be empty (no
// train split: only L=0 runs are possible against it).
Dataset load_dataset(const std::string& name, TaskKind kind,
                     const std::optional<std::filesystem::path>& train_path,
                     const std::filesystem::path& test_path);

// Deterministic sample of L distinct train instances. Samples nest: the
// length-L sample is a prefix of the length-(L+1) sample for the same seed,
// so ablation curves over L stay comparable. Throws InsufficientTrain when
// L > |train|.
std::vector<TaskInstance> sample_history_instances(const Dataset& dataset, std::size_t L,
                                                   std::uint64_t seed);

}  // namespace tsb
