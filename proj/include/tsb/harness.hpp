#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsb/backend.hpp"
#include "tsb/corpus.hpp"

namespace tsb {

struct DatasetSpec {
    std::string name;
    TaskKind kind;
    std::optional<std::filesystem::path> train_path;
    std::filesystem::path test_path;
};

// One sweep over (T_h, L) cells for a fixed target task and model. The
// in-context control is expressed by listing the target task among the
// history tasks.
struct ExperimentPlan {
    int schema_version = 1;
    nlohmann::json model;  // backend config; see make_backend
    DatasetSpec target;
    std::vector<DatasetSpec> history_tasks;
    std::vector<std::size_t> lengths = {0, 1, 2, 3, 4, 5, 6};
    std::uint64_t run_seed = 0;
    std::optional<std::size_t> test_limit;
    std::size_t history_draws = 1;
    std::size_t max_tokens = 64;
    std::size_t workers = 4;
};

// Parse/serialize the versioned config document. Relative dataset paths are
// resolved against base_dir. Validates 0 in lengths, strictly increasing
// lengths, non-empty history task list; throws ConfigError.
ExperimentPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json plan_to_json(const ExperimentPlan& plan);
std::string plan_hash(const ExperimentPlan& plan);

// Instantiate a backend from the plan's model config:
//   {"type": "bigram_mock", "beta": 0.0}
//   {"type": "http", "base_url": ..., "model": ..., "api_key_env": ...,
//    "scoring": true, "timeout_s": 120, "max_in_flight": 8}
std::unique_ptr<ModelBackend> make_backend(const nlohmann::json& model_config);

struct RunOptions {
    // Stop after writing this many new records (simulates a killed run in
    // tests; the next run_sweep resumes from the persisted records).
    std::optional<std::size_t> stop_after_records;
};

struct SweepStats {
    std::size_t records_written = 0;
    std::size_t cells_skipped = 0;   // already persisted from an earlier run
    std::size_t backend_calls = 0;   // calls that reached the wrapped backend
    bool stopped_early = false;
};

// Execute the plan against run_dir:
//   plan.json              augmented plan (model id, scoring flag, test ids)
//   cache/responses.jsonl  content-addressed model responses
//   records/records.jsonl  one line per (instance, T_h, L, draw) cell
// Every record is persisted as soon as it completes; rerunning a finished or
// interrupted sweep is idempotent. Endpoint failures mark individual records
// failed; only configuration errors abort.
SweepStats run_sweep(const ExperimentPlan& plan, ModelBackend& backend,
                     const std::filesystem::path& run_dir, const RunOptions& options = {});

}  // namespace tsb
