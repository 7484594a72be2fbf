#include "tsb/harness.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "tsb/cache.hpp"
#include "tsb/dialogue.hpp"
#include "tsb/errors.hpp"
#include "tsb/http_backend.hpp"
#include "tsb/mock_backend.hpp"
#include "tsb/prompting.hpp"
#include "tsb/rng.hpp"
#include "tsb/scoring.hpp"
#include "tsb/sensitivity.hpp"

namespace tsb {

using nlohmann::json;

namespace {

json dataset_spec_to_json(const DatasetSpec& spec) {
    json j{{"name", spec.name}, {"kind", to_string(spec.kind)}, {"test", spec.test_path.generic_string()}};
    if (spec.train_path) j["train"] = spec.train_path->generic_string();
    return j;
}

DatasetSpec dataset_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object() || !j.contains("name") || !j.contains("kind") || !j.contains("test"))
        throw ConfigError("dataset spec needs name, kind and test fields");
    DatasetSpec spec;
    spec.name = j["name"].get<std::string>();
    spec.kind = kind_from_string(j["kind"].get<std::string>());
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    spec.test_path = resolve(j["test"].get<std::string>());
    if (j.contains("train") && !j["train"].is_null())
        spec.train_path = resolve(j["train"].get<std::string>());
    return spec;
}

}  // namespace

ExperimentPlan plan_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentPlan plan;
    plan.schema_version = j.value("schema_version", 1);
    if (plan.schema_version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(plan.schema_version));
    if (!j.contains("model") || !j.contains("target_task") || !j.contains("history_tasks"))
        throw ConfigError("config needs model, target_task and history_tasks");
    plan.model = j["model"];
    plan.target = dataset_spec_from_json(j["target_task"], base_dir);
    for (const auto& spec : j["history_tasks"])
        plan.history_tasks.push_back(dataset_spec_from_json(spec, base_dir));
    if (plan.history_tasks.empty()) throw ConfigError("history_tasks must be non-empty");
    if (j.contains("lengths")) plan.lengths = j["lengths"].get<std::vector<std::size_t>>();
    if (plan.lengths.empty() || plan.lengths.front() != 0)
        throw ConfigError("lengths must start with 0 (the zero-shot baseline)");
    for (std::size_t i = 1; i < plan.lengths.size(); ++i)
        if (plan.lengths[i] <= plan.lengths[i - 1])
            throw ConfigError("lengths must be strictly increasing");
    plan.run_seed = j.value("run_seed", std::uint64_t{0});
    if (j.contains("test_limit") && !j["test_limit"].is_null())
        plan.test_limit = j["test_limit"].get<std::size_t>();
    plan.history_draws = j.value("history_draws", std::size_t{1});
    if (plan.history_draws == 0) throw ConfigError("history_draws must be >= 1");
    plan.max_tokens = j.value("max_tokens", std::size_t{64});
    plan.workers = j.value("workers", std::size_t{4});
    if (plan.workers == 0) throw ConfigError("workers must be >= 1");
    return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
    json j;
    j["schema_version"] = plan.schema_version;
    j["model"] = plan.model;
    j["target_task"] = dataset_spec_to_json(plan.target);
    j["history_tasks"] = json::array();
    for (const auto& spec : plan.history_tasks) j["history_tasks"].push_back(dataset_spec_to_json(spec));
    j["lengths"] = plan.lengths;
    j["run_seed"] = plan.run_seed;
    if (plan.test_limit) j["test_limit"] = *plan.test_limit;
    j["history_draws"] = plan.history_draws;
    j["max_tokens"] = plan.max_tokens;
    j["workers"] = plan.workers;
    return j;
}

std::string plan_hash(const ExperimentPlan& plan) { return sha256_hex(plan_to_json(plan).dump()); }

std::unique_ptr<ModelBackend> make_backend(const json& model_config) {
    if (!model_config.is_object() || !model_config.contains("type"))
        throw ConfigError("model config needs a type field");
    const std::string type = model_config["type"].get<std::string>();
    if (type == "bigram_mock") {
        return std::make_unique<BigramMock>(BigramMock::mcq_demo(model_config.value("beta", 0.0)));
    }
    if (type == "http") {
        HttpBackendConfig cfg;
        if (!model_config.contains("base_url") || !model_config.contains("model"))
            throw ConfigError("http model config needs base_url and model");
        cfg.base_url = model_config["base_url"].get<std::string>();
        cfg.model = model_config["model"].get<std::string>();
        cfg.api_key_env = model_config.value("api_key_env", "TSBENCH_API_KEY");
        cfg.scoring = model_config.value("scoring", true);
        cfg.timeout_s = model_config.value("timeout_s", 120.0);
        cfg.max_in_flight = model_config.value("max_in_flight", std::size_t{8});
        return std::make_unique<HttpBackend>(cfg);
    }
    throw ConfigError("unknown model type '" + type + "'");
}

namespace {

struct Cell {
    std::size_t ch_index;
    std::size_t L;
    std::size_t draw;
    std::size_t test_index;
    std::string key;
};

std::string cell_key(const std::string& instance_id, const std::string& ch_task, std::size_t L,
                     std::size_t draw) {
    return instance_id + "\x1f" + ch_task + "\x1f" + std::to_string(L) + "\x1f" +
           std::to_string(draw);
}

json metrics_for(TaskKind kind, const std::string& candidate, const std::string& reference) {
    json m;
    if (kind == TaskKind::Summarization) {
        m["rouge1"] = rouge_n(candidate, reference, 1);
        m["rouge2"] = rouge_n(candidate, reference, 2);
        m["rougeL"] = rouge_l(candidate, reference);
    } else {  // ExtractiveQa
        m["rouge1"] = rouge_n(candidate, reference, 1);
        m["rougeL"] = rouge_l(candidate, reference);
        m["meteor"] = meteor(candidate, reference);
    }
    return m;
}

struct ZeroShotEntry {
    std::optional<ZeroShotRecord> record;
    std::string error;
};

}  // namespace

SweepStats run_sweep(const ExperimentPlan& plan, ModelBackend& backend,
                     const std::filesystem::path& run_dir, const RunOptions& options) {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir / "records");
    CachingBackend cached(backend, run_dir / "cache" / "responses.jsonl");

    Dataset target = load_dataset(plan.target.name, plan.target.kind, plan.target.train_path,
                                  plan.target.test_path);
    std::vector<Dataset> histories;
    for (const auto& spec : plan.history_tasks) {
        if (spec.name == target.name && spec.kind == target.kind) {
            histories.push_back(target);  // in-context control reuses the target dataset
        } else {
            histories.push_back(load_dataset(spec.name, spec.kind, spec.train_path, spec.test_path));
        }
    }
    const std::size_t max_len = plan.lengths.back();
    for (const auto& ds : histories)
        if (max_len > ds.train.size())
            throw ConfigError("history task '" + ds.name + "' has " +
                              std::to_string(ds.train.size()) + " train instances, need " +
                              std::to_string(max_len));

    std::vector<TaskInstance> tests = target.test;
    if (plan.test_limit && *plan.test_limit < tests.size()) tests.resize(*plan.test_limit);
    if (tests.empty()) throw ConfigError("target test split is empty");

    // plan.json: written once, verified on resume.
    json plan_doc = plan_to_json(plan);
    plan_doc["plan_hash"] = plan_hash(plan);
    plan_doc["model_id"] = cached.model_id();
    plan_doc["supports_scoring"] = cached.supports_scoring();
    {
        json ids = json::array();
        for (const auto& inst : tests) ids.push_back(inst.id);
        plan_doc["test_instance_ids"] = std::move(ids);
    }
    const fs::path plan_path = run_dir / "plan.json";
    if (fs::exists(plan_path)) {
        std::ifstream in(plan_path, std::ios::binary);
        json existing = json::parse(in, nullptr, /*allow_exceptions=*/false);
        if (existing.is_discarded() || existing.value("plan_hash", "") != plan_doc["plan_hash"])
            throw ConfigError("run directory belongs to a different plan: " + run_dir.string());
    } else {
        std::ofstream out(plan_path, std::ios::binary);
        out << plan_doc.dump(2) << "\n";
    }

    // Records already persisted by an earlier (possibly killed) run.
    const fs::path records_path = run_dir / "records" / "records.jsonl";
    std::set<std::string> done;
    if (fs::exists(records_path)) {
        std::ifstream in(records_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (rec.is_discarded() || !rec.contains("instance_id")) continue;  // torn write
            done.insert(cell_key(rec["instance_id"].get<std::string>(),
                                 rec["ch_task"].get<std::string>(), rec["L"].get<std::size_t>(),
                                 rec["draw"].get<std::size_t>()));
        }
    }

    SweepStats stats;
    std::vector<Cell> pending;
    for (std::size_t ch = 0; ch < histories.size(); ++ch) {
        for (std::size_t L : plan.lengths) {
            const std::size_t draws = (L == 0) ? 1 : plan.history_draws;
            for (std::size_t draw = 0; draw < draws; ++draw) {
                for (std::size_t t = 0; t < tests.size(); ++t) {
                    std::string key = cell_key(tests[t].id, histories[ch].name, L, draw);
                    if (done.count(key)) {
                        ++stats.cells_skipped;
                        continue;
                    }
                    pending.push_back({ch, L, draw, t, std::move(key)});
                }
            }
        }
    }

    // Zero-shot pass: one anchor per test instance that still has work.
    std::map<std::size_t, ZeroShotEntry> zero_shot;
    {
        std::set<std::size_t> needed;
        for (const auto& cell : pending) needed.insert(cell.test_index);
        for (std::size_t t : needed) {
            ZeroShotEntry entry;
            try {
                entry.record = compute_zero_shot(cached, tests[t], plan.max_tokens);
            } catch (const std::exception& e) {
                entry.error = e.what();
            }
            zero_shot.emplace(t, std::move(entry));
        }
    }

    std::ofstream records_out(records_path, std::ios::binary | std::ios::app);
    std::mutex write_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> written{0};
    std::atomic<bool> stop{false};

    auto process_cell = [&](const Cell& cell) -> json {
        const TaskInstance& inst = tests[cell.test_index];
        const Dataset& ch_ds = histories[cell.ch_index];
        json rec{{"instance_id", inst.id},
                 {"ch_task", ch_ds.name},
                 {"L", cell.L},
                 {"draw", cell.draw},
                 {"failed", false}};
        try {
            const auto& zs = zero_shot.at(cell.test_index);
            if (!zs.record) throw EndpointError(0, "zero-shot anchor failed: " + zs.error);

            std::vector<TaskInstance> hist;
            if (cell.L > 0)
                hist = sample_history_instances(
                    ch_ds, cell.L, derive_history_seed(plan.run_seed, inst.id, cell.draw));
            Conversation conv = build_history(hist, inst, ch_ds.name, target.name);
            const auto messages = to_messages(conv);

            GenerationResult gen = cached.generate(messages, plan.max_tokens);
            rec["generation"] = {{"text", gen.text},
                                 {"token_count", gen.token_count},
                                 {"truncated", gen.truncated}};
            rec["reference"] = inst.reference;
            json cache_keys = json::array();
            cache_keys.push_back(
                CachingBackend::generate_key(cached.model_id(), messages, plan.max_tokens));

            if (is_classification(target.kind)) {
                ExtractionResult extraction = extract_answer(gen.text, target.kind);
                rec["extraction"] = {{"ok", extraction.ok}, {"label", extraction.label}};
                rec["correct"] = extraction.ok && extraction.label == inst.reference;
            } else {
                rec["metrics"] = metrics_for(target.kind, gen.text, inst.reference);
            }

            if (cached.supports_scoring()) {
                const std::string reference_response = render_reference_response(inst);
                SensitivityRecord sens =
                    compute_sensitivity(cached, conv, *zs.record, reference_response, gen.text);
                rec["sensitivity"] = {{"logp_rstar_u", sens.logp_rstar_u},
                                      {"logp_rstar_uh", sens.logp_rstar_uh},
                                      {"logp_actual_uh", sens.logp_actual_uh},
                                      {"logp_ref_u", sens.logp_ref_u},
                                      {"logp_ref_uh", sens.logp_ref_uh},
                                      {"log_rho_zero_shot", sens.log_rho_zero_shot},
                                      {"log_rho_confidence", sens.log_rho_confidence},
                                      {"log_rho_loss", sens.log_rho_loss},
                                      {"r_star", zs.record->r_star}};
                Conversation zero_conv = conv;
                zero_conv.history.clear();
                const auto messages_u = to_messages(zero_conv);
                const std::string& id = cached.model_id();
                cache_keys.push_back(CachingBackend::score_key(id, messages, zs.record->r_star));
                cache_keys.push_back(CachingBackend::score_key(id, messages, gen.text));
                cache_keys.push_back(CachingBackend::score_key(id, messages_u, reference_response));
                cache_keys.push_back(CachingBackend::score_key(id, messages, reference_response));
            }
            rec["cache_keys"] = std::move(cache_keys);
        } catch (const std::exception& e) {
            rec["failed"] = true;
            rec["error"] = e.what();
        }
        return rec;
    };

    auto worker = [&] {
        while (!stop.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            json rec = process_cell(pending[i]);
            std::lock_guard lock(write_mutex);
            if (options.stop_after_records && written.load() >= *options.stop_after_records) {
                stop.store(true);
                return;
            }
            records_out << rec.dump() << "\n";
            records_out.flush();
            written.fetch_add(1);
            if (options.stop_after_records && written.load() >= *options.stop_after_records)
                stop.store(true);
        }
    };

    const std::size_t n_workers = std::min(plan.workers, std::max<std::size_t>(pending.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    stats.records_written = written.load();
    stats.backend_calls = cached.inner_calls();
    stats.stopped_early = stop.load();
    return stats;
}

}  // namespace tsb
