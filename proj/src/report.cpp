#include "tsb/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "tsb/corpus.hpp"
#include "tsb/errors.hpp"
#include "tsb/sensitivity.hpp"

namespace tsb {

using nlohmann::json;

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "md" || name == "markdown") return ReportFormat::Markdown;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("unknown report format '" + name + "'");
}

namespace {

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::vector<std::string> metric_names_for(TaskKind kind) {
    if (is_classification(kind)) return {"accuracy"};
    if (kind == TaskKind::Summarization) return {"rouge1", "rouge2", "rougeL"};
    return {"rouge1", "rougeL", "meteor"};
}

std::string pct_cell(const PercentChange& pc, bool scale_abs_by_100) {
    if (pc.absolute) return fmt2(scale_abs_by_100 ? pc.value * 100.0 : pc.value) + " (abs)";
    return fmt2(pc.value);
}

std::string tau_cell(const std::optional<double>& tau) { return tau ? fmt2(*tau) : "*"; }

}  // namespace

Report aggregate_run(const std::filesystem::path& run_dir) {
    namespace fs = std::filesystem;
    const fs::path plan_path = run_dir / "plan.json";
    if (!fs::exists(plan_path)) throw ConfigError("no plan.json in " + run_dir.string());
    json plan;
    {
        std::ifstream in(plan_path, std::ios::binary);
        plan = json::parse(in);
    }
    const TaskKind target_kind = kind_from_string(plan["target_task"]["kind"].get<std::string>());
    const std::string model_id = plan.value("model_id", "?");
    const bool supports_scoring = plan.value("supports_scoring", false);
    const std::size_t history_draws = plan.value("history_draws", std::size_t{1});
    const std::vector<std::size_t> lengths = plan["lengths"].get<std::vector<std::size_t>>();
    std::vector<std::string> ch_tasks;
    for (const auto& spec : plan["history_tasks"]) ch_tasks.push_back(spec["name"].get<std::string>());
    const std::vector<std::string> test_ids =
        plan["test_instance_ids"].get<std::vector<std::string>>();

    // Latest record per cell key wins.
    std::map<std::string, json> records;
    {
        const fs::path records_path = run_dir / "records" / "records.jsonl";
        if (!fs::exists(records_path)) throw ConfigError("no records in " + run_dir.string());
        std::ifstream in(records_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (rec.is_discarded() || !rec.contains("instance_id")) continue;
            std::string key = rec["instance_id"].get<std::string>() + "\x1f" +
                              rec["ch_task"].get<std::string>() + "\x1f" +
                              std::to_string(rec["L"].get<std::size_t>()) + "\x1f" +
                              std::to_string(rec["draw"].get<std::size_t>());
            records[std::move(key)] = std::move(rec);
        }
    }

    std::vector<std::string> missing;
    for (const auto& ch : ch_tasks)
        for (std::size_t L : lengths)
            for (std::size_t draw = 0; draw < ((L == 0) ? 1 : history_draws); ++draw)
                for (const auto& id : test_ids) {
                    std::string key = id + "\x1f" + ch + "\x1f" + std::to_string(L) + "\x1f" +
                                      std::to_string(draw);
                    if (!records.count(key))
                        missing.push_back(ch + "/L=" + std::to_string(L) + "/draw=" +
                                          std::to_string(draw) + "/" + id);
                }
    if (!missing.empty()) throw IncompleteRun(std::move(missing));

    const auto metric_names = metric_names_for(target_kind);

    Report report;
    report.meta = {{"schema_version", plan.value("schema_version", 1)},
                   {"plan_hash", plan.value("plan_hash", "")},
                   {"model_id", model_id},
                   {"target_task", plan["target_task"]["name"]},
                   {"target_kind", to_string(target_kind)},
                   {"supports_scoring", supports_scoring},
                   {"run_seed", plan.value("run_seed", std::uint64_t{0})},
                   {"history_draws", history_draws},
                   {"n_test", test_ids.size()}};

    for (const auto& ch : ch_tasks) {
        for (std::size_t L : lengths) {
            std::vector<json> cell;
            std::size_t failed = 0;
            for (std::size_t draw = 0; draw < ((L == 0) ? 1 : history_draws); ++draw)
                for (const auto& id : test_ids) {
                    const json& rec = records.at(id + "\x1f" + ch + "\x1f" + std::to_string(L) +
                                                 "\x1f" + std::to_string(draw));
                    if (rec.value("failed", false)) ++failed;
                    else cell.push_back(rec);
                }

            std::optional<double> tau_zs, tau_zs_se, tau_conf, tau_loss;
            if (supports_scoring && !cell.empty()) {
                std::vector<SensitivityRecord> sens;
                for (const json& rec : cell) {
                    if (!rec.contains("sensitivity") || rec["sensitivity"].is_null()) continue;
                    const json& s = rec["sensitivity"];
                    SensitivityRecord r;
                    r.instance_id = rec["instance_id"].get<std::string>();
                    r.L = L;
                    r.history_task = ch;
                    r.log_rho_zero_shot = s["log_rho_zero_shot"].get<double>();
                    r.log_rho_confidence = s["log_rho_confidence"].get<double>();
                    r.log_rho_loss = s["log_rho_loss"].get<double>();
                    sens.push_back(std::move(r));
                }
                if (!sens.empty()) {
                    auto t1 = tau_estimate(sens, SensitivityVariant::ZeroShot, ch);
                    tau_zs = t1.value;
                    tau_zs_se = t1.std_err;
                    tau_conf = tau_estimate(sens, SensitivityVariant::Confidence, ch).value;
                    tau_loss = tau_estimate(sens, SensitivityVariant::Loss, ch).value;
                }
            }

            std::size_t format_failures = 0;
            std::map<std::string, double> values;
            if (!cell.empty()) {
                if (is_classification(target_kind)) {
                    std::vector<std::pair<ExtractionResult, std::string>> pairs;
                    for (const json& rec : cell) {
                        const json& ex = rec["extraction"];
                        ExtractionResult extraction =
                            ex["ok"].get<bool>()
                                ? ExtractionResult::success(ex["label"].get<std::string>(), "")
                                : ExtractionResult::format_error("");
                        pairs.emplace_back(std::move(extraction),
                                           rec["reference"].get<std::string>());
                    }
                    EvalCellStats stats = accuracy(pairs);
                    values["accuracy"] = stats.value;
                    format_failures = stats.format_failures;
                } else {
                    for (const auto& name : metric_names) {
                        double sum = 0.0;
                        for (const json& rec : cell) sum += rec["metrics"][name].get<double>();
                        values[name] = sum / static_cast<double>(cell.size());
                    }
                }
            }

            for (const auto& name : metric_names) {
                ReportRow row;
                row.ch_task = ch;
                row.model = model_id;
                row.L = L;
                row.metric = name;
                row.n = cell.size();
                row.value = values.count(name) ? values[name] : 0.0;
                row.tau_zero_shot = tau_zs;
                row.tau_zero_shot_stderr = tau_zs_se;
                row.tau_confidence = tau_conf;
                row.tau_loss = tau_loss;
                row.format_failures = format_failures;
                row.failed_records = failed;
                report.rows.push_back(std::move(row));
            }
        }
    }

    // Percent change vs the same CH task's L=0 cell.
    for (auto& row : report.rows) {
        const auto baseline = std::find_if(report.rows.begin(), report.rows.end(),
                                           [&](const ReportRow& r) {
                                               return r.ch_task == row.ch_task && r.L == 0 &&
                                                      r.metric == row.metric;
                                           });
        if (baseline == report.rows.end()) continue;
        row.pct_change = percent_change(baseline->value, row.value);
        row.format_failure_delta = percent_change(static_cast<double>(baseline->format_failures),
                                                  static_cast<double>(row.format_failures));
    }
    return report;
}

std::string render_report(const Report& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json rows = json::array();
        for (const auto& row : report.rows) {
            json r{{"ch_task", row.ch_task},
                   {"model", row.model},
                   {"L", row.L},
                   {"metric", row.metric},
                   {"n", row.n},
                   {"value", row.value},
                   {"pct_change", row.pct_change.value},
                   {"pct_change_is_absolute", row.pct_change.absolute},
                   {"format_failures", row.format_failures},
                   {"format_failure_delta", row.format_failure_delta.value},
                   {"format_failure_delta_is_absolute", row.format_failure_delta.absolute},
                   {"failed_records", row.failed_records}};
            r["tau_zero_shot"] = row.tau_zero_shot ? json(*row.tau_zero_shot) : json(nullptr);
            r["tau_zero_shot_stderr"] =
                row.tau_zero_shot_stderr ? json(*row.tau_zero_shot_stderr) : json(nullptr);
            r["tau_confidence"] = row.tau_confidence ? json(*row.tau_confidence) : json(nullptr);
            r["tau_loss"] = row.tau_loss ? json(*row.tau_loss) : json(nullptr);
            rows.push_back(std::move(r));
        }
        return json{{"meta", report.meta}, {"rows", rows}}.dump(2) + "\n";
    }

    if (format == ReportFormat::Csv) {
        std::string out =
            "ch_task,model,L,metric,n,value,pct_change,pct_change_mode,tau,tau_stderr,"
            "tau_confidence,tau_loss,format_failures,format_failure_delta,"
            "format_failure_delta_mode,failed_records\n";
        for (const auto& row : report.rows) {
            out += row.ch_task + "," + row.model + "," + std::to_string(row.L) + "," + row.metric +
                   "," + std::to_string(row.n) + "," + fmt2(row.value * 100.0) + "," +
                   fmt2(row.pct_change.absolute ? row.pct_change.value * 100.0
                                                : row.pct_change.value) +
                   "," + (row.pct_change.absolute ? "absolute" : "relative") + "," +
                   tau_cell(row.tau_zero_shot) + "," + tau_cell(row.tau_zero_shot_stderr) + "," +
                   tau_cell(row.tau_confidence) + "," + tau_cell(row.tau_loss) + "," +
                   std::to_string(row.format_failures) + "," + fmt2(row.format_failure_delta.value) +
                   "," + (row.format_failure_delta.absolute ? "absolute" : "relative") + "," +
                   std::to_string(row.failed_records) + "\n";
        }
        return out;
    }

    // Markdown
    std::string out;
    out += "# Task-switch report\n\n";
    out += "Model: " + report.meta.value("model_id", "?") + "  \n";
    out += "Target task: " + report.meta.value("target_task", "?") + " (" +
           report.meta.value("target_kind", "?") + ")\n\n";
    out += "| CH-Task | L | Metric | Value | % Change | tau | tau(conf) | tau(loss) | FmtFail | "
           "dFmtFail |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& row : report.rows) {
        out += "| " + row.ch_task + " | " + std::to_string(row.L) + " | " + row.metric + " | " +
               fmt2(row.value * 100.0) + " | " + pct_cell(row.pct_change, true) + " | " +
               tau_cell(row.tau_zero_shot) + " | " + tau_cell(row.tau_confidence) + " | " +
               tau_cell(row.tau_loss) + " | " + std::to_string(row.format_failures) + " | " +
               pct_cell(row.format_failure_delta, false) + " |\n";
    }
    return out;
}

void write_report_files(const Report& report, const std::filesystem::path& run_dir) {
    const std::pair<ReportFormat, const char*> outputs[] = {
        {ReportFormat::Csv, "report.csv"},
        {ReportFormat::Markdown, "report.md"},
        {ReportFormat::Json, "report.json"},
    };
    for (const auto& [format, name] : outputs) {
        std::ofstream out(run_dir / name, std::ios::binary);
        out << render_report(report, format);
    }
}

}  // namespace tsb
