#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsb/scoring.hpp"

namespace tsb {

enum class ReportFormat { Csv, Markdown, Json };
ReportFormat report_format_from_string(const std::string& name);

// One aggregated (CH task, L, metric) cell. Values are raw [0,1] (or raw
// log-ratio means for tau); rendering applies the x100 presentation scale.
struct ReportRow {
    std::string ch_task;
    std::string model;
    std::size_t L = 0;
    std::string metric;
    std::size_t n = 0;  // records entering the metric denominator
    double value = 0.0;
    PercentChange pct_change;                  // vs the same CH task's L=0 cell
    std::optional<double> tau_zero_shot;       // absent => rendered "*"
    std::optional<double> tau_zero_shot_stderr;
    std::optional<double> tau_confidence;
    std::optional<double> tau_loss;
    std::size_t format_failures = 0;
    PercentChange format_failure_delta;
    std::size_t failed_records = 0;            // endpoint faults, excluded from n
};

struct Report {
    nlohmann::json meta;
    std::vector<ReportRow> rows;
};

// Re-aggregate a run directory from its persisted records. No model access.
// Throws IncompleteRun (listing missing cells) when records do not cover
// every plan cell.
Report aggregate_run(const std::filesystem::path& run_dir);

std::string render_report(const Report& report, ReportFormat format);

// Write report.csv, report.md and report.json into run_dir.
void write_report_files(const Report& report, const std::filesystem::path& run_dir);

}  // namespace tsb
