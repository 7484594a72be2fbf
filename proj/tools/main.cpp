#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsb/corpus.hpp"
#include "tsb/errors.hpp"
#include "tsb/harness.hpp"
#include "tsb/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_run(const std::string& config_path, const std::string& run_dir_flag,
            std::optional<std::size_t> limit, const std::vector<std::size_t>& lengths,
            std::optional<std::uint64_t> seed) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw tsb::ConfigError("cannot open config: " + config_path);
    json config = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (config.is_discarded()) throw tsb::ConfigError("config is not valid JSON: " + config_path);

    tsb::ExperimentPlan plan =
        tsb::plan_from_json(config, fs::absolute(config_path).parent_path());
    if (limit) plan.test_limit = *limit;
    if (!lengths.empty()) {
        plan.lengths = lengths;
        if (plan.lengths.front() != 0) throw tsb::ConfigError("--lengths must start with 0");
    }
    if (seed) plan.run_seed = *seed;

    fs::path run_dir = run_dir_flag.empty() ? fs::path(config.value("run_dir", "run"))
                                            : fs::path(run_dir_flag);
    auto backend = tsb::make_backend(plan.model);
    tsb::SweepStats stats = tsb::run_sweep(plan, *backend, run_dir);
    std::cout << "run complete: " << stats.records_written << " new records, "
              << stats.cells_skipped << " resumed, " << stats.backend_calls
              << " backend calls -> " << run_dir.string() << "\n";
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& format_name) {
    tsb::Report report = tsb::aggregate_run(run_dir);
    tsb::write_report_files(report, run_dir);
    std::cout << tsb::render_report(report, tsb::report_format_from_string(format_name));
    return 0;
}

int cmd_validate(const std::string& dataset_path, const std::string& kind_name) {
    tsb::TaskKind kind = tsb::kind_from_string(kind_name);
    auto instances = tsb::load_split(dataset_path, kind);
    std::cout << dataset_path << ": " << instances.size() << " valid " << kind_name
              << " records\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-switch sensitivity benchmark for conversational language models"};
    app.require_subcommand(1);

    std::string config_path, run_dir, format_name = "md", dataset_path, kind_name;
    std::optional<std::size_t> limit;
    std::optional<std::uint64_t> seed;
    std::vector<std::size_t> lengths;

    auto* run = app.add_subcommand("run", "Execute an experiment plan");
    run->add_option("--config", config_path, "Plan config (JSON)")->required();
    run->add_option("--run-dir", run_dir, "Run directory (default: config run_dir or ./run)");
    run->add_option("--limit", limit, "Evaluate only the first N test instances");
    run->add_option("--lengths", lengths, "Comma-separated history lengths, must start with 0")
        ->delimiter(',');
    run->add_option("--seed", seed, "Run seed override");

    auto* report = app.add_subcommand("report", "Aggregate a run directory into report tables");
    report->add_option("--run-dir", run_dir, "Run directory")->required();
    report->add_option("--format", format_name, "csv|md|json (stdout format)");

    auto* validate = app.add_subcommand("validate", "Validate a JSONL dataset file");
    validate->add_option("--dataset", dataset_path, "Dataset JSONL file")->required();
    validate->add_option("--kind", kind_name, "mcq|sentiment|summarization|qa")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, run_dir, limit, lengths, seed);
        if (report->parsed()) return cmd_report(run_dir, format_name);
        if (validate->parsed()) return cmd_validate(dataset_path, kind_name);
    } catch (const tsb::IncompleteRun& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (std::size_t i = 0; i < e.missing.size() && i < 10; ++i)
            std::cerr << "  missing: " << e.missing[i] << "\n";
        if (e.missing.size() > 10) std::cerr << "  ... and " << e.missing.size() - 10 << " more\n";
        return 3;
    } catch (const tsb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tsb::MalformedRecord& e) {
        std::cerr << "invalid dataset: " << e.what() << "\n";
        return 2;
    } catch (const tsb::KindMismatch& e) {
        std::cerr << "invalid dataset: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
