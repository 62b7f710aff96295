// debatelab: run identity-grounded multi-agent debates, score them, and
// reproduce the resilience / ablation / learning-outcome tables.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "debate/errors.hpp"
#include "debate/experiment.hpp"
#include "debate/metrics.hpp"
#include "debate/orchestrator.hpp"
#include "debate/retrieval.hpp"
#include "debate/text_util.hpp"

namespace fs = std::filesystem;
using namespace debate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    std::string backend_override;  // scripted | remote
    std::string keywords_dir;
    std::string out;
    std::string seed_order;  // comma-separated team ids
    std::string window = "all";  // all | post
    int jobs = 1;
};

MetricWindow parse_window(const std::string& w) {
    if (w == "all") return MetricWindow::ALL_PHASE3;
    if (w == "post") return MetricWindow::POST_INJECTION;
    throw ConfigError("--window must be 'all' or 'post', got '" + w + "'");
}

void apply_overrides(RunConfig& config, const GlobalOpts& opts,
                     bool no_perturbation) {
    if (!opts.backend_override.empty()) config.backend.kind = opts.backend_override;
    if (!opts.keywords_dir.empty()) config.keywords_dir = opts.keywords_dir;
    if (no_perturbation) config.perturbations.clear();
    if (!opts.seed_order.empty()) {
        config.speaker_seed.clear();
        std::string cur;
        for (char c : opts.seed_order + ",") {
            if (c == ',') {
                if (!cur.empty()) config.speaker_seed.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    }
    validate_config(config);
}

int cmd_ingest(const std::string& manifest_path, const std::string& out) {
    const auto manifest = load_manifest(manifest_path);
    const std::string cache =
        out.empty()
            ? (fs::path(manifest_path).parent_path() / "index_cache.json").string()
            : out;
    const IngestReport report = ingest_to_cache(manifest, cache);
    std::size_t chunks = 0;
    for (const auto& e : report.entries) {
        std::cout << e.corpus_id << ": " << e.chunk_count << " chunks"
                  << (e.cache_hit ? " (cache hit)" : "") << "\n";
        chunks += e.chunk_count;
    }
    std::cout << report.entries.size() << " corpora indexed, " << chunks
              << " chunks total -> " << report.cache_path << "\n";
    return kExitOk;
}

int cmd_debate(const std::string& config_path, const GlobalOpts& opts,
               bool no_perturbation) {
    RunConfig config = load_run_config(config_path);
    apply_overrides(config, opts, no_perturbation);
    const std::string out_dir = opts.out.empty() ? "runs/debate" : opts.out;

    const RunOutput output = run_full_pipeline(config, out_dir);
    std::cout << "transcript: " << output.transcript_path << " ("
              << output.state.transcript.size() << " turns)\n";

    if (config.keywords_dir.empty()) {
        std::cout << "no keywords_dir configured; skipping metrics\n";
        return kExitOk;
    }
    const KeywordLibrary library = load_keywords(config.keywords_dir);
    const Roster roster = roster_from_config(config);
    const MetricReport report =
        compute_report(output.state.transcript, library, roster,
                       injection_turn_of(config), parse_window(opts.window));
    const std::string metrics_path = (fs::path(out_dir) / "metrics.json").string();
    write_file(metrics_path, report_to_json(report));
    std::cout << "metrics: " << metrics_path << "\n";
    if (report.sys_ar) std::cout << "SysAR " << format2(*report.sys_ar) << "\n";
    if (report.ar_co) std::cout << "ArCo  " << format2(*report.ar_co) << "\n";
    if (report.da.mean) std::cout << "DA    " << format2(*report.da.mean) << "\n";
    if (report.cr.mean) std::cout << "CR    " << format2(*report.cr.mean) << "\n";
    return kExitOk;
}

int cmd_report(const std::string& transcript_path, const std::string& config_path,
               const GlobalOpts& opts, int injection_override) {
    const RunConfig config = load_run_config(config_path);
    const std::string keywords =
        opts.keywords_dir.empty() ? config.keywords_dir : opts.keywords_dir;
    if (keywords.empty()) throw ConfigError("report: no keywords directory");

    const auto transcript = load_transcript(transcript_path);
    const KeywordLibrary library = load_keywords(keywords);
    const Roster roster = roster_from_config(config);
    std::optional<int> injection = injection_turn_of(config);
    if (injection_override > 0) injection = injection_override;

    const MetricReport report = compute_report(transcript, library, roster,
                                               injection, parse_window(opts.window));
    if (opts.out.empty()) {
        std::cout << report_to_json(report);
    } else {
        write_file(opts.out, report_to_json(report));
        std::cout << "metrics: " << opts.out << "\n";
    }
    return kExitOk;
}

int cmd_factorial(const std::string& plan_path, const GlobalOpts& opts) {
    const ExperimentPlan plan = load_plan(plan_path);
    const std::string out_root =
        opts.out.empty() ? "runs/" + plan.name : opts.out;
    const auto results =
        execute_plan(plan, out_root, opts.jobs, parse_window(opts.window));
    const std::string csv = factorial_csv(results);
    const std::string table_path = (fs::path(out_root) / "table.csv").string();
    write_file(table_path, csv);
    std::cout << csv << "table: " << table_path << "\n";
    return kExitOk;
}

int cmd_ablation(const std::string& plan_path, const GlobalOpts& opts) {
    const ExperimentPlan plan = load_plan(plan_path);
    const std::string out_root =
        opts.out.empty() ? "runs/" + plan.name : opts.out;
    const auto results =
        execute_plan(plan, out_root, opts.jobs, parse_window(opts.window));
    const std::string csv = ablation_csv(results);
    const std::string table_path = (fs::path(out_root) / "table.csv").string();
    write_file(table_path, csv);
    std::cout << csv << "table: " << table_path << "\n";
    return kExitOk;
}

int cmd_acs(const std::string& records_path, const GlobalOpts& opts) {
    const auto records = load_acs_csv(records_path);
    const AcsAggregate aggregate = acs_aggregate(records);
    const std::string csv = acs_csv(aggregate);
    if (!opts.out.empty()) {
        const std::string table_path =
            fs::path(opts.out).extension() == ".csv"
                ? opts.out
                : (fs::path(opts.out) / "table.csv").string();
        write_file(table_path, csv);
        std::cout << csv << "table: " << table_path << "\n";
    } else {
        std::cout << csv;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"identity-grounded multi-agent debate engine"};
    app.require_subcommand(1);

    GlobalOpts opts;
    std::string global_config;
    app.add_option("--config", global_config,
                   "run config file (alternative to the positional argument)");
    app.add_option("--backend", opts.backend_override,
                   "override backend kind (scripted|remote)");
    app.add_option("--keywords-dir", opts.keywords_dir, "override keyword directory");
    app.add_option("--out", opts.out, "output directory (or file for acs/report)");
    app.add_option("--seed-order", opts.seed_order,
                   "comma-separated team order for the speaker rotation");
    app.add_option("--window", opts.window, "metric window: all|post")
        ->check(CLI::IsMember({"all", "post"}));
    app.add_option("--jobs", opts.jobs, "concurrent runs for plans")
        ->check(CLI::PositiveNumber);

    std::string manifest_path, config_path, plan_path, records_path, transcript_path;
    bool no_perturbation = false;
    int injection_override = 0;

    auto* ingest = app.add_subcommand("ingest", "build retrieval index caches");
    ingest->add_option("manifest", manifest_path, "corpus manifest file")
        ->required();

    auto* debate_cmd = app.add_subcommand("debate", "run one debate and score it");
    debate_cmd->add_option("config", config_path, "run config file");
    debate_cmd->add_flag("--no-perturbation", no_perturbation,
                         "clear the perturbation schedule");

    auto* report = app.add_subcommand("report", "recompute metrics for a transcript");
    report->add_option("transcript", transcript_path, "transcript JSONL")->required();
    report->add_option("config", config_path, "run config (roster + keywords)")
        ->required();
    report->add_option("--injection-turn", injection_override,
                       "override the injection debate turn");

    auto* factorial = app.add_subcommand("factorial", "run a resilience factorial plan");
    factorial->add_option("plan", plan_path, "experiment plan file")->required();

    auto* ablation = app.add_subcommand("ablation", "run a module ablation plan");
    ablation->add_option("plan", plan_path, "experiment plan file")->required();

    auto* acs = app.add_subcommand("acs", "aggregate ACS study records");
    acs->add_option("records", records_path, "ACS records CSV")->required();

    // global flags may appear after the subcommand
    for (auto* sub : {ingest, debate_cmd, report, factorial, ablation, acs})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    if (config_path.empty()) config_path = global_config;

    try {
        if (*ingest) return cmd_ingest(manifest_path, opts.out);
        if (*debate_cmd) {
            if (config_path.empty())
                throw ConfigError("debate: a config file is required "
                                  "(positional or --config)");
            return cmd_debate(config_path, opts, no_perturbation);
        }
        if (*report) return cmd_report(transcript_path, config_path, opts,
                                       injection_override);
        if (*factorial) return cmd_factorial(plan_path, opts);
        if (*ablation) return cmd_ablation(plan_path, opts);
        if (*acs) return cmd_acs(records_path, opts);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
