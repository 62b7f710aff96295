#include "debate/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <unordered_set>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

namespace fs = std::filesystem;

ExperimentPlan load_plan(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError(path + ": no such plan file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&base](const std::string& p) -> std::string {
        if (p.empty()) return p;
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
    };

    ExperimentPlan plan;
    try {
        plan.name = j.at("name").get<std::string>();
        for (const auto& jr : j.at("runs")) {
            PlanRun run;
            run.run_id = jr.at("run_id").get<std::string>();
            run.system = jr.value("system", std::string{});
            run.variant = jr.value("variant", std::string{});
            run.perturbation = jr.value("perturbation", std::string{});
            run.config_path = resolve(jr.at("config").get<std::string>());
            run.script_path = resolve(jr.value("script", std::string{}));
            if (jr.contains("perturbation_turn"))
                run.perturbation_turn = jr["perturbation_turn"].get<int>();
            if (jr.contains("id_rag_enabled"))
                run.id_rag_enabled = jr["id_rag_enabled"].get<bool>();
            if (jr.contains("tom_enabled"))
                run.tom_enabled = jr["tom_enabled"].get<bool>();
            plan.runs.push_back(std::move(run));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": plan schema violation: " + e.what());
    }
    if (plan.runs.empty()) throw ConfigError(path + ": plan lists no runs");
    validate_plan(plan);
    return plan;
}

void validate_plan(const ExperimentPlan& plan) {
    std::unordered_set<std::string> ids;
    std::vector<std::string> missing;
    for (const PlanRun& run : plan.runs) {
        if (!ids.insert(run.run_id).second)
            throw ConfigError("plan: duplicate run_id '" + run.run_id + "'");
        if (!fs::exists(run.config_path)) {
            missing.push_back(run.config_path);
            continue;
        }
        const RunConfig config = load_run_config(run.config_path);
        for (const AgentSpec* agent : config.all_agents()) {
            if (!agent->identity_path.empty() && !fs::exists(agent->identity_path))
                missing.push_back(agent->identity_path);
            if (!agent->weakness_map_path.empty() &&
                !fs::exists(agent->weakness_map_path))
                missing.push_back(agent->weakness_map_path);
        }
        if (!config.manifest_path.empty()) {
            if (!fs::exists(config.manifest_path)) {
                missing.push_back(config.manifest_path);
            } else {
                // load_manifest verifies every corpus path it lists
                load_manifest(config.manifest_path);
            }
        }
        const std::string script =
            run.script_path.empty() ? config.backend.script_path : run.script_path;
        if (config.backend.kind == "scripted" && !script.empty() &&
            !fs::exists(script))
            missing.push_back(script);
    }
    if (!missing.empty()) {
        std::string msg = "plan references missing files:";
        for (const std::string& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }
}

RunConfig resolve_run_config(const PlanRun& run) {
    RunConfig config = load_run_config(run.config_path);
    if (!run.script_path.empty()) config.backend.script_path = run.script_path;
    if (!run.perturbation.empty()) {
        ScheduledPerturbation sp;
        sp.debate_turn = run.perturbation_turn.value_or(4);
        sp.spec =
            PerturbationSpec::named(PerturbationSpec::id_from_name(run.perturbation));
        config.perturbations = {sp};
    }
    if (run.id_rag_enabled) config.id_rag_enabled = *run.id_rag_enabled;
    if (run.tom_enabled) config.tom_enabled = *run.tom_enabled;
    validate_config(config);
    return config;
}

Roster roster_from_config(const RunConfig& config) {
    Roster roster;
    auto add = [&roster](const AgentSpec& a, const std::string& team) {
        RosterEntry e;
        e.agent_id = a.agent_id;
        e.team_id = team;
        if (!a.identity_path.empty()) e.school = load_identity(a.identity_path).school;
        roster.push_back(std::move(e));
    };
    if (config.solo) add(*config.solo, "");
    for (const TeamSpec& t : config.teams) {
        for (const AgentSpec& a : t.agents) add(a, t.team_id);
    }
    return roster;
}

std::optional<int> injection_turn_of(const RunConfig& config) {
    if (config.perturbations.empty()) return std::nullopt;
    return config.perturbations.front().debate_turn;
}

RunResult execute_plan_run(const PlanRun& run, const std::string& out_root,
                           MetricWindow window, std::size_t cr_threshold) {
    const RunConfig config = resolve_run_config(run);
    const std::string out_dir = (fs::path(out_root) / run.run_id).string();
    const RunOutput output = run_full_pipeline(config, out_dir);

    KeywordLibrary library;
    if (config.keywords_dir.empty())
        throw ConfigError(run.config_path + ": keywords_dir required for metrics");
    library = load_keywords(config.keywords_dir);

    const Roster roster = roster_from_config(config);
    MetricReport report =
        compute_report(output.state.transcript, library, roster,
                       injection_turn_of(config), window, cr_threshold);
    write_file((fs::path(out_dir) / "metrics.json").string(), report_to_json(report));

    RunResult result;
    result.run = run;
    result.report = std::move(report);
    result.out_dir = out_dir;
    return result;
}

std::vector<RunResult> execute_plan(const ExperimentPlan& plan,
                                    const std::string& out_root, int jobs,
                                    MetricWindow window, std::size_t cr_threshold) {
    if (jobs < 1) jobs = 1;
    std::vector<RunResult> results(plan.runs.size());
    std::size_t next = 0;
    while (next < plan.runs.size()) {
        const std::size_t batch =
            std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                  plan.runs.size() - next);
        std::vector<std::future<RunResult>> futures;
        for (std::size_t i = 0; i < batch; ++i) {
            const PlanRun run = plan.runs[next + i];
            futures.push_back(std::async(std::launch::async, [run, &out_root, window,
                                                              cr_threshold] {
                return execute_plan_run(run, out_root, window, cr_threshold);
            }));
        }
        for (std::size_t i = 0; i < batch; ++i) results[next + i] = futures[i].get();
        next += batch;
    }
    return results;
}

namespace {

std::string pert_label(const PlanRun& run) {
    if (!run.perturbation.empty()) return run.perturbation;
    return "-";
}

/// "+39" / "-12" — percentage-point delta, half away from zero.
std::string format_pp(double fraction_delta) {
    const double pp = fraction_delta * 100.0;
    const long rounded = std::lround(std::abs(pp));
    std::string out = pp < 0 && rounded != 0 ? "-" : "+";
    out += std::to_string(rounded);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string factorial_csv(const std::vector<RunResult>& results) {
    std::string csv = "system,perturbation,sys_ar,ar_co\n";
    // group means in first-appearance order
    std::vector<std::string> systems;
    std::map<std::string, std::vector<double>> sys_ar_by, ar_co_by;
    for (const RunResult& r : results) {
        const std::string& system = r.run.system;
        if (!sys_ar_by.count(system)) systems.push_back(system);
        const double sar = r.report.sys_ar.value_or(0.0);
        const double aco = r.report.ar_co.value_or(0.0);
        sys_ar_by[system].push_back(sar);
        ar_co_by[system].push_back(aco);
        csv += system + "," + pert_label(r.run) + "," + format2(sar) + "," +
               format2(aco) + "\n";
    }
    for (const std::string& system : systems) {
        csv += "Mean (" + system.substr(0, 3) + "),," +
               format2(mean_of(sys_ar_by[system])) + "," +
               format2(mean_of(ar_co_by[system])) + "\n";
    }
    return csv;
}

std::string ablation_csv(const std::vector<RunResult>& results) {
    struct VariantRow {
        const char* key;
        const char* label;
    };
    static const VariantRow kRows[] = {
        {"vanilla", "Vanilla RAG Only"},
        {"id_rag", "Vanilla + ID-RAG"},
        {"tom", "Vanilla + ToM"},
        {"full", "Full System"},
    };

    std::map<std::string, std::vector<double>> da_by, cr_by, arco_by;
    for (const RunResult& r : results) {
        if (r.run.variant.empty())
            throw ConfigError("ablation table: run '" + r.run.run_id +
                              "' lacks a variant");
        da_by[r.run.variant].push_back(r.report.da.mean.value_or(0.0));
        cr_by[r.run.variant].push_back(r.report.cr.mean.value_or(0.0));
        arco_by[r.run.variant].push_back(r.report.ar_co.value_or(0.0));
    }

    std::map<std::string, double> da_mean, cr_mean;
    std::string csv = "condition,da,cr,ar_co\n";
    for (const VariantRow& row : kRows) {
        if (!da_by.count(row.key))
            throw ConfigError(std::string("ablation table: no runs for variant '") +
                              row.key + "'");
        da_mean[row.key] = mean_of(da_by[row.key]);
        cr_mean[row.key] = mean_of(cr_by[row.key]);
        csv += std::string(row.label) + "," + format2(da_mean[row.key]) + "," +
               format2(cr_mean[row.key]) + "," + format2(mean_of(arco_by[row.key])) +
               "\n";
    }
    csv += "Delta (ID-RAG) pp," + format_pp(da_mean["id_rag"] - da_mean["vanilla"]) +
           "," + format_pp(cr_mean["id_rag"] - cr_mean["vanilla"]) + ",\n";
    csv += "Delta (ToM) pp," + format_pp(da_mean["tom"] - da_mean["vanilla"]) + "," +
           format_pp(cr_mean["tom"] - cr_mean["vanilla"]) + ",\n";
    return csv;
}

std::string acs_csv(const AcsAggregate& aggregate) {
    std::string csv = "condition,n,delta_acs,quiz,shift\n";
    for (const AcsConditionStats& c : aggregate.conditions) {
        const std::string sign = c.delta_mean < 0 ? "" : "+";
        csv += c.condition + "," + std::to_string(c.n) + "," + sign +
               format2(c.delta_mean) + "," + format2(c.quiz_mean) + "," +
               format2(c.shift_mean) + "\n";
    }
    if (aggregate.cohen_d) {
        csv += "Cohen_d (HETERO vs pooled baselines),,";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", *aggregate.cohen_d);
        csv += buf;
        csv += ",,\n";
    }
    return csv;
}

}  // namespace debate
