#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debate/config.hpp"
#include "debate/metrics.hpp"
#include "debate/orchestrator.hpp"

namespace debate {

/// One run inside an experiment plan. Fields beyond config_path override
/// the loaded config, which is how the harnesses vary perturbation,
/// scripts and module toggles without duplicating rosters.
struct PlanRun {
    std::string run_id;
    std::string system;        // factorial grouping label (Hetero / Homo)
    std::string variant;       // ablation: vanilla | id_rag | tom | full
    std::string perturbation;  // P1 | P2 | P3; empty = keep config schedule
    std::string config_path;
    std::string script_path;   // optional backend script override
    std::optional<int> perturbation_turn;  // default 4 when perturbation set
    std::optional<bool> id_rag_enabled;
    std::optional<bool> tom_enabled;
};

struct ExperimentPlan {
    std::string name;
    std::vector<PlanRun> runs;
};

ExperimentPlan load_plan(const std::string& path);

/// Checks run_id uniqueness and that every referenced config, identity,
/// corpus and script file exists. Throws ConfigError with the full list of
/// missing paths.
void validate_plan(const ExperimentPlan& plan);

/// Config with a plan run's overrides applied.
RunConfig resolve_run_config(const PlanRun& run);

struct RunResult {
    PlanRun run;
    MetricReport report;
    std::string out_dir;
};

/// Executes one run end to end: pipeline, transcript/audit persistence,
/// metric computation, metrics.json. `window` and `cr_threshold` feed the
/// metric layer.
RunResult execute_plan_run(const PlanRun& run, const std::string& out_root,
                           MetricWindow window = MetricWindow::ALL_PHASE3,
                           std::size_t cr_threshold = 1);

/// Runs every plan run (up to `jobs` concurrently) and returns results in
/// plan order.
std::vector<RunResult> execute_plan(const ExperimentPlan& plan,
                                    const std::string& out_root, int jobs = 1,
                                    MetricWindow window = MetricWindow::ALL_PHASE3,
                                    std::size_t cr_threshold = 1);

/// Resilience factorial table: one row per run (system, perturbation,
/// SysAR, ArCo at two decimals) plus per-system mean rows.
std::string factorial_csv(const std::vector<RunResult>& results);

/// Ablation table: per-variant DA/CR/ArCo means in canonical order plus
/// the module-contribution delta rows in percentage points.
std::string ablation_csv(const std::vector<RunResult>& results);

/// Learning-outcome table per condition plus Cohen's d of HETERO against
/// the pooled baseline conditions.
std::string acs_csv(const AcsAggregate& aggregate);

/// Roster (agent, school, team) extracted from a run config by loading
/// the referenced identities.
Roster roster_from_config(const RunConfig& config);

/// First scheduled perturbation turn, if any.
std::optional<int> injection_turn_of(const RunConfig& config);

}  // namespace debate
