#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "debate/transcript.hpp"

namespace debate {

/// A named keyword list. Phrases are stored normalized (lowercase,
/// collapsed whitespace).
struct KeywordSet {
    std::string name;
    std::vector<std::string> keywords;
};

/// The three lexicons driving every turn-level metric. BASE tracks the
/// original dilemma, VALID any philosophically relevant debate, FRAMEWORK
/// sets the vocabulary of each school.
struct KeywordLibrary {
    KeywordSet base;
    KeywordSet valid;
    std::map<std::string, KeywordSet> frameworks;  // school tag -> set
    std::string source_hash;  // fingerprint of the loaded files
};

/// Loads base.txt, valid.txt and framework_<school>.txt from a directory.
/// Enforces BASE as a subset of VALID.
KeywordLibrary load_keywords(const std::string& dir);

/// Number of distinct keywords present in the text. Single words match on
/// word boundaries ("one" never fires inside "someone"); multi-word
/// phrases match by substring. Case- and whitespace-insensitive. Pure.
std::size_t count_hits(const std::string& text, const KeywordSet& set);

/// Who speaks for whom; metrics need school and team per agent.
struct RosterEntry {
    std::string agent_id;
    std::string school;   // empty = excluded from DA/CR
    std::string team_id;  // empty = no opponents (solo)
};
using Roster = std::vector<RosterEntry>;

enum class MetricWindow { ALL_PHASE3, POST_INJECTION };

struct SysArResult {
    double value = 0.0;                 // 1/recovery_time, or 0.0
    std::optional<int> recovery_time;   // 1-based window position
};

/// Scans the post-injection Phase 3 speaker turns (at most `scan_cap`,
/// the canonical six) for the first turn with >= 3 BASE keywords.
SysArResult sys_ar(const std::vector<Turn>& transcript, const KeywordSet& base,
                   int injection_turn, int scan_cap = 6);

/// Fraction of all post-injection Phase 3 speaker turns with >= 3 VALID
/// keywords.
double ar_co(const std::vector<Turn>& transcript, const KeywordSet& valid,
             int injection_turn);

struct PerAgentMetric {
    std::map<std::string, double> per_agent;  // agents with >= 1 scored turn
    std::optional<double> mean;               // unweighted over present agents
};

/// Per agent: fraction of its Phase 3 turns carrying >= min_hits keywords
/// of its own school's framework set. Silent agents are absent, never 0.
PerAgentMetric doctrinal_accuracy(const std::vector<Turn>& transcript,
                                  const std::map<std::string, KeywordSet>& frameworks,
                                  const Roster& roster,
                                  MetricWindow window = MetricWindow::ALL_PHASE3,
                                  int injection_turn = 0, std::size_t min_hits = 2);

/// Per agent: fraction of its Phase 3 turns referencing any opposing-team
/// school's framework (>= threshold keywords of at least one such set).
PerAgentMetric cross_referencing(const std::vector<Turn>& transcript,
                                 const std::map<std::string, KeywordSet>& frameworks,
                                 const Roster& roster,
                                 MetricWindow window = MetricWindow::ALL_PHASE3,
                                 int injection_turn = 0, std::size_t threshold = 1);

/// Keyword hit counts for one turn, computed post-hoc by the metric layer.
struct TurnAnnotation {
    int turn_index = 0;
    std::optional<int> debate_turn_index;
    std::string speaker;
    std::size_t base_hits = 0;
    std::size_t valid_hits = 0;
    std::size_t own_framework_hits = 0;    // 0 when no school
    std::size_t opposing_framework_hits = 0;
};

/// Everything measured about one debate run.
struct MetricReport {
    std::optional<double> sys_ar;
    std::optional<int> recovery_time;  // absent iff sys_ar == 0 or no window
    std::optional<double> ar_co;
    PerAgentMetric da;
    PerAgentMetric cr;
    std::optional<int> injection_turn;          // debate turn of the injection
    std::vector<int> observation_turn_indices;  // global ids of window turns
    std::string keyword_hash;
    std::vector<TurnAnnotation> annotations;
};

/// Runs every applicable metric over a transcript. `injection_turn` comes
/// from the run's perturbation schedule; without one the resilience
/// metrics stay absent.
MetricReport compute_report(const std::vector<Turn>& transcript,
                            const KeywordLibrary& library, const Roster& roster,
                            std::optional<int> injection_turn,
                            MetricWindow window = MetricWindow::ALL_PHASE3,
                            std::size_t cr_threshold = 1);

/// Stable JSON rendering: raw values plus two-decimal display strings.
std::string report_to_json(const MetricReport& report);
MetricReport report_from_json(const std::string& json_text);

// --- ACS record aggregation -------------------------------------------------

/// Human-rated argument complexity rubric: three 0-2 dimensions.
struct AcsScore {
    int perspective_range = 0;
    int conceptual_sophistication = 0;
    int argumentative_structuring = 0;
    int total() const {
        return perspective_range + conceptual_sophistication + argumentative_structuring;
    }
};

inline constexpr const char* kAcsConditions[] = {"B_CHAT", "B_SINGLE_RAG", "HOMO",
                                                 "HETERO"};

struct AcsRecord {
    std::string participant_id;
    std::string condition;  // one of kAcsConditions
    AcsScore pre;
    AcsScore post;
    double quiz = 0.0;
    double stance_shift = 0.0;
};

/// CSV columns: participant_id,condition,pre_perspective,pre_concept,
/// pre_structure,post_perspective,post_concept,post_structure,quiz,
/// stance_shift. Dimension values must be 0..2.
std::vector<AcsRecord> load_acs_csv(const std::string& path);

struct AcsConditionStats {
    std::string condition;
    std::size_t n = 0;
    double delta_mean = 0.0;  // mean(post.total - pre.total)
    double quiz_mean = 0.0;
    double shift_mean = 0.0;
};

struct AcsAggregate {
    std::vector<AcsConditionStats> conditions;  // fixed condition order
    std::optional<double> cohen_d;  // HETERO vs pooled baselines; absent if
                                    // either group has fewer than 2 records
};

AcsAggregate acs_aggregate(const std::vector<AcsRecord>& records);

/// Cohen's d with the pooled sample standard deviation (ddof = 1 in each
/// group). Returns nullopt when either group has fewer than two values or
/// the pooled variance is zero.
std::optional<double> cohen_d(const std::vector<double>& group_a,
                              const std::vector<double>& group_b);

}  // namespace debate
