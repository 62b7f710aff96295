#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "debate/backend.hpp"
#include "debate/config.hpp"
#include "debate/identity.hpp"
#include "debate/retrieval.hpp"
#include "debate/tom.hpp"
#include "debate/transcript.hpp"

namespace debate {

struct TeamConfig {
    std::string team_id;
    std::vector<std::string> agent_ids;
    std::string stance_label;
};

/// The whole conversation state machine. Phase only ever advances
/// DELIBERATION -> INTERROGATION -> DEBATE -> DONE.
struct DebateState {
    Phase phase = Phase::DELIBERATION;
    int turn_index = 0;        // next global turn index (0-based)
    int debate_turn_index = 0; // last issued Phase 3 speaker turn (1-based)
    std::vector<Turn> transcript;
    std::vector<TeamConfig> teams;
    std::string dilemma;
    std::vector<ScheduledPerturbation> perturbation_schedule;
    std::map<std::string, std::vector<MemoryEntry>> shared_memory_log;  // per team
};

/// Structured record of one pipeline stage, written to the audit JSONL.
struct AuditEvent {
    int turn_index = -1;
    std::string stage;  // retrieve | filter_and_merge | merge | select_hints |
                        // assemble_prompt | generate | inject_perturbation
    std::string agent;
    std::string detail_json;  // stage-specific payload, already serialized
};

/// Executes one debate run. Construction loads identities, weakness maps,
/// corpora and the backend; the three phase methods consume and return the
/// state value, enforcing phase preconditions. A run is strictly
/// sequential; run many engines concurrently, never one engine from two
/// threads.
class DebateEngine {
public:
    explicit DebateEngine(const RunConfig& config);
    /// Injects a backend directly (tests, embedding); everything else is
    /// loaded exactly as in the config-only form.
    DebateEngine(const RunConfig& config, std::unique_ptr<Backend> backend);

    DebateState make_initial_state() const;

    DebateState run_deliberation(DebateState state);
    DebateState run_interrogation(DebateState state);
    DebateState run_debate(DebateState state);

    /// All three phases in order. On a backend failure the partial
    /// transcript is preserved in `state` before the error propagates.
    DebateState run_all();

    const std::vector<AuditEvent>& audit_log() const { return audit_log_; }
    const RunConfig& config() const { return config_; }
    const IdentityGraph& identity(const std::string& agent_id) const;
    const std::map<std::string, IdentityGraph>& identities() const {
        return identities_;
    }
    /// Speaker rotation for Phase 3: teams interleaved in seed order.
    std::vector<std::string> speaker_cycle() const;
    /// Corpora the agent retrieves from under the current toggles.
    const std::set<std::string>& retrieval_scope(const std::string& agent_id) const;

    /// Transcript of the most recent run_all, also kept on failures.
    const DebateState& last_state() const { return last_state_; }

private:
    struct AgentRuntime {
        std::string team_id;
        WorkingMemory wm;
        WeaknessMap weakness_map;
        bool has_weakness_map = false;
        std::set<std::string> retrieval_scope;
    };

    Turn append_turn(DebateState& state, Phase phase, const std::string& speaker,
                     const std::optional<std::string>& team_id, std::string text,
                     std::optional<int> debate_turn);
    IdentityGraph effective_identity(const IdentityGraph& full) const;
    void broadcast(const Turn& turn, MemorySource source);
    std::vector<Turn> recent_turns(const DebateState& state,
                                   const std::vector<Turn>& pool) const;
    GenerationResult generate_logged(const GenerationRequest& request,
                                     const std::string& agent, int turn_index);
    void audit(int turn_index, const std::string& stage, const std::string& agent,
               std::string detail_json);
    const Turn* last_opposing_turn(const DebateState& state,
                                   const std::string& team_id) const;
    void speak_debate_turn(DebateState& state, const std::string& agent_id, int t);

    RunConfig config_;
    std::unique_ptr<Backend> backend_;
    std::map<std::string, IdentityGraph> identities_;
    std::map<std::string, AgentRuntime> runtimes_;
    IdentityGraph moderator_;
    RetrievalIndex index_;
    bool index_ready_ = false;
    std::vector<std::string> stopwords_;
    std::vector<AuditEvent> audit_log_;
    DebateState last_state_;
    std::uint64_t logical_clock_ms_ = 0;
};

/// Files produced by a persisted run.
struct RunOutput {
    DebateState state;
    std::string transcript_path;
    std::string audit_path;
};

/// Runs all phases and persists transcript (and audit log) under out_dir.
/// On failure the partial transcript is still written before rethrowing.
RunOutput run_full_pipeline(const RunConfig& config, const std::string& out_dir);

std::string audit_to_jsonl(const std::vector<AuditEvent>& events);

/// Built-in neutral moderator persona used when the config names none.
IdentityGraph default_moderator_identity();

/// Default stopword list used when the config names no stopword file.
std::vector<std::string> default_stopwords();

}  // namespace debate
