#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debate/backend.hpp"

namespace debate {

/// Adversarial dilemma variants injected mid-debate. The three named
/// perturbations carry their canonical texts; CUSTOM carries its own.
struct PerturbationSpec {
    enum class Id { P1_PUSH_VS_LEVER, P2_TYRANT_ARGUMENT, P3_SCIENTIST_VS_KILLERS, CUSTOM };
    Id id = Id::CUSTOM;
    std::string text;

    static PerturbationSpec named(Id id);
    static PerturbationSpec custom(std::string text);
    static Id id_from_name(const std::string& name);
    static std::string id_name(Id id);
};

/// A perturbation scheduled at a Phase 3 speaker turn: the moderator turn
/// is injected immediately after speaker turn `debate_turn`, so the
/// observation window is every speaker turn that follows it.
struct ScheduledPerturbation {
    int debate_turn = 4;
    PerturbationSpec spec;
};

struct AgentSpec {
    std::string agent_id;
    std::string identity_path;      // empty = bare agent (no persona)
    std::vector<std::string> corpora;  // retrieval scope when ID-RAG is on
    std::string weakness_map_path;  // empty = no opponent model
};

struct TeamSpec {
    std::string team_id;
    std::string stance_label;
    std::vector<AgentSpec> agents;
};

/// Full description of one debate run. Loaded from JSON; relative paths
/// resolve against the config file's directory.
struct RunConfig {
    std::string dilemma;
    std::vector<TeamSpec> teams;
    std::optional<AgentSpec> solo;  // degenerate single-agent pipeline

    BackendConfig backend;
    std::string manifest_path;
    std::string keywords_dir;
    std::string stopwords_path;
    std::string moderator_identity_path;

    int debate_length = 10;
    int deliberation_rounds = 2;  // one statement + one synthesis
    int context_window = 6;
    int retrieval_k = 4;
    std::size_t wm_capacity = 40;
    std::size_t max_hints = 2;
    double temperature = 0.2;
    int max_output_tokens = 512;

    std::vector<ScheduledPerturbation> perturbations;
    bool id_rag_enabled = true;
    bool tom_enabled = true;
    bool retrieval_enabled = true;
    bool share_team_corpora = false;
    std::vector<std::string> speaker_seed;  // team order; default config order
    bool audit = true;
    // Logical timestamps for reproducible transcripts. Defaults to true for
    // scripted backends, false for remote.
    std::optional<bool> deterministic_clock;

    bool is_solo() const { return solo.has_value(); }
    bool use_deterministic_clock() const {
        return deterministic_clock.value_or(backend.kind == "scripted");
    }
    std::vector<const AgentSpec*> all_agents() const;
    const AgentSpec* find_agent(const std::string& agent_id) const;
};

RunConfig load_run_config(const std::string& path);
void validate_config(const RunConfig& config);

/// Canonical roster presets resolved from shipped fixture configs.
enum class Preset { B_CHAT, B_SINGLE_RAG, HOMO, HETERO_RESILIENCE, HETERO_PEDAGOGY };
std::string preset_config_filename(Preset p);

}  // namespace debate
