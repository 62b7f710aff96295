#include "debate/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

namespace {

std::uint64_t wall_clock_ms() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
}

}  // namespace

IdentityGraph default_moderator_identity() {
    IdentityGraph g;
    g.agent_id = kModeratorSpeaker;
    g.school = "NEUTRAL";
    g.persona_summary =
        "You are a neutral Socratic moderator. You hold no doctrine of your "
        "own; you probe for logical gaps, hidden premises and contradictions, "
        "and you never argue a side.";
    return g;
}

std::vector<std::string> default_stopwords() {
    return {"a",   "an",  "and", "are", "as",   "at",   "be",   "but", "by",
            "for", "if",  "in",  "into", "is",  "it",   "its",  "no",  "not",
            "of",  "on",  "or",  "such", "that", "the",  "their", "then",
            "there", "these", "they", "this", "to", "was", "were", "will",
            "with", "we", "you", "your", "i", "he", "she", "his", "her",
            "do", "does", "did", "have", "has", "had", "what", "when",
            "which", "who", "why", "how", "would", "should", "could", "them",
            "than", "so", "from", "about", "between", "someone", "any"};
}

DebateEngine::DebateEngine(const RunConfig& config)
    : DebateEngine(config, nullptr) {}

DebateEngine::DebateEngine(const RunConfig& config,
                           std::unique_ptr<Backend> backend)
    : config_(config) {
    validate_config(config_);
    backend_ = backend ? std::move(backend) : make_backend(config_.backend);

    moderator_ = config_.moderator_identity_path.empty()
                     ? default_moderator_identity()
                     : load_identity(config_.moderator_identity_path);

    stopwords_ = config_.stopwords_path.empty()
                     ? default_stopwords()
                     : read_phrase_file(config_.stopwords_path);

    std::vector<ManifestEntry> manifest;
    if (!config_.manifest_path.empty())
        manifest = load_manifest(config_.manifest_path);

    std::set<std::string> all_corpora;
    for (const ManifestEntry& e : manifest) all_corpora.insert(e.corpus_id);

    if (config_.retrieval_enabled && !manifest.empty()) {
        index_ = build_index(manifest);
        index_ready_ = true;
    }

    auto setup_agent = [&](const AgentSpec& spec, const std::string& team_id) {
        IdentityGraph identity;
        if (!spec.identity_path.empty()) {
            identity = load_identity(spec.identity_path);
            if (identity.agent_id != spec.agent_id)
                throw ConfigError("identity file " + spec.identity_path +
                                  " declares agent_id '" + identity.agent_id +
                                  "' but the config binds it to '" + spec.agent_id + "'");
        } else {
            identity.agent_id = spec.agent_id;
        }
        AgentRuntime rt;
        rt.team_id = team_id;
        rt.wm.capacity = config_.wm_capacity;
        if (!spec.weakness_map_path.empty()) {
            rt.weakness_map = load_weakness_map(spec.weakness_map_path);
            rt.has_weakness_map = true;
        }
        if (config_.id_rag_enabled) {
            rt.retrieval_scope.insert(spec.corpora.begin(), spec.corpora.end());
        } else {
            // Vanilla RAG: retrieval unified over every indexed corpus.
            rt.retrieval_scope = all_corpora;
        }
        identities_.emplace(spec.agent_id, std::move(identity));
        runtimes_.emplace(spec.agent_id, std::move(rt));
    };

    if (config_.solo) {
        setup_agent(*config_.solo, "");
        // A lone agent retrieves over everything it was given, or all corpora.
        if (config_.solo->corpora.empty())
            runtimes_[config_.solo->agent_id].retrieval_scope = all_corpora;
    }
    for (const TeamSpec& t : config_.teams) {
        for (const AgentSpec& a : t.agents) setup_agent(a, t.team_id);
        if (config_.share_team_corpora && config_.id_rag_enabled) {
            std::set<std::string> team_union;
            for (const AgentSpec& a : t.agents)
                team_union.insert(a.corpora.begin(), a.corpora.end());
            for (const AgentSpec& a : t.agents)
                runtimes_[a.agent_id].retrieval_scope = team_union;
        }
    }
}

DebateState DebateEngine::make_initial_state() const {
    DebateState state;
    state.dilemma = config_.dilemma;
    state.perturbation_schedule = config_.perturbations;

    std::vector<const TeamSpec*> ordered;
    if (config_.speaker_seed.empty()) {
        for (const TeamSpec& t : config_.teams) ordered.push_back(&t);
    } else {
        for (const std::string& id : config_.speaker_seed) {
            for (const TeamSpec& t : config_.teams) {
                if (t.team_id == id) ordered.push_back(&t);
            }
        }
    }
    for (const TeamSpec* t : ordered) {
        TeamConfig tc;
        tc.team_id = t->team_id;
        tc.stance_label = t->stance_label;
        for (const AgentSpec& a : t->agents) tc.agent_ids.push_back(a.agent_id);
        state.teams.push_back(std::move(tc));
        state.shared_memory_log[t->team_id] = {};
    }
    return state;
}

const std::set<std::string>& DebateEngine::retrieval_scope(
    const std::string& agent_id) const {
    const auto it = runtimes_.find(agent_id);
    if (it == runtimes_.end()) throw ConfigError("unknown agent: " + agent_id);
    return it->second.retrieval_scope;
}

const IdentityGraph& DebateEngine::identity(const std::string& agent_id) const {
    const auto it = identities_.find(agent_id);
    if (it == identities_.end())
        throw ConfigError("unknown agent: " + agent_id);
    return it->second;
}

std::vector<std::string> DebateEngine::speaker_cycle() const {
    const auto state = make_initial_state();
    std::vector<std::string> cycle;
    if (config_.solo) {
        cycle.push_back(config_.solo->agent_id);
        return cycle;
    }
    std::size_t max_size = 0;
    for (const TeamConfig& t : state.teams)
        max_size = std::max(max_size, t.agent_ids.size());
    for (std::size_t rank = 0; rank < max_size; ++rank) {
        for (const TeamConfig& t : state.teams) {
            if (rank < t.agent_ids.size()) cycle.push_back(t.agent_ids[rank]);
        }
    }
    return cycle;
}

Turn DebateEngine::append_turn(DebateState& state, Phase phase,
                               const std::string& speaker,
                               const std::optional<std::string>& team_id,
                               std::string text, std::optional<int> debate_turn) {
    Turn t;
    t.turn_index = state.turn_index;
    t.phase = phase;
    t.speaker = speaker;
    t.team_id = team_id;
    t.text = std::move(text);
    t.debate_turn_index = debate_turn;
    if (config_.use_deterministic_clock()) {
        logical_clock_ms_ += 1000;
        t.ts_ms = logical_clock_ms_;
    } else {
        t.ts_ms = wall_clock_ms();
    }
    state.transcript.push_back(t);
    state.turn_index += 1;
    return t;
}

void DebateEngine::broadcast(const Turn& turn, MemorySource source) {
    MemoryEntry entry;
    entry.source = source;
    entry.text = turn.text;
    entry.origin_ref = "turn:" + std::to_string(turn.turn_index);
    for (auto& [agent_id, rt] : runtimes_) {
        rt.wm.entries.push_back(entry);
        if (rt.wm.capacity > 0 && rt.wm.entries.size() > rt.wm.capacity)
            rt.wm.entries.erase(rt.wm.entries.begin());
    }
}

std::vector<Turn> DebateEngine::recent_turns(const DebateState&,
                                             const std::vector<Turn>& pool) const {
    const std::size_t window = static_cast<std::size_t>(config_.context_window);
    const std::size_t take = std::min(window, pool.size());
    return std::vector<Turn>(pool.end() - static_cast<std::ptrdiff_t>(take),
                             pool.end());
}

// With ID-RAG disabled the agent keeps its persona voice but loses the
// belief graph: no core commitments, no doctrinal boundaries, no filter.
IdentityGraph DebateEngine::effective_identity(const IdentityGraph& full) const {
    if (config_.id_rag_enabled) return full;
    IdentityGraph reduced;
    reduced.agent_id = full.agent_id;
    reduced.school = full.school;
    reduced.persona_summary = full.persona_summary;
    return reduced;
}

void DebateEngine::audit(int turn_index, const std::string& stage,
                         const std::string& agent, std::string detail_json) {
    audit_log_.push_back(AuditEvent{turn_index, stage, agent, std::move(detail_json)});
}

GenerationResult DebateEngine::generate_logged(const GenerationRequest& request,
                                               const std::string& agent,
                                               int turn_index) {
    GenerationResult result = backend_->generate(request);
    if (result.text.empty())
        throw BackendError("backend returned empty text for " + agent);
    if (config_.audit) {
        nlohmann::json ctx = nlohmann::json::array();
        for (const LabeledTurn& t : request.context_window)
            ctx.push_back({{"label", t.label}, {"text", t.text}});
        nlohmann::json detail = {
            {"request",
             {{"system_prompt", request.system_prompt},
              {"context_window", ctx},
              {"instruction", request.instruction},
              {"max_output_tokens", request.max_output_tokens},
              {"temperature", request.temperature}}},
            {"response",
             {{"text", result.text},
              {"backend_id", result.backend_id},
              {"latency_ms", result.latency_ms},
              {"truncated", result.truncated}}}};
        audit(turn_index, "generate", agent, detail.dump());
    }
    return result;
}

const Turn* DebateEngine::last_opposing_turn(const DebateState& state,
                                             const std::string& team_id) const {
    for (auto it = state.transcript.rbegin(); it != state.transcript.rend(); ++it) {
        if (it->is_moderator()) continue;
        if (!it->team_id) continue;
        if (*it->team_id != team_id) return &*it;
    }
    return nullptr;
}

DebateState DebateEngine::run_deliberation(DebateState state) {
    if (state.phase != Phase::DELIBERATION)
        throw ConfigError("run_deliberation: phase is " + phase_name(state.phase));

    try {
        for (const TeamConfig& team : state.teams) {
            std::vector<Turn> team_turns;
            for (int round = 0; round < config_.deliberation_rounds; ++round) {
                for (const std::string& agent_id : team.agent_ids) {
                    const IdentityGraph& ident = identity(agent_id);
                    const auto& rt = runtimes_.at(agent_id);
                    GenerationRequest req =
                        assemble_prompt(effective_identity(ident), rt.wm, {},
                                        state.dilemma, recent_turns(state, team_turns),
                                        static_cast<std::size_t>(config_.context_window));
                    req.max_output_tokens = config_.max_output_tokens;
                    req.temperature = config_.temperature;
                    req.instruction =
                        "Phase 1, deliberation round " + std::to_string(round + 1) +
                        " with your team (" + team.stance_label + "). " +
                        (round == 0 ? "State your initial position on the dilemma: "
                                    : "Synthesize the shared log into a common team "
                                      "position on: ") +
                        state.dilemma + " Speak as " + agent_id + ".";
                    const GenerationResult out =
                        generate_logged(req, agent_id, state.turn_index);
                    const Turn turn = append_turn(state, Phase::DELIBERATION, agent_id,
                                                  team.team_id, out.text, std::nullopt);
                    team_turns.push_back(turn);
                    MemoryEntry log_entry{MemorySource::TRANSCRIPT, turn.text,
                                          "turn:" + std::to_string(turn.turn_index)};
                    state.shared_memory_log[team.team_id].push_back(log_entry);
                    for (const std::string& mate : team.agent_ids) {
                        auto& mate_rt = runtimes_.at(mate);
                        mate_rt.wm.entries.push_back(log_entry);
                        if (mate_rt.wm.capacity > 0 &&
                            mate_rt.wm.entries.size() > mate_rt.wm.capacity)
                            mate_rt.wm.entries.erase(mate_rt.wm.entries.begin());
                    }
                }
            }
        }
    } catch (...) {
        last_state_ = state;
        throw;
    }
    state.phase = Phase::INTERROGATION;
    return state;
}

DebateState DebateEngine::run_interrogation(DebateState state) {
    if (state.phase != Phase::INTERROGATION)
        throw ConfigError("run_interrogation: phase is " + phase_name(state.phase));

    try {
        for (const TeamConfig& team : state.teams) {
            for (const std::string& agent_id : team.agent_ids) {
                // Moderator poses one elenctic question, addressed by name.
                std::string position;
                for (auto it = state.transcript.rbegin(); it != state.transcript.rend();
                     ++it) {
                    if (it->speaker == agent_id) {
                        position = it->text;
                        break;
                    }
                }
                WorkingMemory empty_wm;
                GenerationRequest mod_req = assemble_prompt(
                    moderator_, empty_wm, {}, state.dilemma,
                    recent_turns(state, state.transcript),
                    static_cast<std::size_t>(config_.context_window));
                mod_req.max_output_tokens = config_.max_output_tokens;
                mod_req.temperature = config_.temperature;
                mod_req.instruction =
                    "Phase 2, Socratic interrogation. Pose one elenctic, "
                    "ontology-level question to " + agent_id +
                    " that exposes a gap in their stated position: \"" + position + "\"";
                const GenerationResult mod_out =
                    generate_logged(mod_req, kModeratorSpeaker, state.turn_index);
                const Turn q = append_turn(state, Phase::INTERROGATION, kModeratorSpeaker,
                                           std::nullopt,
                                           "Question for " + agent_id + ": " + mod_out.text,
                                           std::nullopt);
                broadcast(q, MemorySource::MODERATOR);

                const IdentityGraph& ident = identity(agent_id);
                const auto& rt = runtimes_.at(agent_id);
                GenerationRequest ans_req = assemble_prompt(
                    effective_identity(ident), rt.wm, {}, state.dilemma,
                    recent_turns(state, state.transcript),
                    static_cast<std::size_t>(config_.context_window));
                ans_req.max_output_tokens = config_.max_output_tokens;
                ans_req.temperature = config_.temperature;
                ans_req.instruction = "Phase 2: answer the moderator's question "
                                      "directly and defend your position. Speak as " +
                                      agent_id + ".";
                const GenerationResult ans_out =
                    generate_logged(ans_req, agent_id, state.turn_index);
                const Turn a = append_turn(state, Phase::INTERROGATION, agent_id,
                                           team.team_id, ans_out.text, std::nullopt);
                broadcast(a, MemorySource::TRANSCRIPT);
            }
        }
    } catch (...) {
        last_state_ = state;
        throw;
    }
    state.phase = Phase::DEBATE;
    return state;
}

void DebateEngine::speak_debate_turn(DebateState& state, const std::string& agent_id,
                                     int t) {
    const IdentityGraph& ident = identity(agent_id);
    AgentRuntime& rt = runtimes_.at(agent_id);
    const Turn* opposing = config_.solo ? nullptr
                                        : last_opposing_turn(state, rt.team_id);

    // retrieve -> filter/merge -> hints -> assemble -> generate
    if (config_.retrieval_enabled && index_ready_ && !rt.retrieval_scope.empty()) {
        const std::string query = build_turn_query(
            state.dilemma, opposing ? opposing->text : std::string{}, stopwords_);
        const auto results = index_.retrieve(
            query, static_cast<std::size_t>(config_.retrieval_k), rt.retrieval_scope);
        std::vector<MemoryEntry> retrieved;
        nlohmann::json ids = nlohmann::json::array();
        for (const ScoredChunk& sc : results) {
            retrieved.push_back(MemoryEntry{MemorySource::RETRIEVED_FACT,
                                            sc.chunk->text, sc.chunk->chunk_id});
            ids.push_back(sc.chunk->chunk_id);
        }
        audit(state.turn_index, "retrieve", agent_id,
              nlohmann::json{{"query", query}, {"k", config_.retrieval_k},
                             {"chunk_ids", ids}}
                  .dump());

        if (config_.id_rag_enabled) {
            const std::size_t before = rt.wm.entries.size();
            WorkingMemory merged =
                filter_and_merge(rt.wm, retrieved, ident.constraints);
            nlohmann::json kept = nlohmann::json::array();
            nlohmann::json deleted = nlohmann::json::array();
            for (const MemoryEntry& f : retrieved) {
                const bool survived = std::any_of(
                    merged.entries.begin() + static_cast<std::ptrdiff_t>(std::min(
                                                 before, merged.entries.size())),
                    merged.entries.end(), [&f](const MemoryEntry& e) {
                        return e.source == MemorySource::RETRIEVED_FACT &&
                               e.origin_ref == f.origin_ref;
                    });
                (survived ? kept : deleted).push_back(f.origin_ref.value_or(""));
            }
            rt.wm = std::move(merged);
            audit(state.turn_index, "filter_and_merge", agent_id,
                  nlohmann::json{{"kept", kept},
                                 {"deleted", deleted},
                                 {"constraints", ident.constraints.size()}}
                      .dump());
        } else {
            rt.wm = filter_and_merge(rt.wm, retrieved, {});
            audit(state.turn_index, "merge", agent_id,
                  nlohmann::json{{"appended", retrieved.size()}}.dump());
        }
    }

    std::vector<WeaknessEntry> hints;
    if (config_.tom_enabled && rt.has_weakness_map && opposing) {
        const std::string opponent_school = identity(opposing->speaker).school;
        hints = select_hints(rt.weakness_map, opposing->text, opponent_school,
                             config_.max_hints);
        nlohmann::json selected = nlohmann::json::array();
        for (const WeaknessEntry& h : hints) selected.push_back(h.weakness_text);
        audit(state.turn_index, "select_hints", agent_id,
              nlohmann::json{{"opponent", opposing->speaker},
                             {"opponent_school", opponent_school},
                             {"selected", selected}}
                  .dump());
        for (const WeaknessEntry& h : hints) {
            rt.wm.entries.push_back(
                MemoryEntry{MemorySource::TOM_HINT, h.counter_hint, std::nullopt});
            if (rt.wm.capacity > 0 && rt.wm.entries.size() > rt.wm.capacity)
                rt.wm.entries.erase(rt.wm.entries.begin());
        }
    }

    GenerationRequest req = assemble_prompt(
        effective_identity(ident), rt.wm, hints, state.dilemma,
        recent_turns(state, state.transcript),
        static_cast<std::size_t>(config_.context_window));
    req.max_output_tokens = config_.max_output_tokens;
    req.temperature = config_.temperature;
    req.instruction = "Phase 3, inter-team debate, speaker turn " +
                      std::to_string(t) + ". The dilemma under debate: " +
                      state.dilemma + " Speak as " + agent_id +
                      " and advance your team's position.";
    if (config_.audit) {
        audit(state.turn_index, "assemble_prompt", agent_id,
              nlohmann::json{{"hints", hints.size()},
                             {"context_turns", req.context_window.size()}}
                  .dump());
    }
    const GenerationResult out = generate_logged(req, agent_id, state.turn_index);
    const Turn turn = append_turn(state, Phase::DEBATE, agent_id,
                                  rt.team_id.empty()
                                      ? std::optional<std::string>{}
                                      : std::optional<std::string>{rt.team_id},
                                  out.text, t);
    state.debate_turn_index = t;
    broadcast(turn, MemorySource::TRANSCRIPT);
}

DebateState DebateEngine::run_debate(DebateState state) {
    if (state.phase != Phase::DEBATE)
        throw ConfigError("run_debate: phase is " + phase_name(state.phase));

    const std::vector<std::string> cycle = speaker_cycle();
    if (cycle.empty()) throw ConfigError("run_debate: no speakers configured");

    try {
        for (int t = 1; t <= config_.debate_length; ++t) {
            const std::string& agent_id =
                cycle[static_cast<std::size_t>((t - 1) % static_cast<int>(cycle.size()))];
            speak_debate_turn(state, agent_id, t);

            // A perturbation scheduled at debate turn t lands immediately after
            // speaker turn t; the observation window starts at turn t+1.
            for (const ScheduledPerturbation& sp : state.perturbation_schedule) {
                if (sp.debate_turn != t) continue;
                const Turn mod = append_turn(state, Phase::DEBATE, kModeratorSpeaker,
                                             std::nullopt, sp.spec.text, std::nullopt);
                broadcast(mod, MemorySource::MODERATOR);
                audit(mod.turn_index, "inject_perturbation", kModeratorSpeaker,
                      nlohmann::json{{"id", PerturbationSpec::id_name(sp.spec.id)},
                                     {"debate_turn", sp.debate_turn}}
                          .dump());
            }
        }
    } catch (...) {
        last_state_ = state;
        throw;
    }
    state.phase = Phase::DONE;
    return state;
}

DebateState DebateEngine::run_all() {
    DebateState state = make_initial_state();
    // Phase methods record the partial state themselves before rethrowing,
    // so a mid-phase failure still leaves the turns generated so far here.
    if (!config_.solo) {
        state = run_deliberation(state);
        state = run_interrogation(state);
    } else {
        // Degenerate single-agent pipeline: straight to the monologue.
        state.phase = Phase::DEBATE;
    }
    state = run_debate(state);
    last_state_ = state;
    return state;
}

std::string audit_to_jsonl(const std::vector<AuditEvent>& events) {
    std::string out;
    for (const AuditEvent& e : events) {
        nlohmann::json j;
        j["turn_index"] = e.turn_index;
        j["stage"] = e.stage;
        j["agent"] = e.agent;
        j["detail"] = nlohmann::json::parse(e.detail_json, nullptr, false);
        out += j.dump();
        out += '\n';
    }
    return out;
}

RunOutput run_full_pipeline(const RunConfig& config, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunOutput output;
    output.transcript_path =
        (std::filesystem::path(out_dir) / "transcript.jsonl").string();
    output.audit_path = (std::filesystem::path(out_dir) / "audit.jsonl").string();

    DebateEngine engine(config);
    try {
            output.state = engine.run_all();
    } catch (...) {
        save_transcript(engine.last_state().transcript, output.transcript_path);
        if (config.audit)
            write_file(output.audit_path, audit_to_jsonl(engine.audit_log()));
        throw;
    }
    save_transcript(output.state.transcript, output.transcript_path);
    if (config.audit)
        write_file(output.audit_path, audit_to_jsonl(engine.audit_log()));
    return output;
}

}  // namespace debate
