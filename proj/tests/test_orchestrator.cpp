#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/metrics.hpp"
#include "debate/orchestrator.hpp"
#include "debate/text_util.hpp"

using namespace debate;

namespace {

const std::string kData = DEBATE_DATA_DIR;

/// Procedural backend: deterministic, inexhaustible; echoes a counter.
class CountingBackend : public Backend {
public:
    GenerationResult generate(const GenerationRequest&) override {
        GenerationResult r;
        r.text = "statement " + std::to_string(++n_);
        r.backend_id = id();
        return r;
    }
    std::string id() const override { return "counting"; }

private:
    int n_ = 0;
};

/// Backend that fails after a fixed number of calls.
class FailingBackend : public Backend {
public:
    explicit FailingBackend(int succeed_calls) : remaining_(succeed_calls) {}
    GenerationResult generate(const GenerationRequest&) override {
        if (remaining_-- <= 0) throw BackendError("synthetic outage");
        GenerationResult r;
        r.text = "ok";
        r.backend_id = id();
        return r;
    }
    std::string id() const override { return "failing"; }

private:
    int remaining_;
};

AgentSpec bare_agent(const std::string& id) {
    AgentSpec a;
    a.agent_id = id;
    return a;
}

/// Two-team bare-agent config with no retrieval; structure-only runs.
RunConfig bare_config(int debate_length, int rounds = 2,
                      std::vector<int> perturbation_turns = {4}) {
    RunConfig c;
    c.dilemma = "Should you pull the lever?";
    TeamSpec t1{"alpha", "first", {bare_agent("a1"), bare_agent("a2")}};
    TeamSpec t2{"beta", "second", {bare_agent("b1"), bare_agent("b2")}};
    c.teams = {t1, t2};
    c.retrieval_enabled = false;
    c.debate_length = debate_length;
    c.deliberation_rounds = rounds;
    c.backend.kind = "scripted";  // replaced by injection
    c.deterministic_clock = true;
    for (int t : perturbation_turns) {
        ScheduledPerturbation sp;
        sp.debate_turn = t;
        sp.spec = PerturbationSpec::named(PerturbationSpec::Id::P1_PUSH_VS_LEVER);
        c.perturbations.push_back(sp);
    }
    return c;
}

struct Phase3Shape {
    std::vector<const Turn*> speakers;        // phase 3 speaker turns in order
    std::vector<int> moderator_positions;     // index into phase-3 sequence
};

Phase3Shape phase3_shape(const DebateState& state) {
    Phase3Shape shape;
    int pos = 0;
    for (const Turn& t : state.transcript) {
        if (t.phase != Phase::DEBATE) continue;
        if (t.is_moderator()) {
            shape.moderator_positions.push_back(pos);
        } else {
            shape.speakers.push_back(&t);
            ++pos;
        }
    }
    return shape;
}

}  // namespace

TEST_CASE("full pipeline: canonical turn counts and phase order") {
    const auto config = bare_config(10);
    DebateEngine engine(config, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();

    CHECK(state.phase == Phase::DONE);
    int delib = 0, inter = 0, debate_speakers = 0, moderators_p3 = 0;
    for (const Turn& t : state.transcript) {
        if (t.phase == Phase::DELIBERATION) ++delib;
        if (t.phase == Phase::INTERROGATION) ++inter;
        if (t.phase == Phase::DEBATE) {
            if (t.is_moderator()) ++moderators_p3;
            else ++debate_speakers;
        }
    }
    CHECK(delib == 8);    // 2 teams x 2 agents x 2 rounds
    CHECK(inter == 8);    // question + answer per agent
    CHECK(debate_speakers == 10);
    CHECK(moderators_p3 == 1);

    // phases never regress
    int max_phase = 0;
    for (const Turn& t : state.transcript) {
        const int p = static_cast<int>(t.phase);
        CHECK(p >= max_phase);
        max_phase = std::max(max_phase, p);
    }

    // turn indices are dense and 0-based
    for (std::size_t i = 0; i < state.transcript.size(); ++i)
        CHECK(state.transcript[i].turn_index == static_cast<int>(i));
}

TEST_CASE("perturbation lands after speaker turn 4 with a 6-turn window") {
    const auto config = bare_config(10);
    DebateEngine engine(config, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    const auto shape = phase3_shape(state);

    REQUIRE(shape.moderator_positions.size() == 1);
    CHECK(shape.moderator_positions[0] == 4);  // after the 4th speaker turn
    CHECK(shape.speakers.size() == 10);
    // observation window: exactly 6 speaker turns follow the injection
    CHECK(shape.speakers.size() - 4 == 6);
    // the injected text is the canonical P1 wording
    bool found = false;
    for (const Turn& t : state.transcript) {
        if (t.phase == Phase::DEBATE && t.is_moderator()) {
            CHECK(t.text.find("pulling a lever") != std::string::npos);
            CHECK_FALSE(t.team_id.has_value());
            CHECK_FALSE(t.debate_turn_index.has_value());
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("moderator questions address agents by name") {
    const auto config = bare_config(6);
    DebateEngine engine(config, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    std::set<std::string> addressed;
    for (const Turn& t : state.transcript) {
        if (t.phase == Phase::INTERROGATION && t.is_moderator()) {
            const auto pos = t.text.find("Question for ");
            REQUIRE(pos == 0);
            addressed.insert(t.text.substr(13, t.text.find(':') - 13));
        }
    }
    CHECK(addressed == std::set<std::string>{"a1", "a2", "b1", "b2"});
}

TEST_CASE("deliberation fills the team shared memory log") {
    const auto config = bare_config(4);
    DebateEngine engine(config, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    REQUIRE(state.shared_memory_log.count("alpha") == 1);
    CHECK(state.shared_memory_log.at("alpha").size() == 4);  // 2 agents x 2 rounds
    CHECK(state.shared_memory_log.at("beta").size() == 4);
    for (const auto& e : state.shared_memory_log.at("alpha"))
        CHECK(e.source == MemorySource::TRANSCRIPT);
}

TEST_CASE("single team: deliberation and interrogation still run") {
    RunConfig c = bare_config(4);
    c.teams.pop_back();
    c.perturbations.clear();
    DebateEngine engine(c, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    int delib = 0, inter = 0;
    for (const Turn& t : state.transcript) {
        if (t.phase == Phase::DELIBERATION) ++delib;
        if (t.phase == Phase::INTERROGATION) ++inter;
    }
    CHECK(delib == 4);
    CHECK(inter == 4);
}

TEST_CASE("solo config: degenerate monologue pipeline") {
    RunConfig c;
    c.dilemma = "lever?";
    c.solo = bare_agent("tutor");
    c.retrieval_enabled = false;
    c.debate_length = 10;
    c.perturbations.clear();
    c.deterministic_clock = true;
    c.backend.kind = "scripted";
    DebateEngine engine(c, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    CHECK(state.transcript.size() == 10);
    for (const Turn& t : state.transcript) {
        CHECK(t.phase == Phase::DEBATE);
        CHECK(t.speaker == "tutor");
        CHECK_FALSE(t.team_id.has_value());
    }
}

TEST_CASE("config validation rejects duplicate agents across teams") {
    RunConfig c = bare_config(10);
    c.teams[1].agents[0].agent_id = "a1";
    CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("config validation rejects zero-agent teams and bad schedules") {
    RunConfig c = bare_config(10);
    c.teams[0].agents.clear();
    CHECK_THROWS_AS(validate_config(c), ConfigError);

    RunConfig sched = bare_config(10);
    sched.perturbations[0].debate_turn = 11;
    CHECK_THROWS_AS(validate_config(sched), ConfigError);
}

TEST_CASE("backend failure aborts with the partial transcript preserved") {
    const auto config = bare_config(10);
    DebateEngine engine(config, std::make_unique<FailingBackend>(10));
    CHECK_THROWS_AS(engine.run_all(), BackendError);
    // 8 deliberation + 2 interrogation turns landed before the outage
    CHECK(engine.last_state().transcript.size() == 10);
}

TEST_CASE("speaker seed order reverses the rotation") {
    RunConfig c = bare_config(4);
    c.speaker_seed = {"beta", "alpha"};
    DebateEngine engine(c, std::make_unique<CountingBackend>());
    const auto state = engine.run_all();
    const auto shape = phase3_shape(state);
    REQUIRE(shape.speakers.size() == 4);
    CHECK(shape.speakers[0]->speaker == "b1");
    CHECK(shape.speakers[1]->speaker == "a1");
    CHECK(shape.speakers[2]->speaker == "b2");
    CHECK(shape.speakers[3]->speaker == "a2");
}

TEST_CASE("property: orchestration invariants over random configs") {
    std::mt19937 rng(987654321);
    std::uniform_int_distribution<int> len_dist(2, 16);
    std::uniform_int_distribution<int> rounds_dist(1, 3);
    std::uniform_int_distribution<int> window_dist(1, 8);
    std::uniform_int_distribution<int> pert_count(0, 2);

    for (int iter = 0; iter < 220; ++iter) {
        const int length = len_dist(rng);
        std::vector<int> perts;
        const int n_perts = pert_count(rng);
        std::uniform_int_distribution<int> pert_turn(1, length);
        for (int i = 0; i < n_perts; ++i) perts.push_back(pert_turn(rng));
        std::sort(perts.begin(), perts.end());
        perts.erase(std::unique(perts.begin(), perts.end()), perts.end());

        RunConfig c = bare_config(length, rounds_dist(rng), perts);
        c.context_window = window_dist(rng);

        DebateEngine engine(c, std::make_unique<CountingBackend>());
        const auto state = engine.run_all();
        const auto shape = phase3_shape(state);

        // turn-count law: injections never consume speaker slots
        REQUIRE(shape.speakers.size() == static_cast<std::size_t>(length));
        REQUIRE(shape.moderator_positions.size() == perts.size());

        // debate_turn_index is 1..length in order
        for (std::size_t i = 0; i < shape.speakers.size(); ++i) {
            REQUIRE(shape.speakers[i]->debate_turn_index.has_value());
            CHECK(*shape.speakers[i]->debate_turn_index == static_cast<int>(i) + 1);
        }

        // alternation law (two-team config)
        for (std::size_t i = 1; i < shape.speakers.size(); ++i) {
            REQUIRE(shape.speakers[i]->team_id.has_value());
            CHECK(*shape.speakers[i]->team_id != *shape.speakers[i - 1]->team_id);
        }
        // within a team, agents alternate
        for (std::size_t i = 2; i < shape.speakers.size(); ++i) {
            if (*shape.speakers[i]->team_id == *shape.speakers[i - 2]->team_id)
                CHECK(shape.speakers[i]->speaker != shape.speakers[i - 2]->speaker);
        }

        // perturbation placement: moderator turn sits immediately after
        // speaker turn t, so the remaining window is length - t
        for (std::size_t i = 0; i < perts.size(); ++i) {
            CHECK(shape.moderator_positions[i] == perts[i]);
            const int window = length - perts[i];
            CHECK(static_cast<int>(shape.speakers.size()) - perts[i] == window);
        }

        // phase monotonicity
        int max_phase = 0;
        for (const Turn& t : state.transcript) {
            const int p = static_cast<int>(t.phase);
            REQUIRE(p >= max_phase);
            max_phase = p;
        }
        CHECK(state.phase == Phase::DONE);
    }
}

TEST_CASE("phase preconditions are enforced") {
    const auto config = bare_config(4);
    DebateEngine engine(config, std::make_unique<CountingBackend>());
    auto state = engine.make_initial_state();
    CHECK_THROWS_AS(engine.run_debate(state), ConfigError);
    CHECK_THROWS_AS(engine.run_interrogation(state), ConfigError);
}

TEST_CASE("scripted replay is deterministic, including timestamps") {
    const std::string script_path = "/tmp/debate_replay_script.json";
    std::string script = "[";
    for (int i = 0; i < 26; ++i) {
        if (i) script += ",";
        script += "\"line " + std::to_string(i) + "\"";
    }
    script += "]";
    write_file(script_path, script);

    RunConfig c = bare_config(10);
    c.backend.kind = "scripted";
    c.backend.script_path = script_path;

    DebateEngine one(c);
    DebateEngine two(c);
    const auto s1 = one.run_all();
    const auto s2 = two.run_all();
    CHECK(transcript_to_jsonl(s1.transcript) == transcript_to_jsonl(s2.transcript));
    const auto h1 = fnv1a64_hex(transcript_to_jsonl(s1.transcript));
    const auto h2 = fnv1a64_hex(transcript_to_jsonl(s2.transcript));
    CHECK(h1 == h2);
}

TEST_CASE("golden run: hetero P1 fixture pipeline with full retrieval stack") {
    const auto config =
        load_run_config(kData + "/configs/hetero_p1.json");
    DebateEngine engine(config);
    const auto state = engine.run_all();
    CHECK(state.phase == Phase::DONE);
    const auto shape = phase3_shape(state);
    CHECK(shape.speakers.size() == 10);
    REQUIRE(shape.moderator_positions.size() == 1);
    CHECK(shape.moderator_positions[0] == 4);

    // pipeline stages appear in the audit log for debate turns
    bool saw_retrieve = false, saw_filter = false, saw_hints = false;
    for (const AuditEvent& e : engine.audit_log()) {
        if (e.stage == "retrieve") saw_retrieve = true;
        if (e.stage == "filter_and_merge") saw_filter = true;
        if (e.stage == "select_hints") saw_hints = true;
    }
    CHECK(saw_retrieve);
    CHECK(saw_filter);
    CHECK(saw_hints);
}

TEST_CASE("module toggles change pipeline composition, not just wording") {
    auto config = load_run_config(kData + "/configs/ablation_base.json");
    config.backend.script_path = kData + "/scripts/ablation_vanilla.json";
    config.id_rag_enabled = false;
    config.tom_enabled = false;
    DebateEngine engine(config);
    engine.run_all();
    std::set<std::string> stages;
    std::set<std::string> scopes;
    for (const AuditEvent& e : engine.audit_log()) {
        stages.insert(e.stage);
        if (e.stage == "retrieve") scopes.insert(e.agent);
    }
    CHECK(stages.count("filter_and_merge") == 0);
    CHECK(stages.count("select_hints") == 0);
    CHECK(stages.count("merge") == 1);  // unfiltered merge replaces the filter
    CHECK(stages.count("retrieve") == 1);
}

TEST_CASE("run_full_pipeline persists transcript and audit files") {
    namespace fs = std::filesystem;
    const std::string out = "/tmp/debate_run_out";
    fs::remove_all(out);
    const auto config = load_run_config(kData + "/configs/hetero_p1.json");
    const auto output = run_full_pipeline(config, out);
    CHECK(fs::exists(output.transcript_path));
    CHECK(fs::exists(output.audit_path));
    const auto loaded = load_transcript(output.transcript_path);
    CHECK(loaded.size() == output.state.transcript.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].speaker == output.state.transcript[i].speaker);
        CHECK(loaded[i].text == output.state.transcript[i].text);
    }
}

TEST_CASE("record-then-replay: audit-recorded generations reproduce the run") {
    // Record: a procedural backend drives a full run; the audit log keeps
    // every generation verbatim.
    RunConfig c = bare_config(10);
    c.audit = true;
    DebateEngine recorder(c, std::make_unique<CountingBackend>());
    const auto recorded = recorder.run_all();

    // Rebuild a script from the recorded responses, in call order.
    std::vector<ScriptedBackend::Entry> entries;
    for (const AuditEvent& e : recorder.audit_log()) {
        if (e.stage != "generate") continue;
        const auto detail = nlohmann::json::parse(e.detail_json);
        entries.push_back(
            {"", detail.at("response").at("text").get<std::string>()});
    }
    REQUIRE(entries.size() == 26);  // 8 deliberation + 8 interrogation + 10

    // Replay: byte-identical transcript, including timestamps.
    DebateEngine replayer(c, std::make_unique<ScriptedBackend>(entries));
    const auto replayed = replayer.run_all();
    CHECK(transcript_to_jsonl(replayed.transcript) ==
          transcript_to_jsonl(recorded.transcript));
}

TEST_CASE("retrieval scope: per-agent, team-shared, or unified by toggles") {
    auto config = load_run_config(kData + "/configs/hetero_p1.json");

    DebateEngine isolated(config);
    CHECK(isolated.retrieval_scope("aristotle") ==
          std::set<std::string>{"aristotle_ethics"});
    CHECK(isolated.retrieval_scope("aquinas") ==
          std::set<std::string>{"aquinas_summa"});

    config.share_team_corpora = true;
    DebateEngine shared(config);
    CHECK(shared.retrieval_scope("aristotle") ==
          (std::set<std::string>{"aristotle_ethics", "aquinas_summa"}));
    CHECK(shared.retrieval_scope("mill") ==
          (std::set<std::string>{"mill_utilitarianism", "bentham_principles"}));

    config.share_team_corpora = false;
    config.id_rag_enabled = false;
    DebateEngine unified(config);
    CHECK(unified.retrieval_scope("aristotle").size() == 7);  // all corpora
}
