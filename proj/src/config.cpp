#include "debate/config.hpp"

#include <filesystem>
#include <unordered_set>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

PerturbationSpec PerturbationSpec::named(Id id) {
    PerturbationSpec spec;
    spec.id = id;
    switch (id) {
        case Id::P1_PUSH_VS_LEVER:
            spec.text =
                "Is there a moral difference between pulling a lever and "
                "physically pushing someone?";
            break;
        case Id::P2_TYRANT_ARGUMENT:
            spec.text =
                "Historical tyrants claimed to act for the greater good. Does "
                "utilitarian logic risk justifying atrocities?";
            break;
        case Id::P3_SCIENTIST_VS_KILLERS:
            spec.text =
                "Suppose the five are convicted murderers, the one a "
                "cancer-curing scientist. Does this change the calculation?";
            break;
        case Id::CUSTOM:
            throw ConfigError("CUSTOM perturbation requires its own text");
    }
    return spec;
}

PerturbationSpec PerturbationSpec::custom(std::string text) {
    if (collapse_ws(text).empty())
        throw ConfigError("custom perturbation text must be non-empty");
    PerturbationSpec spec;
    spec.id = Id::CUSTOM;
    spec.text = std::move(text);
    return spec;
}

PerturbationSpec::Id PerturbationSpec::id_from_name(const std::string& name) {
    if (name == "P1" || name == "P1_PUSH_VS_LEVER") return Id::P1_PUSH_VS_LEVER;
    if (name == "P2" || name == "P2_TYRANT_ARGUMENT") return Id::P2_TYRANT_ARGUMENT;
    if (name == "P3" || name == "P3_SCIENTIST_VS_KILLERS")
        return Id::P3_SCIENTIST_VS_KILLERS;
    if (name == "CUSTOM") return Id::CUSTOM;
    throw ConfigError("unknown perturbation id: " + name);
}

std::string PerturbationSpec::id_name(Id id) {
    switch (id) {
        case Id::P1_PUSH_VS_LEVER: return "P1_PUSH_VS_LEVER";
        case Id::P2_TYRANT_ARGUMENT: return "P2_TYRANT_ARGUMENT";
        case Id::P3_SCIENTIST_VS_KILLERS: return "P3_SCIENTIST_VS_KILLERS";
        case Id::CUSTOM: return "CUSTOM";
    }
    return "?";
}

std::vector<const AgentSpec*> RunConfig::all_agents() const {
    std::vector<const AgentSpec*> out;
    if (solo) out.push_back(&*solo);
    for (const TeamSpec& t : teams) {
        for (const AgentSpec& a : t.agents) out.push_back(&a);
    }
    return out;
}

const AgentSpec* RunConfig::find_agent(const std::string& agent_id) const {
    for (const AgentSpec* a : all_agents()) {
        if (a->agent_id == agent_id) return a;
    }
    return nullptr;
}

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
}

AgentSpec agent_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
    AgentSpec a;
    a.agent_id = j.at("agent_id").get<std::string>();
    a.identity_path = resolve(base, j.value("identity", std::string{}));
    for (const auto& c : j.value("corpora", nlohmann::json::array()))
        a.corpora.push_back(c.get<std::string>());
    a.weakness_map_path = resolve(base, j.value("weakness_map", std::string{}));
    return a;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError(path + ": no such config file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    RunConfig c;
    try {
        c.dilemma = j.at("dilemma").get<std::string>();
        for (const auto& jt : j.value("teams", nlohmann::json::array())) {
            TeamSpec t;
            t.team_id = jt.at("team_id").get<std::string>();
            t.stance_label = jt.value("stance_label", std::string{});
            for (const auto& ja : jt.at("agents"))
                t.agents.push_back(agent_from_json(ja, base));
            c.teams.push_back(std::move(t));
        }
        if (j.contains("solo")) c.solo = agent_from_json(j["solo"], base);

        if (j.contains("backend")) {
            const auto& jb = j["backend"];
            c.backend.kind = jb.value("kind", "scripted");
            c.backend.script_path = resolve(base, jb.value("script_path", std::string{}));
            c.backend.endpoint = jb.value("endpoint", std::string{});
            c.backend.model = jb.value("model", std::string{});
            c.backend.timeout_s = jb.value("timeout_s", 60.0);
            c.backend.rpm_cap = jb.value("rpm_cap", 0);
            c.backend.api_key_env = jb.value("api_key_env", std::string{});
            c.backend.auth_header = jb.value("auth_header", "Authorization");
            c.backend.auth_prefix = jb.value("auth_prefix", "Bearer ");
            c.backend.max_attempts = jb.value("max_attempts", 3);
            c.backend.backoff_base_s = jb.value("backoff_base_s", 1.0);
        }

        c.manifest_path = resolve(base, j.value("manifest", std::string{}));
        c.keywords_dir = resolve(base, j.value("keywords_dir", std::string{}));
        c.stopwords_path = resolve(base, j.value("stopwords", std::string{}));
        c.moderator_identity_path =
            resolve(base, j.value("moderator_identity", std::string{}));

        c.debate_length = j.value("debate_length", 10);
        c.deliberation_rounds = j.value("deliberation_rounds", 2);
        c.context_window = j.value("context_window", 6);
        c.retrieval_k = j.value("retrieval_k", 4);
        c.wm_capacity = j.value("wm_capacity", std::size_t{40});
        c.max_hints = j.value("max_hints", std::size_t{2});
        c.temperature = j.value("temperature", 0.2);
        c.max_output_tokens = j.value("max_output_tokens", 512);

        for (const auto& jp : j.value("perturbations", nlohmann::json::array())) {
            ScheduledPerturbation sp;
            sp.debate_turn = jp.at("turn").get<int>();
            const auto id = PerturbationSpec::id_from_name(jp.at("id").get<std::string>());
            sp.spec = id == PerturbationSpec::Id::CUSTOM
                          ? PerturbationSpec::custom(jp.at("text").get<std::string>())
                          : PerturbationSpec::named(id);
            c.perturbations.push_back(std::move(sp));
        }

        c.id_rag_enabled = j.value("id_rag_enabled", true);
        c.tom_enabled = j.value("tom_enabled", true);
        c.retrieval_enabled = j.value("retrieval_enabled", true);
        c.share_team_corpora = j.value("share_team_corpora", false);
        for (const auto& s : j.value("speaker_seed", nlohmann::json::array()))
            c.speaker_seed.push_back(s.get<std::string>());
        c.audit = j.value("audit", true);
        if (j.contains("deterministic_clock"))
            c.deterministic_clock = j["deterministic_clock"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": config schema violation: " + e.what());
    }

    validate_config(c);
    return c;
}

void validate_config(const RunConfig& config) {
    if (collapse_ws(config.dilemma).empty())
        throw ConfigError("config: dilemma must be non-empty");
    if (config.teams.empty() && !config.solo)
        throw ConfigError("config: needs either teams or a solo agent");
    if (!config.teams.empty() && config.solo)
        throw ConfigError("config: teams and solo are mutually exclusive");

    std::unordered_set<std::string> team_ids;
    std::unordered_set<std::string> agent_ids;
    for (const TeamSpec& t : config.teams) {
        if (t.team_id.empty()) throw ConfigError("config: team_id must be non-empty");
        if (!team_ids.insert(t.team_id).second)
            throw ConfigError("config: duplicate team_id '" + t.team_id + "'");
        if (t.agents.empty())
            throw ConfigError("config: team '" + t.team_id + "' has no agents");
        for (const AgentSpec& a : t.agents) {
            if (a.agent_id.empty())
                throw ConfigError("config: agent_id must be non-empty");
            if (!agent_ids.insert(a.agent_id).second)
                throw ConfigError("config: agent '" + a.agent_id +
                                  "' appears in more than one roster slot");
        }
    }
    if (config.debate_length < 1)
        throw ConfigError("config: debate_length must be >= 1");
    if (config.deliberation_rounds < 1)
        throw ConfigError("config: deliberation_rounds must be >= 1");
    if (config.context_window < 1)
        throw ConfigError("config: context_window must be >= 1");
    if (config.retrieval_k < 1)
        throw ConfigError("config: retrieval_k must be >= 1");
    for (const ScheduledPerturbation& p : config.perturbations) {
        if (p.debate_turn < 1 || p.debate_turn > config.debate_length)
            throw ConfigError("config: perturbation turn " +
                              std::to_string(p.debate_turn) +
                              " outside debate of length " +
                              std::to_string(config.debate_length));
    }
    if (!config.speaker_seed.empty()) {
        if (config.speaker_seed.size() != config.teams.size())
            throw ConfigError("config: speaker_seed must list every team exactly once");
        std::unordered_set<std::string> seen;
        for (const std::string& id : config.speaker_seed) {
            if (!team_ids.count(id))
                throw ConfigError("config: speaker_seed names unknown team '" + id + "'");
            if (!seen.insert(id).second)
                throw ConfigError("config: speaker_seed repeats team '" + id + "'");
        }
    }
}

std::string preset_config_filename(Preset p) {
    switch (p) {
        case Preset::B_CHAT: return "b_chat.json";
        case Preset::B_SINGLE_RAG: return "b_single_rag.json";
        case Preset::HOMO: return "homo.json";
        case Preset::HETERO_RESILIENCE: return "hetero_resilience.json";
        case Preset::HETERO_PEDAGOGY: return "hetero_pedagogy.json";
    }
    return "";
}

}  // namespace debate
