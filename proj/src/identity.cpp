#include "debate/identity.hpp"

#include <algorithm>
#include <unordered_set>
#include <filesystem>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

std::size_t IdentityGraph::core_belief_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(),
                      [](const BeliefNode& n) { return n.core; }));
}

std::vector<const BeliefNode*> IdentityGraph::core_nodes() const {
    std::vector<const BeliefNode*> out;
    for (const BeliefNode& n : nodes) {
        if (n.core) out.push_back(&n);
    }
    return out;
}

bool violates(const MemoryEntry& fact, const NegativeConstraint& constraint) {
    const std::string text = normalize(fact.text);
    if (constraint.patterns.empty()) return false;
    if (constraint.match_mode == MatchMode::ANY_PHRASE) {
        for (const std::string& p : constraint.patterns) {
            if (contains_phrase(text, normalize(p))) return true;
        }
        return false;
    }
    for (const std::string& p : constraint.patterns) {
        if (!contains_phrase(text, normalize(p))) return false;
    }
    return true;
}

WorkingMemory filter_and_merge(const WorkingMemory& wm,
                               const std::vector<MemoryEntry>& retrieved,
                               const std::vector<NegativeConstraint>& constraints) {
    WorkingMemory out = wm;
    for (const MemoryEntry& fact : retrieved) {
        bool blocked = std::any_of(
            constraints.begin(), constraints.end(),
            [&fact](const NegativeConstraint& c) { return violates(fact, c); });
        if (!blocked) out.entries.push_back(fact);
    }
    if (out.capacity > 0 && out.entries.size() > out.capacity) {
        out.entries.erase(out.entries.begin(),
                          out.entries.begin() +
                              static_cast<std::ptrdiff_t>(out.entries.size() - out.capacity));
    }
    return out;
}

std::string node_kind_name(NodeKind k) {
    return k == NodeKind::BELIEF ? "BELIEF" : "VALUE";
}

std::string match_mode_name(MatchMode m) {
    return m == MatchMode::ANY_PHRASE ? "ANY_PHRASE" : "ALL_PHRASES";
}

std::string memory_source_name(MemorySource s) {
    switch (s) {
        case MemorySource::TRANSCRIPT: return "TRANSCRIPT";
        case MemorySource::RETRIEVED_FACT: return "RETRIEVED_FACT";
        case MemorySource::TOM_HINT: return "TOM_HINT";
        case MemorySource::MODERATOR: return "MODERATOR";
    }
    return "?";
}

namespace {

NodeKind node_kind_from(const std::string& s, const std::string& field) {
    if (s == "BELIEF") return NodeKind::BELIEF;
    if (s == "VALUE") return NodeKind::VALUE;
    throw ValidationError(field + ": unknown node kind '" + s + "'");
}

MatchMode match_mode_from(const std::string& s, const std::string& field) {
    if (s == "ANY_PHRASE") return MatchMode::ANY_PHRASE;
    if (s == "ALL_PHRASES") return MatchMode::ALL_PHRASES;
    throw ValidationError(field + ": unknown match mode '" + s + "'");
}

}  // namespace

void validate_identity(const IdentityGraph& g, const std::string& origin) {
    auto fail = [&origin](const std::string& msg) {
        throw ValidationError(origin + ": " + msg);
    };

    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const BeliefNode& n = g.nodes[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (n.id.empty()) fail(where + ".id: must be non-empty");
        if (!ids.insert(n.id).second) fail(where + ".id: duplicate id '" + n.id + "'");
        if (n.gamma < 0.0 || n.gamma > 1.0)
            fail(where + ".gamma: must be in [0,1], got " + std::to_string(n.gamma));
        if (n.core && n.gamma != 1.0)
            fail(where + ".core: core node requires gamma = 1.0, got " +
                 std::to_string(n.gamma));
        if (n.statement.empty()) fail(where + ".statement: must be non-empty");
    }
    if (!g.nodes.empty() && g.core_belief_count() == 0)
        fail("nodes: a non-empty graph requires at least one core node");

    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const GraphEdge& e = g.edges[i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        if (!ids.count(e.from))
            fail(where + ".from: references missing node id '" + e.from + "'");
        if (!ids.count(e.to))
            fail(where + ".to: references missing node id '" + e.to + "'");
    }

    for (std::size_t i = 0; i < g.constraints.size(); ++i) {
        const NegativeConstraint& c = g.constraints[i];
        const std::string where = "constraints[" + std::to_string(i) + "]";
        if (c.patterns.empty()) fail(where + ".patterns: must be non-empty");
        for (std::size_t j = 0; j < c.patterns.size(); ++j) {
            if (collapse_ws(c.patterns[j]).empty())
                fail(where + ".patterns[" + std::to_string(j) +
                     "]: empty after trimming");
        }
    }
}

IdentityGraph load_identity(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ValidationError(path + ": no such identity file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": not valid JSON: " + e.what());
    }

    IdentityGraph g;
    try {
        g.agent_id = j.at("agent_id").get<std::string>();
        g.school = j.value("school", std::string{});
        g.persona_summary = j.value("persona_summary", std::string{});
        for (const auto& jn : j.value("nodes", nlohmann::json::array())) {
            BeliefNode n;
            n.id = jn.at("id").get<std::string>();
            n.kind = node_kind_from(jn.at("kind").get<std::string>(), "nodes[].kind");
            n.statement = jn.at("statement").get<std::string>();
            n.gamma = jn.at("gamma").get<double>();
            n.core = jn.value("core", false);
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : j.value("edges", nlohmann::json::array())) {
            GraphEdge e;
            e.from = je.at("from").get<std::string>();
            e.to = je.at("to").get<std::string>();
            e.relation = je.value("relation", std::string{});
            g.edges.push_back(std::move(e));
        }
        for (const auto& jc : j.value("constraints", nlohmann::json::array())) {
            NegativeConstraint c;
            c.id = jc.at("id").get<std::string>();
            c.label = jc.at("label").get<std::string>();
            for (const auto& jp : jc.at("patterns")) {
                c.patterns.push_back(jp.get<std::string>());
            }
            c.match_mode = match_mode_from(jc.value("match_mode", "ANY_PHRASE"),
                                           "constraints[].match_mode");
            g.constraints.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": schema violation: " + e.what());
    }

    validate_identity(g, path);
    return g;
}

}  // namespace debate
