#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace debate {

enum class NodeKind { BELIEF, VALUE };

/// One belief or value in an agent's doctrinal graph. Core nodes are the
/// immutable commitments (gamma pinned to 1.0) that anchor the persona.
struct BeliefNode {
    std::string id;
    NodeKind kind = NodeKind::BELIEF;
    std::string statement;
    double gamma = 1.0;  // certainty in [0,1]
    bool core = false;   // core implies gamma == 1.0
};

enum class MatchMode { ANY_PHRASE, ALL_PHRASES };

/// A doctrine-level prohibition. Retrieved facts matching it are deleted
/// from working memory before they can reach the prompt.
struct NegativeConstraint {
    std::string id;
    std::string label;  // e.g. "REJECT: Reducing morality to calculation"
    std::vector<std::string> patterns;  // lowercase match phrases, non-empty
    MatchMode match_mode = MatchMode::ANY_PHRASE;
};

struct GraphEdge {
    std::string from;
    std::string to;
    std::string relation;
};

/// An agent's doctrinal self: certainty-weighted belief/value nodes,
/// documentation-grade edges, and the negative constraints that guard the
/// working memory. Immutable after load.
struct IdentityGraph {
    std::string agent_id;
    std::string school;  // open tag, uppercase (e.g. DEONTOLOGY)
    std::string persona_summary;
    std::vector<BeliefNode> nodes;
    std::vector<GraphEdge> edges;
    std::vector<NegativeConstraint> constraints;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t core_belief_count() const;
    std::vector<const BeliefNode*> core_nodes() const;
};

enum class MemorySource { TRANSCRIPT, RETRIEVED_FACT, TOM_HINT, MODERATOR };

struct MemoryEntry {
    MemorySource source = MemorySource::TRANSCRIPT;
    std::string text;
    std::optional<std::string> origin_ref;  // chunk id or turn index
};

/// Bounded per-agent context buffer. Eviction is oldest-first; identity
/// core beliefs never pass through it, so they can never be evicted.
struct WorkingMemory {
    std::vector<MemoryEntry> entries;
    std::size_t capacity = 40;
};

/// True iff the constraint's patterns match the fact text, case-insensitive
/// and whitespace-normalized. ANY_PHRASE: at least one pattern present;
/// ALL_PHRASES: every pattern present. Pure.
bool violates(const MemoryEntry& fact, const NegativeConstraint& constraint);

/// Appends the retrieved facts that survive every constraint to a copy of
/// `wm`, preserving their order, then applies oldest-first capacity
/// eviction. The input memory is untouched.
WorkingMemory filter_and_merge(const WorkingMemory& wm,
                               const std::vector<MemoryEntry>& retrieved,
                               const std::vector<NegativeConstraint>& constraints);

/// Loads and validates an identity file (JSON). Throws ValidationError
/// naming the offending field on any schema or invariant violation.
IdentityGraph load_identity(const std::string& path);

/// Validation shared by load_identity and programmatic construction.
void validate_identity(const IdentityGraph& g, const std::string& origin);

std::string node_kind_name(NodeKind k);
std::string match_mode_name(MatchMode m);
std::string memory_source_name(MemorySource s);

}  // namespace debate
