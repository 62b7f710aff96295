#pragma once

// Heuristic opponent modeling. This module is intentionally independent of
// the identity module: strategy and identity are stored and evolved
// separately, and a build-layer test keeps it that way.

#include <cstddef>
#include <string>
#include <vector>

namespace debate {

/// A known vulnerability of one opposing school, with the phrases that
/// reveal it and the counter-argument worth deploying.
struct WeaknessEntry {
    std::string target_school;  // uppercase tag, never the owner's own
    std::string weakness_text;
    std::vector<std::string> trigger_patterns;  // lowercase, non-empty
    std::string counter_hint;
};

/// Static per-agent profile of every opposing school.
struct WeaknessMap {
    std::string owner_agent_id;
    std::string owner_school;
    std::vector<WeaknessEntry> entries;
};

/// Entries targeting `opponent_school`, scored by how many trigger
/// patterns occur in the opponent's turn (case-insensitive). Only scores
/// >= 1 qualify; ties keep map order; at most max_hints returned. Pure.
std::vector<WeaknessEntry> select_hints(const WeaknessMap& map,
                                        const std::string& opponent_turn,
                                        const std::string& opponent_school,
                                        std::size_t max_hints);

/// Loads a weakness-map file (JSON) and validates its invariants: no entry
/// may target the owner's own school, trigger lists are non-empty.
WeaknessMap load_weakness_map(const std::string& path);

}  // namespace debate
