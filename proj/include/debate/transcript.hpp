#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace debate {

enum class Phase { DELIBERATION, INTERROGATION, DEBATE, DONE };

std::string phase_name(Phase p);
Phase phase_from_name(const std::string& name);

/// Reserved speaker id for the Socratic moderator.
inline constexpr const char* kModeratorSpeaker = "MODERATOR";

/// One utterance in a debate. Moderator turns carry no team_id; only
/// Phase 3 speaker turns carry a debate_turn_index (1-based).
struct Turn {
    int turn_index = 0;  // 0-based, global across phases
    Phase phase = Phase::DELIBERATION;
    std::string speaker;
    std::optional<std::string> team_id;
    std::string text;
    std::optional<int> debate_turn_index;
    std::uint64_t ts_ms = 0;

    bool is_moderator() const { return speaker == kModeratorSpeaker; }
    bool is_phase3_speaker() const {
        return phase == Phase::DEBATE && !is_moderator();
    }
};

/// One-object-per-line JSONL with stable key order.
std::string turn_to_jsonl(const Turn& t);
Turn turn_from_jsonl(const std::string& line);

std::string transcript_to_jsonl(const std::vector<Turn>& turns);
std::vector<Turn> load_transcript(const std::string& path);
void save_transcript(const std::vector<Turn>& turns, const std::string& path);

}  // namespace debate
