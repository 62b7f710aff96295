#include "debate/transcript.hpp"

#include <sstream>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::DELIBERATION: return "DELIBERATION";
        case Phase::INTERROGATION: return "INTERROGATION";
        case Phase::DEBATE: return "DEBATE";
        case Phase::DONE: return "DONE";
    }
    return "?";
}

Phase phase_from_name(const std::string& name) {
    if (name == "DELIBERATION") return Phase::DELIBERATION;
    if (name == "INTERROGATION") return Phase::INTERROGATION;
    if (name == "DEBATE") return Phase::DEBATE;
    if (name == "DONE") return Phase::DONE;
    throw ValidationError("unknown phase: " + name);
}

std::string turn_to_jsonl(const Turn& t) {
    nlohmann::json j;
    j["turn_index"] = t.turn_index;
    j["phase"] = phase_name(t.phase);
    if (t.debate_turn_index) j["debate_turn_index"] = *t.debate_turn_index;
    j["speaker"] = t.speaker;
    if (t.team_id) j["team_id"] = *t.team_id;
    j["text"] = t.text;
    j["ts_ms"] = t.ts_ms;
    return j.dump();
}

Turn turn_from_jsonl(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    Turn t;
    t.turn_index = j.at("turn_index").get<int>();
    t.phase = phase_from_name(j.at("phase").get<std::string>());
    t.speaker = j.at("speaker").get<std::string>();
    if (j.contains("team_id")) t.team_id = j["team_id"].get<std::string>();
    t.text = j.at("text").get<std::string>();
    if (j.contains("debate_turn_index"))
        t.debate_turn_index = j["debate_turn_index"].get<int>();
    t.ts_ms = j.value("ts_ms", std::uint64_t{0});
    return t;
}

std::string transcript_to_jsonl(const std::vector<Turn>& turns) {
    std::string out;
    for (const Turn& t : turns) {
        out += turn_to_jsonl(t);
        out += '\n';
    }
    return out;
}

std::vector<Turn> load_transcript(const std::string& path) {
    std::vector<Turn> turns;
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (collapse_ws(line).empty()) continue;
        try {
            turns.push_back(turn_from_jsonl(line));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": bad transcript line: " + e.what());
        }
    }
    return turns;
}

void save_transcript(const std::vector<Turn>& turns, const std::string& path) {
    write_file(path, transcript_to_jsonl(turns));
}

}  // namespace debate
