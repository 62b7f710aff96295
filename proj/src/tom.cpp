#include "debate/tom.hpp"

#include <algorithm>
#include <filesystem>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

std::vector<WeaknessEntry> select_hints(const WeaknessMap& map,
                                        const std::string& opponent_turn,
                                        const std::string& opponent_school,
                                        std::size_t max_hints) {
    const std::string turn = normalize(opponent_turn);

    struct Scored {
        std::size_t map_order;
        std::size_t score;
    };
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        const WeaknessEntry& e = map.entries[i];
        if (e.target_school != opponent_school) continue;
        std::size_t hits = 0;
        for (const std::string& p : e.trigger_patterns) {
            if (contains_phrase(turn, normalize(p))) ++hits;
        }
        if (hits >= 1) scored.push_back(Scored{i, hits});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });
    if (scored.size() > max_hints) scored.resize(max_hints);

    std::vector<WeaknessEntry> out;
    out.reserve(scored.size());
    for (const Scored& s : scored) out.push_back(map.entries[s.map_order]);
    return out;
}

WeaknessMap load_weakness_map(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ValidationError(path + ": no such weakness-map file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": not valid JSON: " + e.what());
    }

    WeaknessMap map;
    try {
        map.owner_agent_id = j.at("owner_agent_id").get<std::string>();
        map.owner_school = j.value("owner_school", std::string{});
        for (const auto& je : j.value("entries", nlohmann::json::array())) {
            WeaknessEntry e;
            e.target_school = je.at("target_school").get<std::string>();
            e.weakness_text = je.at("weakness_text").get<std::string>();
            for (const auto& jp : je.at("trigger_patterns"))
                e.trigger_patterns.push_back(jp.get<std::string>());
            e.counter_hint = je.at("counter_hint").get<std::string>();
            map.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": schema violation: " + e.what());
    }

    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        const WeaknessEntry& e = map.entries[i];
        const std::string where = path + ": entries[" + std::to_string(i) + "]";
        if (!map.owner_school.empty() && e.target_school == map.owner_school)
            throw ValidationError(where + ".target_school: targets the owner's own school '" +
                                  e.target_school + "'");
        if (e.trigger_patterns.empty())
            throw ValidationError(where + ".trigger_patterns: must be non-empty");
    }
    return map;
}

}  // namespace debate
