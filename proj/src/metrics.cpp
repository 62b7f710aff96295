#include "debate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

namespace {

KeywordSet load_set(const std::string& path, const std::string& name) {
    KeywordSet set;
    set.name = name;
    for (const std::string& phrase : read_phrase_file(path))
        set.keywords.push_back(normalize(phrase));
    if (set.keywords.empty())
        throw ValidationError(path + ": keyword set '" + name + "' is empty");
    return set;
}

/// Post-injection Phase 3 speaker turns, in order.
std::vector<const Turn*> observation_window(const std::vector<Turn>& transcript,
                                            int injection_turn) {
    std::vector<const Turn*> window;
    for (const Turn& t : transcript) {
        if (!t.is_phase3_speaker() || !t.debate_turn_index) continue;
        if (*t.debate_turn_index > injection_turn) window.push_back(&t);
    }
    return window;
}

std::vector<const Turn*> scored_turns(const std::vector<Turn>& transcript,
                                      MetricWindow window, int injection_turn) {
    std::vector<const Turn*> turns;
    for (const Turn& t : transcript) {
        if (!t.is_phase3_speaker()) continue;
        if (window == MetricWindow::POST_INJECTION &&
            (!t.debate_turn_index || *t.debate_turn_index <= injection_turn))
            continue;
        turns.push_back(&t);
    }
    return turns;
}

}  // namespace

KeywordLibrary load_keywords(const std::string& dir) {
    namespace fs = std::filesystem;
    KeywordLibrary lib;
    const fs::path root(dir);
    if (!fs::is_directory(root))
        throw ConfigError(dir + ": keyword directory does not exist");

    std::string concatenated;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) concatenated += read_file(f.string());
    lib.source_hash = fnv1a64_hex(concatenated);

    lib.base = load_set((root / "base.txt").string(), "BASE");
    lib.valid = load_set((root / "valid.txt").string(), "VALID");
    for (const fs::path& f : files) {
        const std::string stem = f.stem().string();
        if (stem.rfind("framework_", 0) != 0) continue;
        std::string school = stem.substr(std::string("framework_").size());
        std::transform(school.begin(), school.end(), school.begin(), [](char c) {
            return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
        });
        lib.frameworks[school] = load_set(f.string(), "FRAMEWORK(" + school + ")");
    }

    const std::set<std::string> valid_set(lib.valid.keywords.begin(),
                                          lib.valid.keywords.end());
    for (const std::string& kw : lib.base.keywords) {
        if (!valid_set.count(kw))
            throw ValidationError(dir + ": BASE keyword '" + kw +
                                  "' missing from VALID (BASE must be a subset)");
    }
    return lib;
}

std::size_t count_hits(const std::string& text, const KeywordSet& set) {
    const std::string haystack = normalize(text);
    std::size_t hits = 0;
    std::set<std::string> seen;
    for (const std::string& kw : set.keywords) {
        if (!seen.insert(kw).second) continue;  // duplicates count once
        if (contains_keyword(haystack, kw)) ++hits;
    }
    return hits;
}

SysArResult sys_ar(const std::vector<Turn>& transcript, const KeywordSet& base,
                   int injection_turn, int scan_cap) {
    auto window = observation_window(transcript, injection_turn);
    if (window.empty())
        throw ValidationError("sys_ar: no post-injection speaker turns to observe");
    if (scan_cap > 0 && window.size() > static_cast<std::size_t>(scan_cap))
        window.resize(static_cast<std::size_t>(scan_cap));

    for (std::size_t i = 0; i < window.size(); ++i) {
        if (count_hits(window[i]->text, base) >= 3) {
            SysArResult r;
            r.recovery_time = static_cast<int>(i + 1);
            r.value = 1.0 / static_cast<double>(*r.recovery_time);
            return r;
        }
    }
    return SysArResult{0.0, std::nullopt};
}

double ar_co(const std::vector<Turn>& transcript, const KeywordSet& valid,
             int injection_turn) {
    const auto window = observation_window(transcript, injection_turn);
    if (window.empty())
        throw ValidationError("ar_co: no post-injection speaker turns to observe");
    std::size_t coherent = 0;
    for (const Turn* t : window) {
        if (count_hits(t->text, valid) >= 3) ++coherent;
    }
    return static_cast<double>(coherent) / static_cast<double>(window.size());
}

namespace {

PerAgentMetric fraction_of_turns(
    const std::vector<Turn>& transcript, const Roster& roster, MetricWindow window,
    int injection_turn,
    const std::function<bool(const Turn&, const RosterEntry&)>& qualifies) {
    PerAgentMetric out;
    const auto turns = scored_turns(transcript, window, injection_turn);
    double sum = 0.0;
    std::size_t present = 0;
    for (const RosterEntry& agent : roster) {
        if (agent.school.empty()) continue;
        std::size_t total = 0;
        std::size_t hit = 0;
        for (const Turn* t : turns) {
            if (t->speaker != agent.agent_id) continue;
            ++total;
            if (qualifies(*t, agent)) ++hit;
        }
        if (total == 0) continue;  // silent agents stay absent, never 0
        const double value = static_cast<double>(hit) / static_cast<double>(total);
        out.per_agent[agent.agent_id] = value;
        sum += value;
        ++present;
    }
    if (present > 0) out.mean = sum / static_cast<double>(present);
    return out;
}

}  // namespace

PerAgentMetric doctrinal_accuracy(const std::vector<Turn>& transcript,
                                  const std::map<std::string, KeywordSet>& frameworks,
                                  const Roster& roster, MetricWindow window,
                                  int injection_turn, std::size_t min_hits) {
    for (const RosterEntry& agent : roster) {
        if (!agent.school.empty() && !frameworks.count(agent.school))
            throw ConfigError("doctrinal_accuracy: no framework keyword set for school '" +
                              agent.school + "'");
    }
    return fraction_of_turns(
        transcript, roster, window, injection_turn,
        [&frameworks, min_hits](const Turn& t, const RosterEntry& agent) {
            return count_hits(t.text, frameworks.at(agent.school)) >= min_hits;
        });
}

PerAgentMetric cross_referencing(const std::vector<Turn>& transcript,
                                 const std::map<std::string, KeywordSet>& frameworks,
                                 const Roster& roster, MetricWindow window,
                                 int injection_turn, std::size_t threshold) {
    // Opposing schools per agent: schools of rostered agents on other teams.
    std::map<std::string, std::vector<const KeywordSet*>> opposing;
    for (const RosterEntry& agent : roster) {
        std::set<std::string> schools;
        for (const RosterEntry& other : roster) {
            if (other.team_id.empty() || agent.team_id.empty()) continue;
            if (other.team_id == agent.team_id) continue;
            if (!other.school.empty()) schools.insert(other.school);
        }
        for (const std::string& s : schools) {
            const auto it = frameworks.find(s);
            if (it == frameworks.end())
                throw ConfigError("cross_referencing: no framework keyword set for school '" +
                                  s + "'");
            opposing[agent.agent_id].push_back(&it->second);
        }
    }
    return fraction_of_turns(
        transcript, roster, window, injection_turn,
        [&opposing, threshold](const Turn& t, const RosterEntry& agent) {
            const auto it = opposing.find(agent.agent_id);
            if (it == opposing.end() || it->second.empty()) return false;
            for (const KeywordSet* set : it->second) {
                if (count_hits(t.text, *set) >= threshold) return true;
            }
            return false;
        });
}

MetricReport compute_report(const std::vector<Turn>& transcript,
                            const KeywordLibrary& library, const Roster& roster,
                            std::optional<int> injection_turn, MetricWindow window,
                            std::size_t cr_threshold) {
    MetricReport report;
    report.keyword_hash = library.source_hash;
    report.injection_turn = injection_turn;

    if (injection_turn) {
        const auto obs = observation_window(transcript, *injection_turn);
        if (!obs.empty()) {
            for (const Turn* t : obs)
                report.observation_turn_indices.push_back(t->turn_index);
            const SysArResult sar = sys_ar(transcript, library.base, *injection_turn);
            report.sys_ar = sar.value;
            report.recovery_time = sar.recovery_time;
            report.ar_co = ar_co(transcript, library.valid, *injection_turn);
        }
    }

    const int inj = injection_turn.value_or(0);
    report.da = doctrinal_accuracy(transcript, library.frameworks, roster, window, inj);
    report.cr =
        cross_referencing(transcript, library.frameworks, roster, window, inj,
                          cr_threshold);

    std::map<std::string, const RosterEntry*> by_agent;
    for (const RosterEntry& r : roster) by_agent[r.agent_id] = &r;
    for (const Turn& t : transcript) {
        if (!t.is_phase3_speaker()) continue;
        TurnAnnotation a;
        a.turn_index = t.turn_index;
        a.debate_turn_index = t.debate_turn_index;
        a.speaker = t.speaker;
        a.base_hits = count_hits(t.text, library.base);
        a.valid_hits = count_hits(t.text, library.valid);
        const auto it = by_agent.find(t.speaker);
        if (it != by_agent.end() && !it->second->school.empty()) {
            const auto fw = library.frameworks.find(it->second->school);
            if (fw != library.frameworks.end())
                a.own_framework_hits = count_hits(t.text, fw->second);
            for (const RosterEntry& other : roster) {
                if (other.team_id.empty() || it->second->team_id.empty()) continue;
                if (other.team_id == it->second->team_id || other.school.empty())
                    continue;
                const auto ofw = library.frameworks.find(other.school);
                if (ofw != library.frameworks.end())
                    a.opposing_framework_hits = std::max(
                        a.opposing_framework_hits, count_hits(t.text, ofw->second));
            }
        }
        report.annotations.push_back(std::move(a));
    }
    return report;
}

namespace {

nlohmann::json per_agent_to_json(const PerAgentMetric& m) {
    nlohmann::json j;
    j["per_agent"] = nlohmann::json::object();
    for (const auto& [agent, value] : m.per_agent) {
        j["per_agent"][agent] = value;
        j["display"][agent] = format2(value);
    }
    if (m.mean) {
        j["mean"] = *m.mean;
        j["mean_display"] = format2(*m.mean);
    }
    return j;
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["keyword_hash"] = report.keyword_hash;
    if (report.injection_turn) {
        j["window"]["injection_turn"] = *report.injection_turn;
        j["window"]["observation_turn_indices"] = report.observation_turn_indices;
    }
    if (report.sys_ar) {
        j["sys_ar"] = *report.sys_ar;
        j["sys_ar_display"] = format2(*report.sys_ar);
        if (report.recovery_time) j["recovery_time"] = *report.recovery_time;
    }
    if (report.ar_co) {
        j["ar_co"] = *report.ar_co;
        j["ar_co_display"] = format2(*report.ar_co);
    }
    j["da"] = per_agent_to_json(report.da);
    j["cr"] = per_agent_to_json(report.cr);
    nlohmann::json ann = nlohmann::json::array();
    for (const TurnAnnotation& a : report.annotations) {
        nlohmann::json ja;
        ja["turn_index"] = a.turn_index;
        if (a.debate_turn_index) ja["debate_turn_index"] = *a.debate_turn_index;
        ja["speaker"] = a.speaker;
        ja["base_hits"] = a.base_hits;
        ja["valid_hits"] = a.valid_hits;
        ja["own_framework_hits"] = a.own_framework_hits;
        ja["opposing_framework_hits"] = a.opposing_framework_hits;
        ann.push_back(std::move(ja));
    }
    j["annotations"] = std::move(ann);
    return j.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    MetricReport r;
    r.keyword_hash = j.value("keyword_hash", "");
    if (j.contains("window")) {
        r.injection_turn = j["window"].value("injection_turn", 0);
        for (const auto& idx : j["window"].value("observation_turn_indices",
                                                 nlohmann::json::array()))
            r.observation_turn_indices.push_back(idx.get<int>());
    }
    if (j.contains("sys_ar")) r.sys_ar = j["sys_ar"].get<double>();
    if (j.contains("recovery_time")) r.recovery_time = j["recovery_time"].get<int>();
    if (j.contains("ar_co")) r.ar_co = j["ar_co"].get<double>();
    auto read_pa = [](const nlohmann::json& jm) {
        PerAgentMetric m;
        const nlohmann::json per_agent =
            jm.value("per_agent", nlohmann::json::object());
        for (const auto& [agent, value] : per_agent.items())
            m.per_agent[agent] = value.get<double>();
        if (jm.contains("mean")) m.mean = jm["mean"].get<double>();
        return m;
    };
    if (j.contains("da")) r.da = read_pa(j["da"]);
    if (j.contains("cr")) r.cr = read_pa(j["cr"]);
    return r;
}

// --- ACS ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(collapse_ws(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(collapse_ws(cur));
    return fields;
}

int parse_dimension(const std::string& s, const std::string& where) {
    int v;
    try {
        v = std::stoi(s);
    } catch (...) {
        throw ValidationError(where + ": not an integer: '" + s + "'");
    }
    if (v < 0 || v > 2)
        throw ValidationError(where + ": dimension must be 0..2, got " + s);
    return v;
}

bool known_condition(const std::string& c) {
    for (const char* k : kAcsConditions) {
        if (c == k) return true;
    }
    return false;
}

}  // namespace

std::vector<AcsRecord> load_acs_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path + ": empty ACS csv");

    std::vector<AcsRecord> records;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (collapse_ws(line).empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (f.size() != 10)
            throw ValidationError(where + ": expected 10 fields, got " +
                                  std::to_string(f.size()));
        AcsRecord r;
        r.participant_id = f[0];
        r.condition = f[1];
        if (!known_condition(r.condition))
            throw ValidationError(where + ": unknown condition '" + r.condition + "'");
        r.pre.perspective_range = parse_dimension(f[2], where + " pre_perspective");
        r.pre.conceptual_sophistication = parse_dimension(f[3], where + " pre_concept");
        r.pre.argumentative_structuring = parse_dimension(f[4], where + " pre_structure");
        r.post.perspective_range = parse_dimension(f[5], where + " post_perspective");
        r.post.conceptual_sophistication =
            parse_dimension(f[6], where + " post_concept");
        r.post.argumentative_structuring =
            parse_dimension(f[7], where + " post_structure");
        try {
            r.quiz = std::stod(f[8]);
            r.stance_shift = std::stod(f[9]);
        } catch (...) {
            throw ValidationError(where + ": quiz/stance_shift must be numeric");
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ValidationError(path + ": no ACS records");
    return records;
}

std::optional<double> cohen_d(const std::vector<double>& group_a,
                              const std::vector<double>& group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) return std::nullopt;
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto ss = [&mean](const std::vector<double>& v) {
        const double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s;
    };
    const double na = static_cast<double>(group_a.size());
    const double nb = static_cast<double>(group_b.size());
    const double pooled_var = (ss(group_a) + ss(group_b)) / (na + nb - 2.0);
    if (pooled_var <= 0.0) return std::nullopt;
    return (mean(group_a) - mean(group_b)) / std::sqrt(pooled_var);
}

AcsAggregate acs_aggregate(const std::vector<AcsRecord>& records) {
    if (records.empty()) throw ValidationError("acs_aggregate: no records");

    AcsAggregate agg;
    std::vector<double> hetero_deltas;
    std::vector<double> baseline_deltas;
    for (const char* cond : kAcsConditions) {
        AcsConditionStats stats;
        stats.condition = cond;
        double delta_sum = 0.0, quiz_sum = 0.0, shift_sum = 0.0;
        for (const AcsRecord& r : records) {
            if (r.condition != cond) continue;
            ++stats.n;
            const double delta = r.post.total() - r.pre.total();
            delta_sum += delta;
            quiz_sum += r.quiz;
            shift_sum += r.stance_shift;
            if (r.condition == std::string("HETERO"))
                hetero_deltas.push_back(delta);
            else
                baseline_deltas.push_back(delta);
        }
        if (stats.n == 0) continue;
        stats.delta_mean = delta_sum / static_cast<double>(stats.n);
        stats.quiz_mean = quiz_sum / static_cast<double>(stats.n);
        stats.shift_mean = shift_sum / static_cast<double>(stats.n);
        agg.conditions.push_back(stats);
    }
    agg.cohen_d = cohen_d(hetero_deltas, baseline_deltas);
    return agg;
}

}  // namespace debate
