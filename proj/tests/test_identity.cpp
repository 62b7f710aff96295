#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "debate/errors.hpp"
#include "debate/identity.hpp"
#include "debate/text_util.hpp"

using namespace debate;

namespace {

MemoryEntry fact(const std::string& text) {
    return MemoryEntry{MemorySource::RETRIEVED_FACT, text, std::nullopt};
}

NegativeConstraint constraint(std::vector<std::string> patterns,
                              MatchMode mode = MatchMode::ANY_PHRASE) {
    NegativeConstraint c;
    c.id = "c";
    c.label = "REJECT: test";
    c.patterns = std::move(patterns);
    c.match_mode = mode;
    return c;
}

// Brute-force re-implementation of the filter, kept deliberately naive and
// separate from the library code path.
bool oracle_violates(const std::string& fact_text,
                     const NegativeConstraint& c) {
    auto lower_collapse = [](std::string s) {
        std::string out;
        bool space = false;
        for (char ch : s) {
            if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
                space = true;
                continue;
            }
            if (space && !out.empty()) out.push_back(' ');
            space = false;
            if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
            out.push_back(ch);
        }
        return out;
    };
    const std::string text = lower_collapse(fact_text);
    std::size_t found = 0;
    for (const auto& p : c.patterns) {
        if (text.find(lower_collapse(p)) != std::string::npos) ++found;
    }
    return c.match_mode == MatchMode::ANY_PHRASE ? found > 0
                                                 : found == c.patterns.size();
}

std::vector<MemoryEntry> oracle_filter(const std::vector<MemoryEntry>& retrieved,
                                       const std::vector<NegativeConstraint>& cs) {
    std::vector<MemoryEntry> out;
    for (const auto& f : retrieved) {
        bool bad = false;
        for (const auto& c : cs) {
            if (oracle_violates(f.text, c)) bad = true;
        }
        if (!bad) out.push_back(f);
    }
    return out;
}

}  // namespace

TEST_CASE("violates: substring phrase matching") {
    CHECK(violates(fact("morality is fundamentally a calculation of utility"),
                   constraint({"calculation of utility"})));
    CHECK_FALSE(violates(fact("duty is prior to consequence"),
                         constraint({"calculation of utility"})));
}

TEST_CASE("violates is case and whitespace insensitive") {
    const auto c = constraint({"calculation of utility"});
    CHECK(violates(fact("the CALCULATION   of\nUtility rules"), c));
    CHECK(violates(fact("Calculation Of Utility"), c));
}

TEST_CASE("violates ALL_PHRASES requires every pattern") {
    const auto c = constraint({"pleasure", "pain"}, MatchMode::ALL_PHRASES);
    CHECK(violates(fact("pleasure and pain are the masters"), c));
    CHECK_FALSE(violates(fact("pleasure alone"), c));
}

TEST_CASE("filter_and_merge: empty constraints appends everything") {
    WorkingMemory wm;
    wm.entries.push_back({MemorySource::TRANSCRIPT, "prior", std::nullopt});
    const auto out = filter_and_merge(wm, {fact("a"), fact("b")}, {});
    REQUIRE(out.entries.size() == 3);
    CHECK(out.entries[0].text == "prior");
    CHECK(out.entries[1].text == "a");
    CHECK(out.entries[2].text == "b");
    CHECK(wm.entries.size() == 1);  // input untouched
}

TEST_CASE("filter_and_merge deletes violating facts only") {
    WorkingMemory wm;
    const auto out = filter_and_merge(
        wm, {fact("morality is a calculation of utility"), fact("duty first")},
        {constraint({"calculation of utility"})});
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].text == "duty first");
}

TEST_CASE("filter_and_merge: empty retrieved is identity within capacity") {
    WorkingMemory wm;
    wm.capacity = 4;
    for (int i = 0; i < 3; ++i)
        wm.entries.push_back({MemorySource::TRANSCRIPT, std::to_string(i), std::nullopt});
    const auto out = filter_and_merge(wm, {}, {constraint({"x"})});
    REQUIRE(out.entries.size() == wm.entries.size());
    for (std::size_t i = 0; i < out.entries.size(); ++i)
        CHECK(out.entries[i].text == wm.entries[i].text);
}

TEST_CASE("filter_and_merge evicts oldest beyond capacity") {
    WorkingMemory wm;
    wm.capacity = 3;
    wm.entries.push_back({MemorySource::TRANSCRIPT, "t0", std::nullopt});
    wm.entries.push_back({MemorySource::TRANSCRIPT, "t1", std::nullopt});
    const auto out = filter_and_merge(wm, {fact("f0"), fact("f1")}, {});
    REQUIRE(out.entries.size() == 3);
    CHECK(out.entries[0].text == "t1");
    CHECK(out.entries[1].text == "f0");
    CHECK(out.entries[2].text == "f1");
}

TEST_CASE("filter oracle equivalence on random instances") {
    std::mt19937 rng(20240811);
    const std::vector<std::string> alphabet = {
        "calculation of utility", "duty", "greatest happiness", "virtue",
        "natural law", "pleasure", "pain", "maxim", "charity", "soul",
        "golden mean", "dignity", "harm", "justice", "telos", "grace",
        "felicific calculus", "moral law", "double effect", "eudaimonia"};
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);

    auto random_text = [&] {
        std::uniform_int_distribution<int> len(1, 5);
        std::string t;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            if (i) t += " ";
            t += alphabet[pick(rng)];
        }
        return t;
    };

    for (int iter = 0; iter < 400; ++iter) {
        WorkingMemory wm;
        std::uniform_int_distribution<int> small(0, 8);
        const int wm_n = small(rng);
        for (int i = 0; i < wm_n; ++i)
            wm.entries.push_back({MemorySource::TRANSCRIPT, random_text(), std::nullopt});

        std::vector<MemoryEntry> retrieved;
        const int r_n = small(rng);
        for (int i = 0; i < r_n; ++i) retrieved.push_back(fact(random_text()));

        std::vector<NegativeConstraint> constraints;
        std::uniform_int_distribution<int> cs_n(0, 4);
        std::uniform_int_distribution<int> ps_n(1, 3);
        std::uniform_int_distribution<int> mode(0, 1);
        const int n_cs = cs_n(rng);
        for (int i = 0; i < n_cs; ++i) {
            std::vector<std::string> patterns;
            const int n_ps = ps_n(rng);
            for (int j = 0; j < n_ps; ++j) patterns.push_back(alphabet[pick(rng)]);
            constraints.push_back(constraint(
                patterns, mode(rng) ? MatchMode::ALL_PHRASES : MatchMode::ANY_PHRASE));
        }

        const auto got = filter_and_merge(wm, retrieved, constraints);
        const auto survivors = oracle_filter(retrieved, constraints);
        REQUIRE(got.entries.size() == wm.entries.size() + survivors.size());
        for (std::size_t i = 0; i < wm.entries.size(); ++i)
            CHECK(got.entries[i].text == wm.entries[i].text);
        for (std::size_t i = 0; i < survivors.size(); ++i)
            CHECK(got.entries[wm.entries.size() + i].text == survivors[i].text);

        // monotonicity: one more constraint never increases survivors
        auto more = constraints;
        more.push_back(constraint({alphabet[pick(rng)]}));
        const auto got_more = filter_and_merge(wm, retrieved, more);
        CHECK(got_more.entries.size() <= got.entries.size());
    }
}

TEST_CASE("load_identity: kant reference fixture") {
    const auto g = load_identity(std::string(DEBATE_DATA_DIR) +
                                 "/identities/kant.json");
    CHECK(g.agent_id == "kant");
    CHECK(g.school == "DEONTOLOGY");
    CHECK(g.node_count() == 34);
    CHECK(g.core_belief_count() == 6);
    CHECK_FALSE(g.constraints.empty());
    CHECK_FALSE(g.persona_summary.empty());
    for (const auto* n : g.core_nodes()) CHECK(n->gamma == 1.0);
}

TEST_CASE("all reference identities match the documented shape") {
    for (const char* agent : {"kant", "mill", "bentham", "aristotle", "plato",
                              "aquinas", "augustine"}) {
        const auto g = load_identity(std::string(DEBATE_DATA_DIR) +
                                     "/identities/" + agent + ".json");
        CHECK(g.node_count() == 34);
        CHECK(g.core_belief_count() == 6);
    }
}

TEST_CASE("load_identity rejects bad gamma") {
    const std::string path = "/tmp/debate_bad_gamma.json";
    write_file(path, R"({"agent_id":"x","school":"S","nodes":[
        {"id":"n1","kind":"BELIEF","statement":"s","gamma":1.3,"core":false}]})");
    CHECK_THROWS_WITH_AS(load_identity(path),
                         doctest::Contains("gamma"), ValidationError);
}

TEST_CASE("load_identity rejects dangling edges, naming the id") {
    const std::string path = "/tmp/debate_bad_edge.json";
    write_file(path, R"({"agent_id":"x","school":"S","nodes":[
        {"id":"n1","kind":"BELIEF","statement":"s","gamma":1.0,"core":true}],
        "edges":[{"from":"n1","to":"missing","relation":"r"}]})");
    CHECK_THROWS_WITH_AS(load_identity(path),
                         doctest::Contains("missing"), ValidationError);
}

TEST_CASE("load_identity: core requires gamma 1.0") {
    const std::string path = "/tmp/debate_bad_core.json";
    write_file(path, R"({"agent_id":"x","school":"S","nodes":[
        {"id":"n1","kind":"BELIEF","statement":"s","gamma":0.9,"core":true}]})");
    CHECK_THROWS_AS(load_identity(path), ValidationError);
}

TEST_CASE("non-empty graph without a core node is rejected") {
    const std::string path = "/tmp/debate_no_core.json";
    write_file(path, R"({"agent_id":"x","school":"S","nodes":[
        {"id":"n1","kind":"BELIEF","statement":"s","gamma":0.9,"core":false}]})");
    CHECK_THROWS_WITH_AS(load_identity(path), doctest::Contains("core"),
                         ValidationError);
}

TEST_CASE("empty graph is a valid degenerate identity") {
    const std::string path = "/tmp/debate_empty_identity.json";
    write_file(path, R"({"agent_id":"bare","school":"","nodes":[],"edges":[],
                         "constraints":[]})");
    const auto g = load_identity(path);
    CHECK(g.node_count() == 0);
    CHECK(g.core_belief_count() == 0);
}

TEST_CASE("moderator fixture is the degenerate graph") {
    const auto g = load_identity(std::string(DEBATE_DATA_DIR) +
                                 "/identities/moderator.json");
    CHECK(g.node_count() == 0);
    CHECK_FALSE(g.persona_summary.empty());
}
