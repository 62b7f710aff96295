#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "debate/text_util.hpp"

using namespace debate;

TEST_CASE("normalize lowercases and collapses whitespace") {
    CHECK(normalize("  The\tQuick\n\nBrown ") == "the quick brown");
    CHECK(normalize("") == "");
    CHECK(normalize("a  b") == normalize("A B"));
}

TEST_CASE("tokenize keeps alphanumeric runs") {
    CHECK(tokenize("Pull the lever, now!") ==
          std::vector<std::string>{"pull", "the", "lever", "now"});
    CHECK(tokenize("x2+y2") == std::vector<std::string>{"x2", "y2"});
    CHECK(tokenize("...") == std::vector<std::string>{});
}

TEST_CASE("word boundaries") {
    CHECK(contains_word("save the one person", "one"));
    CHECK_FALSE(contains_word("someone must choose", "one"));
    CHECK_FALSE(contains_word("bygones", "one"));
    CHECK(contains_word("one", "one"));
    CHECK(contains_word("the one's choice", "one"));
    CHECK_FALSE(contains_word("utility and futility", "tility"));
}

TEST_CASE("keyword matching: words vs phrases") {
    CHECK(contains_keyword("the greatest happiness of all", "greatest happiness"));
    // phrases are substring matches by design
    CHECK(contains_keyword("a supernatural law of sorts", "natural law"));
    CHECK_FALSE(contains_keyword("someone decides", "one"));
}

TEST_CASE("word_count counts whitespace words") {
    CHECK(word_count("a b  c\nd") == 4);
    CHECK(word_count("   ") == 0);
    CHECK(word_count("") == 0);
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64_hex("a") == fnv1a64_hex("a"));
    CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
}

TEST_CASE("utf8 validation reports first bad offset") {
    CHECK_FALSE(utf8_invalid_at("plain ascii"));
    CHECK_FALSE(utf8_invalid_at("caf\xc3\xa9"));
    const std::string bad = std::string("ok") + '\xff' + "rest";
    REQUIRE(utf8_invalid_at(bad).has_value());
    CHECK(*utf8_invalid_at(bad) == 2);
    const std::string truncated = std::string("ab") + '\xc3';
    CHECK(*utf8_invalid_at(truncated) == 2);
}

TEST_CASE("round2 is half away from zero") {
    CHECK(format2(0.165) == "0.17");
    CHECK(format2(1.0 / 6.0) == "0.17");
    CHECK(format2(0.055555) == "0.06");
    CHECK(format2(-2.0 / 7.0) == "-0.29");
    CHECK(format2(0.5) == "0.50");
    CHECK(format2(0.275) == "0.28");
    CHECK(format2(0.0) == "0.00");
    CHECK(format2(-0.0001) == "0.00");
}

TEST_CASE("phrase files strip comments and blanks") {
    const std::string path = "/tmp/debate_test_phrases.txt";
    write_file(path, "# header\n one \n\ntwo words # trailing\n#only comment\n");
    const auto phrases = read_phrase_file(path);
    REQUIRE(phrases.size() == 2);
    CHECK(phrases[0] == "one");
    CHECK(phrases[1] == "two words");
}
