#include "debate/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "debate/errors.hpp"

namespace debate {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

bool is_alnum_ascii(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string normalize(std::string_view s) { return collapse_ws(to_lower(s)); }

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char raw : s) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : s) {
        if (is_space(c)) {
            if (!cur.empty()) {
                words.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

bool contains_word(std::string_view haystack, std::string_view word) {
    if (word.empty()) return false;
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_alnum_ascii(haystack[pos - 1]);
        std::size_t end = pos + word.size();
        bool right_ok = end == haystack.size() || !is_alnum_ascii(haystack[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

bool contains_phrase(std::string_view haystack, std::string_view phrase) {
    if (phrase.empty()) return false;
    return haystack.find(phrase) != std::string_view::npos;
}

bool contains_keyword(std::string_view haystack_norm, std::string_view keyword) {
    if (keyword.find(' ') == std::string_view::npos) {
        return contains_word(haystack_norm, keyword);
    }
    return contains_phrase(haystack_norm, keyword);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

std::optional<std::size_t> utf8_invalid_at(std::string_view bytes) {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        std::size_t len;
        if (c < 0x80) {
            len = 1;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            if (c < 0xC2) return i;  // overlong
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            if (c > 0xF4) return i;  // beyond U+10FFFF
        } else {
            return i;
        }
        if (i + len > n) return i;
        for (std::size_t j = 1; j < len; ++j) {
            if ((static_cast<unsigned char>(bytes[i + j]) & 0xC0) != 0x80) return i;
        }
        i += len;
    }
    return std::nullopt;
}

double round2(double v) {
    double scaled = std::abs(v) * 100.0;
    double r = std::floor(scaled + 0.5) / 100.0;
    return v < 0 ? -r : r;
}

std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", round2(v));
    // Normalize "-0.00" so zero prints the same regardless of sign history.
    if (std::string_view(buf) == "-0.00") return "0.00";
    return std::string(buf);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write: " + path);
}

std::vector<std::string> read_phrase_file(const std::string& path) {
    std::vector<std::string> phrases;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = collapse_ws(line);
        if (!trimmed.empty()) phrases.push_back(std::move(trimmed));
    }
    return phrases;
}

}  // namespace debate
