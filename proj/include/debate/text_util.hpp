#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debate {

/// ASCII-only lowercasing. Non-ASCII bytes pass through unchanged, so the
/// result is stable for any UTF-8 input.
std::string to_lower(std::string_view s);

/// Trims and collapses runs of whitespace (space, tab, CR, LF) to one space.
std::string collapse_ws(std::string_view s);

/// collapse_ws(to_lower(s)) — the canonical form used by every lexical
/// matcher in the engine (constraints, triggers, keywords).
std::string normalize(std::string_view s);

/// Maximal runs of [a-z0-9] after lowercasing. Everything else separates.
std::vector<std::string> tokenize(std::string_view s);

/// Whitespace-delimited word count (chunking uses words, not tokens).
std::size_t word_count(std::string_view s);

/// Splits on whitespace, preserving order.
std::vector<std::string> split_words(std::string_view s);

/// True iff `word` occurs in `haystack` delimited by non-alphanumerics.
/// Both arguments are expected in normalized form. "one" does not match
/// inside "someone".
bool contains_word(std::string_view haystack, std::string_view word);

/// Plain substring containment, used for multi-word phrases.
bool contains_phrase(std::string_view haystack, std::string_view phrase);

/// Boundary-aware for single words, substring for phrases. `keyword` must
/// be normalized; `haystack_norm` must be the normalized text.
bool contains_keyword(std::string_view haystack_norm, std::string_view keyword);

/// 64-bit FNV-1a over raw bytes. Stable across platforms and runs;
/// used for corpus cache keys and keyword-file fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

/// fnv1a64 rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Byte offset of the first invalid UTF-8 sequence, or nullopt if valid.
std::optional<std::size_t> utf8_invalid_at(std::string_view bytes);

/// Half-away-from-zero rounding to two decimals (presentation rule for
/// every reported metric).
double round2(double v);

/// round2 formatted as a fixed two-decimal string, e.g. "0.17", "-0.29".
std::string format2(double v);

/// Reads a whole file; throws debate::Error when the file cannot be opened.
std::string read_file(const std::string& path);

/// Writes a whole file, creating parent directories as needed.
void write_file(const std::string& path, std::string_view content);

/// Lines of a file with '#' comments and blank lines stripped, trimmed.
std::vector<std::string> read_phrase_file(const std::string& path);

}  // namespace debate
