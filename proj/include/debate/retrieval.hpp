#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace debate {

/// A fixed-window slice of a source corpus.
struct Chunk {
    std::string chunk_id;   // "<corpus_id>#NNNN", lexicographic == positional
    std::string corpus_id;
    std::string text;
    std::size_t token_estimate = 0;  // whitespace word count of text
    std::size_t position = 0;        // ordinal within source, from 0
};

struct ChunkingParams {
    std::size_t window_words = 200;
    std::size_t overlap_words = 40;
    std::size_t min_tail_words = 20;  // floor for a trailing remainder chunk
};

/// Splits UTF-8 plain text into overlapping word windows. The window at
/// start s covers [s, s+window); starts advance by window-overlap; the
/// first window that reaches the end of the text is the last one. A final
/// chunk shorter than min_tail_words is dropped unless it is the only one.
std::vector<Chunk> chunk_text(const std::string& text, const std::string& corpus_id,
                              const ChunkingParams& params = {});

/// Reads, validates (UTF-8, non-empty) and chunks one corpus file.
std::vector<Chunk> ingest(const std::string& path, const std::string& corpus_id,
                          const ChunkingParams& params = {});

struct ScoredChunk {
    const Chunk* chunk = nullptr;
    double score = 0.0;
};

/// Deterministic lexical index over one or more corpora.
///
/// Scoring contract (the brute-force oracle in the tests mirrors the same
/// arithmetic over raw chunks, with its own counting):
///   - tokens: maximal [a-z0-9]+ runs after ASCII lowercasing
///   - statistics (N, df, avgdl) are local to the queried scope
///   - idf(t)  = ln(1 + (N - df + 0.5) / (df + 0.5))
///   - w(t, d) = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len/avgdl))
///   - score(d) = sum of w(t, d) over the *sorted, de-duplicated* query
///     tokens, accumulated in that order
///   - ranking: score descending, ties by chunk_id ascending; chunks with
///     zero score are not returned
class RetrievalIndex {
public:
    static constexpr double kDefaultK1 = 1.2;
    static constexpr double kDefaultB = 0.75;

    RetrievalIndex() = default;
    explicit RetrievalIndex(double k1, double b) : k1_(k1), b_(b) {}

    /// Adds a fully chunked corpus. Single-writer; call before any retrieve.
    void add_corpus(const std::string& corpus_id, std::vector<Chunk> chunks);

    bool has_corpus(const std::string& corpus_id) const;
    std::vector<std::string> corpus_ids() const;
    std::size_t chunk_count() const;
    const Chunk* find_chunk(const std::string& chunk_id) const;

    /// Top-k chunks for the query, restricted to `scope`. Throws IngestError
    /// for an unknown corpus_id in scope. Fewer than k results are returned
    /// when the scope is small or few chunks match.
    std::vector<ScoredChunk> retrieve(const std::string& query, std::size_t k,
                                      const std::set<std::string>& scope) const;

private:
    struct Posting {
        std::size_t chunk_ordinal;
        std::size_t tf;
    };
    struct CorpusData {
        std::vector<Chunk> chunks;
        std::vector<std::size_t> lengths;  // token counts, parallel to chunks
        std::map<std::string, std::vector<Posting>> postings;
        std::size_t total_tokens = 0;
    };

    double k1_ = kDefaultK1;
    double b_ = kDefaultB;
    std::map<std::string, CorpusData> corpora_;
};

/// Builds chunk ids: corpus id plus zero-padded position.
std::string make_chunk_id(const std::string& corpus_id, std::size_t position);

/// One corpus listed in a manifest file.
struct ManifestEntry {
    std::string corpus_id;
    std::string path;  // resolved against the manifest location at load
    std::vector<std::string> owner_agent_ids;
};

/// Loads a corpus manifest (JSON: {"corpora": [{corpus_id, path,
/// owner_agent_ids}]}). Relative paths resolve against the manifest dir.
std::vector<ManifestEntry> load_manifest(const std::string& path);

/// Ingests every manifest entry into a fresh index.
RetrievalIndex build_index(const std::vector<ManifestEntry>& manifest,
                           const ChunkingParams& params = {});

/// Result of cache-aware ingestion: per-corpus hit/miss plus the cache path.
struct IngestReport {
    struct Entry {
        std::string corpus_id;
        std::size_t chunk_count;
        bool cache_hit;
    };
    std::vector<Entry> entries;
    std::string cache_path;
};

/// Ingests the manifest into a JSON cache file keyed by source content
/// hash. Unchanged corpora are reported as cache hits and not re-chunked.
IngestReport ingest_to_cache(const std::vector<ManifestEntry>& manifest,
                             const std::string& cache_path,
                             const ChunkingParams& params = {});

/// Loads an index from a cache file, re-ingesting entries whose source
/// hash no longer matches.
RetrievalIndex load_index(const std::vector<ManifestEntry>& manifest,
                          const std::string& cache_path,
                          const ChunkingParams& params = {});

/// Lowercases, tokenizes and stopword-filters the retrieval query for a
/// debate turn: dilemma statement plus the opponent's last turn text.
std::string build_turn_query(const std::string& dilemma,
                             const std::string& opponent_last_turn,
                             const std::vector<std::string>& stopwords);

}  // namespace debate
