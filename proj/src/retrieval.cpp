#include "debate/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unordered_set>

#include <json.hpp>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

std::string make_chunk_id(const std::string& corpus_id, std::size_t position) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", position);
    return corpus_id + "#" + buf;
}

std::vector<Chunk> chunk_text(const std::string& text, const std::string& corpus_id,
                              const ChunkingParams& params) {
    if (params.window_words == 0 || params.overlap_words >= params.window_words)
        throw ConfigError("chunking: window must exceed overlap");

    const std::vector<std::string> words = split_words(text);
    if (words.empty()) throw IngestError(corpus_id + ": no words to chunk");

    const std::size_t stride = params.window_words - params.overlap_words;
    std::vector<Chunk> chunks;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = std::min(start + params.window_words, words.size());
        std::string body;
        for (std::size_t i = start; i < end; ++i) {
            if (i > start) body.push_back(' ');
            body += words[i];
        }
        Chunk c;
        c.corpus_id = corpus_id;
        c.position = chunks.size();
        c.chunk_id = make_chunk_id(corpus_id, c.position);
        c.token_estimate = end - start;
        c.text = std::move(body);
        chunks.push_back(std::move(c));
        if (end >= words.size()) break;
        start += stride;
    }

    // The trailing-remainder floor applies only when earlier chunks exist;
    // a sole short document still yields its one chunk.
    if (chunks.size() > 1 && chunks.back().token_estimate < params.min_tail_words)
        chunks.pop_back();
    return chunks;
}

std::vector<Chunk> ingest(const std::string& path, const std::string& corpus_id,
                          const ChunkingParams& params) {
    const std::string raw = read_file(path);
    if (raw.empty()) throw IngestError(path + ": empty corpus file");
    if (auto bad = utf8_invalid_at(raw)) {
        throw IngestError(path + ": invalid UTF-8 at byte offset " +
                          std::to_string(*bad));
    }
    if (word_count(raw) == 0) throw IngestError(path + ": corpus has no words");
    return chunk_text(raw, corpus_id, params);
}

void RetrievalIndex::add_corpus(const std::string& corpus_id,
                                std::vector<Chunk> chunks) {
    CorpusData data;
    data.chunks = std::move(chunks);
    data.lengths.reserve(data.chunks.size());
    for (std::size_t ord = 0; ord < data.chunks.size(); ++ord) {
        const auto tokens = tokenize(data.chunks[ord].text);
        data.lengths.push_back(tokens.size());
        data.total_tokens += tokens.size();
        std::map<std::string, std::size_t> tf;
        for (const std::string& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            data.postings[term].push_back(Posting{ord, count});
        }
    }
    corpora_[corpus_id] = std::move(data);
}

bool RetrievalIndex::has_corpus(const std::string& corpus_id) const {
    return corpora_.count(corpus_id) > 0;
}

std::vector<std::string> RetrievalIndex::corpus_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, _] : corpora_) ids.push_back(id);
    return ids;
}

std::size_t RetrievalIndex::chunk_count() const {
    std::size_t n = 0;
    for (const auto& [_, data] : corpora_) n += data.chunks.size();
    return n;
}

const Chunk* RetrievalIndex::find_chunk(const std::string& chunk_id) const {
    const auto hash = chunk_id.find('#');
    if (hash == std::string::npos) return nullptr;
    const auto it = corpora_.find(chunk_id.substr(0, hash));
    if (it == corpora_.end()) return nullptr;
    for (const Chunk& c : it->second.chunks) {
        if (c.chunk_id == chunk_id) return &c;
    }
    return nullptr;
}

std::vector<ScoredChunk> RetrievalIndex::retrieve(
    const std::string& query, std::size_t k,
    const std::set<std::string>& scope) const {
    if (k == 0) throw ConfigError("retrieve: k must be >= 1");
    if (scope.empty()) throw ConfigError("retrieve: scope must be non-empty");

    std::vector<const CorpusData*> scoped;
    for (const std::string& id : scope) {
        const auto it = corpora_.find(id);
        if (it == corpora_.end())
            throw IngestError("retrieve: unknown corpus_id in scope: " + id);
        scoped.push_back(&it->second);
    }

    std::size_t n_docs = 0;
    std::size_t total_tokens = 0;
    for (const CorpusData* c : scoped) {
        n_docs += c->chunks.size();
        total_tokens += c->total_tokens;
    }
    if (n_docs == 0) return {};
    const double avgdl = static_cast<double>(total_tokens) / static_cast<double>(n_docs);

    std::vector<std::string> terms = tokenize(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    // Per-term scope df first, then per-chunk accumulation in sorted term
    // order; the oracle adds contributions in the same order.
    struct Candidate {
        const Chunk* chunk;
        double score;
    };
    std::map<const Chunk*, double> scores;
    for (const std::string& term : terms) {
        std::size_t df = 0;
        for (const CorpusData* c : scoped) {
            const auto it = c->postings.find(term);
            if (it != c->postings.end()) df += it->second.size();
        }
        if (df == 0) continue;
        const double idf =
            std::log(1.0 + (static_cast<double>(n_docs) - static_cast<double>(df) + 0.5) /
                               (static_cast<double>(df) + 0.5));
        for (const CorpusData* c : scoped) {
            const auto it = c->postings.find(term);
            if (it == c->postings.end()) continue;
            for (const Posting& p : it->second) {
                const double tf = static_cast<double>(p.tf);
                const double len = static_cast<double>(c->lengths[p.chunk_ordinal]);
                const double w = idf * (tf * (k1_ + 1.0)) /
                                 (tf + k1_ * (1.0 - b_ + b_ * len / avgdl));
                scores[&c->chunks[p.chunk_ordinal]] += w;
            }
        }
    }

    std::vector<Candidate> candidates;
    candidates.reserve(scores.size());
    for (const auto& [chunk, score] : scores) {
        if (score > 0.0) candidates.push_back(Candidate{chunk, score});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.chunk->chunk_id < b.chunk->chunk_id;
              });
    if (candidates.size() > k) candidates.resize(k);

    std::vector<ScoredChunk> out;
    out.reserve(candidates.size());
    for (const Candidate& c : candidates) out.push_back(ScoredChunk{c.chunk, c.score});
    return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError(path + ": no such manifest file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<ManifestEntry> entries;
    std::unordered_set<std::string> seen;
    try {
        for (const auto& jc : j.at("corpora")) {
            ManifestEntry e;
            e.corpus_id = jc.at("corpus_id").get<std::string>();
            if (!seen.insert(e.corpus_id).second)
                throw ConfigError(path + ": duplicate corpus_id '" + e.corpus_id + "'");
            std::filesystem::path p = jc.at("path").get<std::string>();
            e.path = p.is_absolute() ? p.string() : (base / p).lexically_normal().string();
            for (const auto& owner : jc.value("owner_agent_ids", nlohmann::json::array()))
                e.owner_agent_ids.push_back(owner.get<std::string>());
            entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": manifest schema violation: " + e.what());
    }
    if (entries.empty()) throw ConfigError(path + ": manifest lists no corpora");

    std::vector<std::string> missing;
    for (const ManifestEntry& e : entries) {
        if (!std::filesystem::exists(e.path)) missing.push_back(e.path);
    }
    if (!missing.empty()) {
        std::string msg = path + ": missing corpus files:";
        for (const std::string& m : missing) msg += " " + m;
        throw ConfigError(msg);
    }
    return entries;
}

RetrievalIndex build_index(const std::vector<ManifestEntry>& manifest,
                           const ChunkingParams& params) {
    RetrievalIndex index;
    for (const ManifestEntry& e : manifest) {
        index.add_corpus(e.corpus_id, ingest(e.path, e.corpus_id, params));
    }
    return index;
}

namespace {

nlohmann::json chunk_to_json(const Chunk& c) {
    nlohmann::json j;
    j["chunk_id"] = c.chunk_id;
    j["corpus_id"] = c.corpus_id;
    j["text"] = c.text;
    j["token_estimate"] = c.token_estimate;
    j["position"] = c.position;
    return j;
}

Chunk chunk_from_json(const nlohmann::json& j) {
    Chunk c;
    c.chunk_id = j.at("chunk_id").get<std::string>();
    c.corpus_id = j.at("corpus_id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.token_estimate = j.at("token_estimate").get<std::size_t>();
    c.position = j.at("position").get<std::size_t>();
    return c;
}

}  // namespace

IngestReport ingest_to_cache(const std::vector<ManifestEntry>& manifest,
                             const std::string& cache_path,
                             const ChunkingParams& params) {
    nlohmann::json cache;
    if (std::filesystem::exists(cache_path)) {
        try {
            cache = nlohmann::json::parse(read_file(cache_path));
        } catch (const nlohmann::json::exception&) {
            cache = nlohmann::json::object();  // corrupt cache: rebuild
        }
    }
    if (!cache.contains("corpora")) cache["corpora"] = nlohmann::json::object();
    cache["version"] = 1;

    IngestReport report;
    report.cache_path = cache_path;
    for (const ManifestEntry& e : manifest) {
        const std::string source = read_file(e.path);
        const std::string hash = fnv1a64_hex(source);
        auto& slot = cache["corpora"];
        bool hit = slot.contains(e.corpus_id) &&
                   slot[e.corpus_id].value("source_hash", "") == hash;
        std::size_t count;
        if (hit) {
            count = slot[e.corpus_id].at("chunks").size();
        } else {
            const auto chunks = ingest(e.path, e.corpus_id, params);
            nlohmann::json jc = nlohmann::json::array();
            for (const Chunk& c : chunks) jc.push_back(chunk_to_json(c));
            slot[e.corpus_id] = {{"source_hash", hash}, {"chunks", jc}};
            count = chunks.size();
        }
        report.entries.push_back(IngestReport::Entry{e.corpus_id, count, hit});
    }
    write_file(cache_path, cache.dump(2) + "\n");
    return report;
}

RetrievalIndex load_index(const std::vector<ManifestEntry>& manifest,
                          const std::string& cache_path,
                          const ChunkingParams& params) {
    nlohmann::json cache;
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        try {
            cache = nlohmann::json::parse(read_file(cache_path));
        } catch (const nlohmann::json::exception&) {
            cache = nlohmann::json::object();
        }
    }
    RetrievalIndex index;
    for (const ManifestEntry& e : manifest) {
        const std::string source = read_file(e.path);
        const std::string hash = fnv1a64_hex(source);
        bool hit = cache.contains("corpora") &&
                   cache["corpora"].contains(e.corpus_id) &&
                   cache["corpora"][e.corpus_id].value("source_hash", "") == hash;
        if (hit) {
            std::vector<Chunk> chunks;
            for (const auto& jc : cache["corpora"][e.corpus_id].at("chunks"))
                chunks.push_back(chunk_from_json(jc));
            index.add_corpus(e.corpus_id, std::move(chunks));
        } else {
            index.add_corpus(e.corpus_id, ingest(e.path, e.corpus_id, params));
        }
    }
    return index;
}

std::string build_turn_query(const std::string& dilemma,
                             const std::string& opponent_last_turn,
                             const std::vector<std::string>& stopwords) {
    std::unordered_set<std::string> stop(stopwords.begin(), stopwords.end());
    std::string combined = dilemma;
    combined.push_back(' ');
    combined += opponent_last_turn;
    std::string query;
    for (const std::string& token : tokenize(combined)) {
        if (stop.count(token)) continue;
        if (!query.empty()) query.push_back(' ');
        query += token;
    }
    return query;
}

}  // namespace debate
