#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "debate/identity.hpp"
#include "debate/tom.hpp"
#include "debate/transcript.hpp"

namespace debate {

/// One labeled prior turn handed to the generator as context.
struct LabeledTurn {
    std::string label;  // speaker id or MODERATOR
    std::string text;
};

/// Backend-agnostic generation request. Deterministic function of its
/// inputs; any provider adapter maps it onto a concrete wire format.
struct GenerationRequest {
    std::string system_prompt;
    std::vector<LabeledTurn> context_window;  // chronological
    std::string instruction;
    int max_output_tokens = 512;
    double temperature = 0.2;
};

struct GenerationResult {
    std::string text;
    std::string backend_id;
    std::uint64_t latency_ms = 0;
    bool truncated = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// Deterministic replay backend. Entries are consumed in order; an entry
/// whose match key occurs in the request instruction can be pulled forward
/// past non-matching entries. An empty match key matches anything.
/// Replaying the same request sequence yields the same response sequence.
class ScriptedBackend : public Backend {
public:
    struct Entry {
        std::string match;  // substring of the instruction; "" matches all
        std::string text;
    };

    explicit ScriptedBackend(std::vector<Entry> script)
        : script_(std::move(script)) {}

    /// Loads a script file: JSON array of {"match": "...", "text": "..."}
    /// ("match" optional) or bare strings.
    static ScriptedBackend from_file(const std::string& path);

    GenerationResult generate(const GenerationRequest& request) override;
    std::string id() const override { return "scripted"; }

    std::size_t cursor() const { return cursor_; }
    std::size_t size() const { return script_.size(); }

private:
    std::vector<Entry> script_;
    std::size_t cursor_ = 0;
};

/// Configuration for any backend kind; unused fields are ignored.
struct BackendConfig {
    std::string kind = "scripted";  // "scripted" | "remote"
    std::string script_path;
    std::string endpoint;  // e.g. https://host/v1/chat/completions
    std::string model;
    double timeout_s = 60.0;
    int rpm_cap = 0;  // 0 = unlimited
    std::string api_key_env;
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    int max_attempts = 3;
    double backoff_base_s = 1.0;
};

/// Chat-completion HTTP client with bounded retries and exponential
/// backoff on transient failures (connect errors, 408/429/5xx) and an
/// optional requests-per-minute cap. Safe for concurrent calls.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(BackendConfig config);
    GenerationResult generate(const GenerationRequest& request) override;
    std::string id() const override;

private:
    void pace_requests();

    BackendConfig config_;
    std::string api_key_;
    // Monotonic ms timestamp of the last request start, for rpm pacing.
    // Guarded by pace_mutex_ so concurrent callers share the budget.
    std::mutex pace_mutex_;
    std::uint64_t last_request_ms_ = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Fuses persona, identity core, surviving retrieved facts, and strategy
/// hints into a deterministic request. Section order is fixed:
/// persona, core beliefs, constraint prohibitions, grounding quotes,
/// strategy notes. context becomes the last `window` turns.
GenerationRequest assemble_prompt(const IdentityGraph& identity,
                                  const WorkingMemory& wm,
                                  const std::vector<WeaknessEntry>& hints,
                                  const std::string& dilemma,
                                  const std::vector<Turn>& last_turns,
                                  std::size_t window);

}  // namespace debate
