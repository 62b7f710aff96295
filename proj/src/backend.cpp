#include "debate/backend.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <json.hpp>

#include <httplib.h>

#include "debate/errors.hpp"
#include "debate/text_util.hpp"

namespace debate {

namespace {

std::uint64_t steady_ms() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
}

}  // namespace

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError(path + ": no such script file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw ConfigError(path + ": script must be a JSON array");
    std::vector<Entry> script;
    for (const auto& je : j) {
        Entry e;
        if (je.is_string()) {
            e.text = je.get<std::string>();
        } else {
            e.match = je.value("match", std::string{});
            e.text = je.at("text").get<std::string>();
        }
        script.push_back(std::move(e));
    }
    return ScriptedBackend(std::move(script));
}

GenerationResult ScriptedBackend::generate(const GenerationRequest& request) {
    if (cursor_ >= script_.size())
        throw ScriptUnderrunError("scripted backend exhausted after " +
                                  std::to_string(script_.size()) + " entries");

    std::size_t chosen = cursor_;
    bool found = false;
    for (std::size_t i = cursor_; i < script_.size(); ++i) {
        const Entry& e = script_[i];
        if (e.match.empty() ||
            request.instruction.find(e.match) != std::string::npos) {
            chosen = i;
            found = true;
            break;
        }
    }
    if (!found) chosen = cursor_;  // no key matches: fall back to sequential

    GenerationResult result;
    result.text = script_[chosen].text;
    result.backend_id = id();
    result.latency_ms = 0;
    result.truncated = false;
    cursor_ = chosen + 1;
    return result;
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw ConfigError("remote backend requires an endpoint");
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            api_key_ = key;
    }
}

std::string RemoteBackend::id() const {
    return config_.model.empty() ? "remote" : "remote:" + config_.model;
}

// Enforces the requests-per-minute cap across all threads sharing this
// backend: claims a start slot under the lock, sleeps outside it.
void RemoteBackend::pace_requests() {
    if (config_.rpm_cap <= 0) return;
    const std::uint64_t min_gap_ms =
        static_cast<std::uint64_t>(60000.0 / config_.rpm_cap);
    std::uint64_t wait_ms = 0;
    {
        std::lock_guard<std::mutex> lock(pace_mutex_);
        const std::uint64_t now = steady_ms();
        const std::uint64_t earliest =
            last_request_ms_ == 0 ? now : last_request_ms_ + min_gap_ms;
        const std::uint64_t slot = std::max(now, earliest);
        wait_ms = slot - now;
        last_request_ms_ = slot;
    }
    if (wait_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
}

GenerationResult RemoteBackend::generate(const GenerationRequest& request) {
    // endpoint = scheme://host[:port]/path
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("remote endpoint must include a scheme: " + config_.endpoint);
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos
                                   ? config_.endpoint
                                   : config_.endpoint.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

    nlohmann::json body;
    if (!config_.model.empty()) body["model"] = config_.model;
    nlohmann::json messages = nlohmann::json::array();
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    std::string user;
    for (const LabeledTurn& t : request.context_window) {
        user += t.label + ": " + t.text + "\n";
    }
    user += request.instruction;
    messages.push_back({{"role", "user"}, {"content", user}});
    body["messages"] = messages;
    body["max_tokens"] = request.max_output_tokens;
    body["temperature"] = request.temperature;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace(config_.auth_header, config_.auth_prefix + api_key_);

    pace_requests();

    int last_status = 0;
    std::string last_error;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            const double delay_s =
                config_.backoff_base_s * static_cast<double>(1 << (attempt - 2));
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<int>(delay_s * 1000.0)));
        }
        httplib::Client client(origin);
        client.set_connection_timeout(std::chrono::milliseconds(
            static_cast<int>(config_.timeout_s * 1000.0)));
        client.set_read_timeout(std::chrono::milliseconds(
            static_cast<int>(config_.timeout_s * 1000.0)));

        const std::uint64_t started = steady_ms();
        httplib::Result res = client.Post(path, headers, payload, "application/json");
        const std::uint64_t elapsed = steady_ms() - started;

        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        last_status = res->status;
        const bool transient =
            res->status == 408 || res->status == 429 || res->status >= 500;
        if (transient) {
            last_error = "transient status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError("remote backend status " + std::to_string(res->status) +
                                   ": " + res->body.substr(0, 200),
                               res->status);
        }

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("remote backend returned invalid JSON: ") +
                               e.what());
        }
        GenerationResult out;
        try {
            const auto& choice = reply.at("choices").at(0);
            out.text = choice.at("message").at("content").get<std::string>();
            out.truncated = choice.value("finish_reason", "stop") == "length";
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("unexpected completion shape: ") + e.what());
        }
        if (out.text.empty()) throw BackendError("remote backend returned empty text");
        out.backend_id = id();
        out.latency_ms = elapsed;
        return out;
    }
    throw BackendError("remote backend failed after " +
                           std::to_string(config_.max_attempts) + " attempts: " +
                           last_error,
                       last_status);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.kind == "scripted") {
        if (config.script_path.empty())
            throw ConfigError("scripted backend requires script_path");
        return std::make_unique<ScriptedBackend>(
            ScriptedBackend::from_file(config.script_path));
    }
    if (config.kind == "remote") return std::make_unique<RemoteBackend>(config);
    throw ConfigError("unknown backend kind: " + config.kind);
}

GenerationRequest assemble_prompt(const IdentityGraph& identity,
                                  const WorkingMemory& wm,
                                  const std::vector<WeaknessEntry>& hints,
                                  const std::string& dilemma,
                                  const std::vector<Turn>& last_turns,
                                  std::size_t window) {
    if (window == 0) throw ConfigError("assemble_prompt: window must be >= 1");

    std::string sys;
    if (!identity.persona_summary.empty()) {
        sys += identity.persona_summary;
        sys += "\n";
    }
    const auto core = identity.core_nodes();
    if (!core.empty()) {
        sys += "\nCore commitments you hold with full certainty:\n";
        for (const BeliefNode* n : core) {
            sys += "- " + n->statement + "\n";
        }
    }
    if (!identity.constraints.empty()) {
        sys += "\nDoctrinal boundaries. You must never argue from, or concede to, any of these:\n";
        for (const NegativeConstraint& c : identity.constraints) {
            sys += "- " + c.label + "\n";
        }
    }
    bool grounding_header = false;
    for (const MemoryEntry& e : wm.entries) {
        if (e.source != MemorySource::RETRIEVED_FACT) continue;
        if (!grounding_header) {
            sys += "\nGrounding passages from your own corpus:\n";
            grounding_header = true;
        }
        sys += "- \"" + e.text + "\"";
        if (e.origin_ref) sys += " [" + *e.origin_ref + "]";
        sys += "\n";
    }
    if (!hints.empty()) {
        sys += "\nStrategy notes on your opponent:\n";
        for (const WeaknessEntry& h : hints) {
            sys += "- " + h.weakness_text + " Consider: " + h.counter_hint + "\n";
        }
    }

    GenerationRequest req;
    req.system_prompt = sys;
    const std::size_t take = std::min(window, last_turns.size());
    for (std::size_t i = last_turns.size() - take; i < last_turns.size(); ++i) {
        req.context_window.push_back(LabeledTurn{last_turns[i].speaker, last_turns[i].text});
    }
    req.instruction = "The dilemma under debate: " + dilemma +
                      "\nSpeak next as " + identity.agent_id +
                      ". Advance your position in a few sentences.";
    return req;
}

}  // namespace debate
