#ifndef COA_LLM_BACKEND_HPP
#define COA_LLM_BACKEND_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coa/action_lang.hpp"
#include "coa/coa_core.hpp"
#include "coa/scene_text.hpp"
#include "coa/world.hpp"

namespace coa {

struct PromptBundle {
    std::string system;  // action library contract + output format rules
    std::string user;    // instruction + scene + prior chain + failure feedback
    int budget = 1024;   // response token budget
};

struct BackendResponse {
    std::string raw;
    std::optional<Plan> extracted_plan;
    std::vector<Diagnostic> diagnostics;  // set when extraction failed
    // (tag, text) for the affordance / spatial / body sections, in order.
    std::vector<std::pair<std::string, std::string>> reasoning_sections;
};

struct EndpointConfig {
    std::string url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "local-model";
    std::string api_key_env = "COA_API_KEY";
    double temperature = 0.0;
    int max_parse_repairs = 2;
    int network_attempts = 3;
    double backoff_base_s = 1.0;
};

struct ChatMessage {
    std::string role;  // system / user / assistant
    std::string content;
};

// Wire-level seam so tests never need a live endpoint.
class Transport {
  public:
    virtual ~Transport() = default;
    // Returns the assistant message content; throws NetworkError on failure.
    virtual std::string chat(const std::vector<ChatMessage>& messages,
                             const EndpointConfig& cfg) = 0;
};

// POSTs the widely used messages/choices JSON to cfg.url + cfg.path.
class HttpTransport : public Transport {
  public:
    std::string chat(const std::vector<ChatMessage>& messages, const EndpointConfig& cfg) override;
};

// Panics on use; injected in replay mode to prove zero network I/O.
class ThrowingTransport : public Transport {
  public:
    std::string chat(const std::vector<ChatMessage>&, const EndpointConfig&) override;
};

// Canned responses, popped in order; for tests and cache recording.
class ScriptedTransport : public Transport {
  public:
    explicit ScriptedTransport(std::vector<std::string> responses);
    std::string chat(const std::vector<ChatMessage>&, const EndpointConfig&) override;
    int calls() const { return calls_; }

  private:
    std::deque<std::string> responses_;
    int calls_ = 0;
};

enum class CacheMode { Record, Replay, Live };

// Append-only JSON-lines store of {hash, prompt_digest, response}.
class ReplayCache {
  public:
    ReplayCache() = default;
    explicit ReplayCache(CacheMode mode) : mode_(mode) {}
    static ReplayCache load(const std::string& path, CacheMode mode);

    CacheMode mode() const { return mode_; }
    std::optional<std::string> lookup(std::uint64_t key) const;
    void store(std::uint64_t key, const std::string& digest, const std::string& response);
    void save(const std::string& path) const;
    std::size_t size() const { return entries_.size(); }

  private:
    CacheMode mode_ = CacheMode::Replay;
    std::map<std::uint64_t, std::string> entries_;
    std::vector<std::pair<std::uint64_t, std::pair<std::string, std::string>>> order_;
};

// FNV-1a over the serialized message transcript; stable across runs.
std::uint64_t stable_hash(const std::vector<ChatMessage>& messages);
std::uint64_t stable_hash(const PromptBundle& bundle);

PromptBundle build_prompt(const std::string& instruction, const SceneDescription& scene,
                          const ChainResult* prior, const StepOutcome* feedback);

// Runs the prompt through the cache/transport, extracts the last fenced
// block, parses it, and drives the repair loop (quoting diagnostics back)
// up to cfg.max_parse_repairs times. Throws ParseFailedAfterRepair,
// NetworkError, CacheMiss.
BackendResponse complete(const PromptBundle& bundle, ReplayCache& cache, Transport& transport,
                         const EndpointConfig& cfg);

}  // namespace coa

#endif
