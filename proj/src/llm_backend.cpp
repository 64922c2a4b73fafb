#include "coa/llm_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "coa/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace coa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Hashing

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::uint64_t stable_hash(const std::vector<ChatMessage>& messages) {
    std::uint64_t h = kFnvOffset;
    for (const auto& m : messages) {
        h = fnv1a(h, m.role);
        h = fnv1a(h, "\x1f");
        h = fnv1a(h, m.content);
        h = fnv1a(h, "\x1e");
    }
    return h;
}

std::uint64_t stable_hash(const PromptBundle& bundle) {
    return stable_hash({{"system", bundle.system}, {"user", bundle.user}});
}

// ---------------------------------------------------------------------------
// Transports

std::string HttpTransport::chat(const std::vector<ChatMessage>& messages, const EndpointConfig& cfg) {
    json body;
    body["model"] = cfg.model;
    body["temperature"] = cfg.temperature;
    body["messages"] = json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    httplib::Client client(cfg.url);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);
    auto res = client.Post(cfg.path, headers, body.dump(), "application/json");
    if (!res) throw NetworkError("endpoint unreachable: " + cfg.url);
    if (res->status != 200)
        throw NetworkError("endpoint returned status " + std::to_string(res->status));
    try {
        json j = json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw NetworkError(std::string("malformed completion response: ") + e.what());
    }
}

std::string ThrowingTransport::chat(const std::vector<ChatMessage>&, const EndpointConfig&) {
    throw std::logic_error("network transport used in replay mode");
}

ScriptedTransport::ScriptedTransport(std::vector<std::string> responses)
    : responses_(responses.begin(), responses.end()) {}

std::string ScriptedTransport::chat(const std::vector<ChatMessage>&, const EndpointConfig&) {
    ++calls_;
    if (responses_.empty()) throw NetworkError("scripted transport exhausted");
    std::string r = responses_.front();
    responses_.pop_front();
    return r;
}

// ---------------------------------------------------------------------------
// ReplayCache

ReplayCache ReplayCache::load(const std::string& path, CacheMode mode) {
    ReplayCache c(mode);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay cache: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        std::uint64_t key = std::stoull(j.at("hash").get<std::string>(), nullptr, 16);
        c.entries_[key] = j.at("response").get<std::string>();
        c.order_.emplace_back(key, std::make_pair(j.at("prompt_digest").get<std::string>(),
                                                  j.at("response").get<std::string>()));
    }
    return c;
}

std::optional<std::string> ReplayCache::lookup(std::uint64_t key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ReplayCache::store(std::uint64_t key, const std::string& digest, const std::string& response) {
    entries_[key] = response;
    order_.emplace_back(key, std::make_pair(digest, response));
}

void ReplayCache::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write replay cache: " + path);
    for (const auto& [key, rest] : order_) {
        json j;
        j["hash"] = hex64(key);
        j["prompt_digest"] = rest.first;
        j["response"] = rest.second;
        out << j.dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Prompt assembly

namespace {

const char* kSignatures[] = {
    "FIND(object_or_region)", "MOVE(x, y)",      "ROTATE(rz)",      "STOP",
    "INCREASE_HEIGHT",        "DECREASE_HEIGHT", "HOLD(object)",    "RELEASE(object)",
    "GRASP(object, hand)",    "LIFT(object)",    "RAISE(object)",   "REARRANGE(object)",
    "PUT(object, region)",
};

}  // namespace

PromptBundle build_prompt(const std::string& instruction, const SceneDescription& scene,
                          const ChainResult* prior, const StepOutcome* feedback) {
    PromptBundle b;
    std::string sys =
        "You control a humanoid household robot. Plans are composed only from these 13 "
        "primitive skills:\n";
    for (const char* s : kSignatures) sys += std::string("- ") + s + "\n";
    sys +=
        "hand is one of left, right, both. MOVE arguments are meters in the robot frame; "
        "ROTATE is radians.\n"
        "Respond with three labeled reasoning sections, in this order:\n"
        "Affordance: which actions each visible object affords.\n"
        "Spatial: which region the target is most likely in.\n"
        "Body: which joints each planned action relies on.\n"
        "Then output the plan as one action per line inside a single fenced code block.";
    b.system = std::move(sys);

    std::string user = "Instruction: " + instruction + "\n";
    user += "Scene: " + scene.text + "\n";
    if (prior) {
        user += "Previously planned actions:\n";
        user += format_plan(prior->plan);
    }
    if (feedback) {
        user += "The last action " + format_action(feedback->action) +
                " failed: " + step_error_name(feedback->error);
        if (!feedback->reason.empty()) user += " (" + feedback->reason + ")";
        user += ". Produce a corrected plan.\n";
    }
    b.user = std::move(user);
    return b;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

// Content of the last complete fenced code block, stripped of the info tag.
std::optional<std::string> last_fenced_block(const std::string& raw) {
    std::vector<size_t> fences;
    size_t pos = 0;
    while ((pos = raw.find("```", pos)) != std::string::npos) {
        fences.push_back(pos);
        pos += 3;
    }
    if (fences.size() < 2) return std::nullopt;
    size_t open = fences[fences.size() - 2];
    size_t close = fences[fences.size() - 1];
    size_t start = raw.find('\n', open);
    if (start == std::string::npos || start >= close) start = open + 3;
    else ++start;
    return raw.substr(start, close - start);
}

std::vector<std::pair<std::string, std::string>> extract_sections(const std::string& raw) {
    struct Tag {
        const char* label;
        const char* tag;
    };
    static const Tag tags[] = {
        {"Affordance:", "affordance"}, {"Spatial:", "spatial"}, {"Body:", "body"}};
    std::vector<std::pair<size_t, const Tag*>> found;
    for (const auto& t : tags) {
        size_t p = raw.find(t.label);
        if (p != std::string::npos) found.emplace_back(p, &t);
    }
    std::sort(found.begin(), found.end());
    std::vector<std::pair<std::string, std::string>> out;
    for (size_t i = 0; i < found.size(); ++i) {
        size_t begin = found[i].first + std::string(found[i].second->label).size();
        size_t end = i + 1 < found.size() ? found[i + 1].first : raw.find("```");
        if (end == std::string::npos || end < begin) end = raw.size();
        std::string text = raw.substr(begin, end - begin);
        while (!text.empty() && (text.front() == ' ' || text.front() == '\n')) text.erase(0, 1);
        while (!text.empty() && (text.back() == ' ' || text.back() == '\n')) text.pop_back();
        out.emplace_back(found[i].second->tag, text);
    }
    return out;
}

std::string fetch(const std::vector<ChatMessage>& messages, ReplayCache& cache, Transport& transport,
                  const EndpointConfig& cfg) {
    std::uint64_t key = stable_hash(messages);
    if (cache.mode() == CacheMode::Replay) {
        auto hit = cache.lookup(key);
        if (!hit) throw CacheMiss("no cached response for prompt hash " + hex64(key));
        return *hit;
    }
    std::string err;
    for (int attempt = 0; attempt < cfg.network_attempts; ++attempt) {
        if (attempt > 0 && cfg.backoff_base_s > 0.0) {
            auto delay = std::chrono::duration<double>(cfg.backoff_base_s * (1 << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
        try {
            std::string raw = transport.chat(messages, cfg);
            if (cache.mode() == CacheMode::Record)
                cache.store(key, hex64(fnv1a(kFnvOffset, messages.back().content)), raw);
            return raw;
        } catch (const NetworkError& e) {
            err = e.what();
        }
    }
    throw NetworkError("endpoint failed after " + std::to_string(cfg.network_attempts) +
                       " attempts: " + err);
}

}  // namespace

BackendResponse complete(const PromptBundle& bundle, ReplayCache& cache, Transport& transport,
                         const EndpointConfig& cfg) {
    std::vector<ChatMessage> messages{{"system", bundle.system}, {"user", bundle.user}};
    std::vector<Diagnostic> last_diags;
    for (int round = 0; round <= cfg.max_parse_repairs; ++round) {
        std::string raw = fetch(messages, cache, transport, cfg);
        BackendResponse resp;
        resp.raw = raw;
        resp.reasoning_sections = extract_sections(raw);

        auto block = last_fenced_block(raw);
        std::string plan_text = block ? *block : std::string();
        ParseResult parsed = parse_plan(plan_text);
        if (!block) {
            parsed.plan.reset();
            parsed.diagnostics = {{0, DiagnosticCode::EmptyPlan, "no fenced code block in response"}};
        }
        if (parsed.ok()) {
            resp.extracted_plan = std::move(parsed.plan);
            return resp;
        }
        last_diags = parsed.diagnostics;
        if (round == cfg.max_parse_repairs) break;

        std::string repair = "Your plan could not be parsed:\n";
        for (const auto& d : last_diags)
            repair += "- line " + std::to_string(d.line) + ": " + diagnostic_code_name(d.code) +
                      ": " + d.message + "\n";
        repair += "Re-emit the full corrected plan in a single fenced code block.";
        messages.push_back({"assistant", raw});
        messages.push_back({"user", repair});
    }
    std::string detail;
    for (const auto& d : last_diags) detail += (detail.empty() ? "" : "; ") + d.message;
    throw ParseFailedAfterRepair("plan still malformed after " +
                                 std::to_string(cfg.max_parse_repairs) + " repair rounds: " + detail);
}

}  // namespace coa
