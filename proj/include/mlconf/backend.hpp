#pragma once

// LLM access: request/response types, the mock and HTTP transports, the
// on-disk response cache and the Backend facade that ties them together.

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mlconf/json_io.hpp"
#include "mlconf/types.hpp"

namespace mlconf::backend {

inline constexpr double kDefaultTemperature = 0.8;
inline constexpr int kDefaultMaxTokens = 64;
inline constexpr double kMinProbability = 1e-300;

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Message {
    Role role = Role::User;
    std::string text;

    friend bool operator==(const Message&, const Message&) = default;
};

struct GenerationRequest {
    std::vector<Message> prompt_messages;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    bool want_token_probs = false;
    int top_alternatives = 0;
};

// Throws InvalidArgument on an empty prompt, a trailing non-user message or
// out-of-range numeric fields.
void validate_request(const GenerationRequest& request);

// Canonical JSON of the request fields that determine a response.
json canonical_request(const std::string& model_id, const GenerationRequest& request);

// Hash of the exact request, excluding the sample index.
std::string request_fingerprint(const std::string& model_id, const GenerationRequest& request);

// Cache key: the fingerprint fields plus sample_index.
std::string cache_digest(const std::string& model_id, const GenerationRequest& request,
                         int sample_index);

// All message texts joined with newlines; what mock rules match against.
std::string prompt_text(const GenerationRequest& request);

// Wire value to linear probability, clamped to [kMinProbability, 1].
double prob_from_logprob(double logprob);

struct ScriptedResponse {
    std::string text;
    std::vector<std::string> tokens;  // optional explicit token split
    std::vector<double> probs;
    std::vector<std::vector<TokenAlternative>> alternatives;  // per token position
};

void to_json(json& j, const ScriptedResponse& r);
void from_json(const json& j, ScriptedResponse& r);

// Deterministic response source for offline runs. Lookup order: explicit
// responder, exact fingerprint entries, substring rules (first match),
// default. Per-key response lists are indexed by sample_index; indices past
// the end reuse the last entry.
class MockScript {
public:
    using Responder =
        std::function<std::optional<ScriptedResponse>(const GenerationRequest&, int sample_index)>;

    struct Rule {
        std::vector<std::string> contains;
        std::vector<ScriptedResponse> responses;
    };

    MockScript& on_fingerprint(std::string fingerprint, std::vector<ScriptedResponse> responses);
    MockScript& on_contains(std::vector<std::string> needles, std::vector<ScriptedResponse> responses);
    MockScript& with_default(ScriptedResponse response);
    MockScript& with_responder(Responder responder);
    MockScript& without_token_probs();

    std::optional<ScriptedResponse> lookup(const std::string& fingerprint,
                                           const GenerationRequest& request,
                                           int sample_index) const;
    bool supports_token_probs() const noexcept { return supports_token_probs_; }

    static MockScript from_json(const json& j);
    static MockScript load(const std::filesystem::path& path);
    json to_json() const;  // responder is not serializable and is dropped

private:
    std::map<std::string, std::vector<ScriptedResponse>> by_fingerprint_;
    std::vector<Rule> rules_;
    std::optional<ScriptedResponse> default_;
    Responder responder_;
    bool supports_token_probs_ = true;
};

enum class BackendKind { HttpApi, Mock };

struct BackendDescriptor {
    BackendKind kind = BackendKind::Mock;
    std::string model_id;
    std::optional<std::string> endpoint;  // HttpApi only
    std::optional<std::string> auth_env;  // environment variable holding the API key
    std::shared_ptr<const MockScript> script;  // Mock only
};

void validate_descriptor(const BackendDescriptor& d);

BackendDescriptor mock_backend(MockScript script, std::string model_id = "mock");
BackendDescriptor http_backend(std::string model_id, std::string endpoint, std::string auth_env);

// Content-addressed store: one JSON file per cache digest.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<Generation> lookup(const std::string& digest) const;
    void store(const std::string& digest, const std::string& model_id, int sample_index,
               const json& request, const Generation& gen);
    // Removes entries, optionally only those for one model; returns the count.
    std::size_t purge(const std::optional<std::string>& model_id);
    std::size_t size() const;
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& digest) const;
    std::mutex& lock_for(const std::string& digest) const;

    std::filesystem::path dir_;
    mutable std::array<std::mutex, 32> stripes_;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{250};
    std::chrono::milliseconds max_delay{8000};
};

struct BackendOptions {
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> audit_path;
    std::size_t max_in_flight = 8;
    RetryPolicy retry;
    std::chrono::seconds http_timeout{60};
};

struct GenerateResult {
    Generation generation;
    bool from_cache = false;
    std::string digest;
};

class Transport {
public:
    virtual ~Transport() = default;
    // One attempt; throws TransportError (retryable), ApiRefusal,
    // ProbsUnavailable or ScriptMiss.
    virtual Generation complete(const GenerationRequest& request, int sample_index) = 0;
};

std::unique_ptr<Transport> make_mock_transport(BackendDescriptor descriptor);
std::unique_ptr<Transport> make_http_transport(BackendDescriptor descriptor,
                                               std::chrono::seconds timeout);

// Request body in the OpenAI-compatible chat-completions shape.
json wire_request(const std::string& model_id, const GenerationRequest& request, int sample_index);
// Parses a chat-completions response body into a Generation.
Generation parse_wire_response(const json& body, const std::string& model_id,
                               const GenerationRequest& request);

// Thread-safe facade: cache lookup, bounded in-flight requests, retry with
// exponential backoff on TransportError, cache write, audit log.
class Backend {
public:
    explicit Backend(BackendDescriptor descriptor, BackendOptions options = {});
    Backend(BackendDescriptor descriptor, BackendOptions options, std::unique_ptr<Transport> transport);
    ~Backend();
    Backend(const Backend&) = delete;
    Backend& operator=(const Backend&) = delete;

    GenerateResult generate(const GenerationRequest& request, int sample_index) const;

    const BackendDescriptor& descriptor() const noexcept { return descriptor_; }
    const std::string& model_id() const noexcept { return descriptor_.model_id; }
    ResponseCache* cache() const noexcept { return cache_.get(); }
    std::size_t purge_cache(const std::optional<std::string>& model_id) const;
    // Number of transport calls made (cache misses, counting retries).
    std::size_t transport_calls() const noexcept;

private:
    class Gate;
    class AuditLog;

    BackendDescriptor descriptor_;
    BackendOptions options_;
    std::unique_ptr<Transport> transport_;
    std::unique_ptr<ResponseCache> cache_;
    std::shared_ptr<AuditLog> audit_;
    std::unique_ptr<Gate> gate_;
    mutable std::atomic<std::size_t> transport_calls_{0};
};

// Free-function form of Backend::generate.
inline GenerateResult generate(const Backend& backend, const GenerationRequest& request,
                               int sample_index) {
    return backend.generate(request, sample_index);
}

}  // namespace mlconf::backend
