#include "mlconf/backend.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "mlconf/error.hpp"
#include "mlconf/text.hpp"
#include "mlconf/util.hpp"

namespace mlconf::backend {

namespace fs = std::filesystem;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

Role parse_role(std::string_view t) {
    if (t == "system") return Role::System;
    if (t == "user") return Role::User;
    if (t == "assistant") return Role::Assistant;
    throw InvalidArgument("unknown message role '" + std::string(t) + "'");
}

void validate_request(const GenerationRequest& request) {
    if (request.prompt_messages.empty()) throw InvalidArgument("request has no messages");
    if (request.prompt_messages.back().role != Role::User) {
        throw InvalidArgument("last request message must have role user");
    }
    if (!(request.temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
    if (request.max_tokens <= 0) throw InvalidArgument("max_tokens must be positive");
    if (request.top_alternatives < 0) throw InvalidArgument("top_alternatives must be >= 0");
}

json canonical_request(const std::string& model_id, const GenerationRequest& request) {
    json messages = json::array();
    for (const auto& m : request.prompt_messages) {
        messages.push_back(json{{"role", std::string(to_string(m.role))}, {"content", m.text}});
    }
    return json{{"model_id", model_id},
                {"messages", std::move(messages)},
                {"temperature", request.temperature},
                {"max_tokens", request.max_tokens},
                {"want_token_probs", request.want_token_probs},
                {"top_alternatives", request.top_alternatives}};
}

std::string request_fingerprint(const std::string& model_id, const GenerationRequest& request) {
    return sha256_hex(dump_line(canonical_request(model_id, request)));
}

std::string cache_digest(const std::string& model_id, const GenerationRequest& request,
                         int sample_index) {
    auto j = canonical_request(model_id, request);
    j["sample_index"] = sample_index;
    return sha256_hex(dump_line(j));
}

std::string prompt_text(const GenerationRequest& request) {
    std::string out;
    for (const auto& m : request.prompt_messages) {
        if (!out.empty()) out.push_back('\n');
        out += m.text;
    }
    return out;
}

double prob_from_logprob(double logprob) {
    const double p = std::exp(logprob);
    if (!(p >= kMinProbability)) return kMinProbability;
    return std::min(p, 1.0);
}

// ---------------------------------------------------------------------------
// Mock script

void to_json(json& j, const ScriptedResponse& r) {
    j = json{{"text", r.text}};
    if (!r.tokens.empty()) j["tokens"] = r.tokens;
    if (!r.probs.empty()) j["probs"] = r.probs;
    if (!r.alternatives.empty()) {
        json alts = json::array();
        for (const auto& pos : r.alternatives) {
            json row = json::array();
            for (const auto& a : pos) row.push_back(json{{"text", a.text}, {"prob", a.prob}});
            alts.push_back(std::move(row));
        }
        j["alternatives"] = std::move(alts);
    }
}

namespace {

void check_scripted(const ScriptedResponse& r) {
    for (double p : r.probs) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("scripted probability outside (0,1]");
    }
    if (!r.tokens.empty() && !r.probs.empty() && r.tokens.size() != r.probs.size()) {
        throw InvalidArgument("scripted tokens and probs differ in length");
    }
}

void check_scripted(const std::vector<ScriptedResponse>& responses) {
    if (responses.empty()) throw InvalidArgument("empty scripted response list");
    for (const auto& r : responses) check_scripted(r);
}

}  // namespace

void from_json(const json& j, ScriptedResponse& r) {
    if (j.is_string()) {
        r = ScriptedResponse{j.get<std::string>(), {}, {}, {}};
        return;
    }
    r.tokens = j.value("tokens", std::vector<std::string>{});
    r.probs = j.value("probs", std::vector<double>{});
    if (j.contains("text")) {
        r.text = j.at("text").get<std::string>();
    } else {
        r.text.clear();
        for (const auto& t : r.tokens) r.text += t;
    }
    r.alternatives.clear();
    if (auto it = j.find("alternatives"); it != j.end()) {
        for (const auto& pos : *it) {
            std::vector<TokenAlternative> row;
            for (const auto& a : pos) row.push_back({a.at("text").get<std::string>(), a.at("prob").get<double>()});
            r.alternatives.push_back(std::move(row));
        }
    }
    check_scripted(r);
}

MockScript& MockScript::on_fingerprint(std::string fingerprint, std::vector<ScriptedResponse> responses) {
    check_scripted(responses);
    by_fingerprint_[std::move(fingerprint)] = std::move(responses);
    return *this;
}

MockScript& MockScript::on_contains(std::vector<std::string> needles,
                                    std::vector<ScriptedResponse> responses) {
    check_scripted(responses);
    rules_.push_back(Rule{std::move(needles), std::move(responses)});
    return *this;
}

MockScript& MockScript::with_default(ScriptedResponse response) {
    check_scripted(response);
    default_ = std::move(response);
    return *this;
}

MockScript& MockScript::with_responder(Responder responder) {
    responder_ = std::move(responder);
    return *this;
}

MockScript& MockScript::without_token_probs() {
    supports_token_probs_ = false;
    return *this;
}

namespace {

const ScriptedResponse& pick(const std::vector<ScriptedResponse>& list, int sample_index) {
    const auto idx = static_cast<std::size_t>(std::max(sample_index, 0));
    return idx < list.size() ? list[idx] : list.back();
}

}  // namespace

std::optional<ScriptedResponse> MockScript::lookup(const std::string& fingerprint,
                                                   const GenerationRequest& request,
                                                   int sample_index) const {
    if (responder_) {
        if (auto r = responder_(request, sample_index)) return r;
    }
    if (auto it = by_fingerprint_.find(fingerprint); it != by_fingerprint_.end()) {
        return pick(it->second, sample_index);
    }
    if (!rules_.empty()) {
        const std::string haystack = prompt_text(request);
        for (const auto& rule : rules_) {
            const bool all = std::all_of(rule.contains.begin(), rule.contains.end(), [&](const std::string& n) {
                return haystack.find(n) != std::string::npos;
            });
            if (all) return pick(rule.responses, sample_index);
        }
    }
    return default_;
}

MockScript MockScript::from_json(const json& j) {
    MockScript s;
    s.supports_token_probs_ = j.value("supports_token_probs", true);
    if (auto it = j.find("default"); it != j.end() && !it->is_null()) {
        s.default_ = it->get<ScriptedResponse>();
    }
    if (auto it = j.find("by_fingerprint"); it != j.end()) {
        for (const auto& [fp, list] : it->items()) {
            s.on_fingerprint(fp, list.get<std::vector<ScriptedResponse>>());
        }
    }
    if (auto it = j.find("rules"); it != j.end()) {
        for (const auto& rule : *it) {
            s.on_contains(rule.at("contains").get<std::vector<std::string>>(),
                          rule.at("responses").get<std::vector<ScriptedResponse>>());
        }
    }
    return s;
}

MockScript MockScript::load(const fs::path& path) {
    try {
        return from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
}

json MockScript::to_json() const {
    json j{{"supports_token_probs", supports_token_probs_}};
    if (default_) j["default"] = *default_;
    if (!by_fingerprint_.empty()) {
        json fps = json::object();
        for (const auto& [fp, list] : by_fingerprint_) fps[fp] = list;
        j["by_fingerprint"] = std::move(fps);
    }
    if (!rules_.empty()) {
        json rules = json::array();
        for (const auto& r : rules_) rules.push_back(json{{"contains", r.contains}, {"responses", r.responses}});
        j["rules"] = std::move(rules);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Descriptors

void validate_descriptor(const BackendDescriptor& d) {
    if (d.model_id.empty()) throw ConfigError("backend model_id is empty");
    const bool http = d.kind == BackendKind::HttpApi;
    if (http != d.endpoint.has_value() || http != d.auth_env.has_value()) {
        throw ConfigError("endpoint and auth must be set exactly for HTTP backends");
    }
    if (!http && !d.script) throw ConfigError("mock backend without a script");
}

BackendDescriptor mock_backend(MockScript script, std::string model_id) {
    BackendDescriptor d;
    d.kind = BackendKind::Mock;
    d.model_id = std::move(model_id);
    d.script = std::make_shared<const MockScript>(std::move(script));
    return d;
}

BackendDescriptor http_backend(std::string model_id, std::string endpoint, std::string auth_env) {
    BackendDescriptor d;
    d.kind = BackendKind::HttpApi;
    d.model_id = std::move(model_id);
    d.endpoint = std::move(endpoint);
    d.auth_env = std::move(auth_env);
    return d;
}

// ---------------------------------------------------------------------------
// Cache

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path ResponseCache::path_for(const std::string& digest) const { return dir_ / (digest + ".json"); }

std::mutex& ResponseCache::lock_for(const std::string& digest) const {
    return stripes_[std::hash<std::string>{}(digest) % stripes_.size()];
}

std::optional<Generation> ResponseCache::lookup(const std::string& digest) const {
    std::lock_guard lock(lock_for(digest));
    const auto path = path_for(digest);
    if (!fs::exists(path)) return std::nullopt;
    try {
        return json::parse(read_file(path)).at("generation").get<Generation>();
    } catch (const std::exception&) {
        // A corrupt entry is treated as a miss and overwritten later.
        return std::nullopt;
    }
}

void ResponseCache::store(const std::string& digest, const std::string& model_id, int sample_index,
                          const json& request, const Generation& gen) {
    json entry{{"digest", digest},
               {"model_id", model_id},
               {"sample_index", sample_index},
               {"request", request},
               {"generation", gen}};
    std::lock_guard lock(lock_for(digest));
    write_file_atomic(path_for(digest), entry.dump(1, ' ', false, json::error_handler_t::replace) + "\n");
}

std::size_t ResponseCache::purge(const std::optional<std::string>& model_id) {
    std::size_t removed = 0;
    if (!fs::exists(dir_)) return 0;
    std::vector<fs::path> victims;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (model_id) {
            try {
                const auto j = json::parse(read_file(entry.path()));
                if (j.value("model_id", std::string{}) != *model_id) continue;
            } catch (const std::exception&) {
                continue;
            }
        }
        victims.push_back(entry.path());
    }
    for (const auto& p : victims) {
        std::lock_guard lock(lock_for(p.stem().string()));
        if (fs::remove(p)) ++removed;
    }
    return removed;
}

std::size_t ResponseCache::size() const {
    if (!fs::exists(dir_)) return 0;
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") ++n;
    }
    return n;
}

// ---------------------------------------------------------------------------
// Transports

namespace {

std::vector<std::string> split_even(const std::string& s, std::size_t n) {
    const auto cps = text::decode_utf8(s);
    std::vector<std::string> parts;
    parts.reserve(n);
    const std::size_t base = cps.size() / n;
    const std::size_t extra = cps.size() % n;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        parts.push_back(text::encode_utf8(std::u32string_view(cps).substr(pos, len)));
        pos += len;
    }
    return parts;
}

class MockTransport final : public Transport {
public:
    explicit MockTransport(BackendDescriptor d) : d_(std::move(d)) {}

    Generation complete(const GenerationRequest& request, int sample_index) override {
        const auto fp = request_fingerprint(d_.model_id, request);
        auto scripted = d_.script->lookup(fp, request, sample_index);
        if (!scripted) {
            throw ScriptMiss("no scripted response for request " + fp.substr(0, 12) +
                             " sample " + std::to_string(sample_index));
        }
        if (request.want_token_probs && !d_.script->supports_token_probs()) {
            throw ProbsUnavailable("mock backend '" + d_.model_id + "' has no token probabilities");
        }

        Generation gen;
        gen.model_id = d_.model_id;
        gen.temperature = request.temperature;
        gen.prompt_fingerprint = fp;
        gen.probs_available = d_.script->supports_token_probs();

        std::vector<std::string> pieces = scripted->tokens;
        std::vector<double> probs = scripted->probs;
        if (pieces.empty()) {
            if (!probs.empty()) {
                pieces = split_even(scripted->text, probs.size());
            } else if (!scripted->text.empty()) {
                pieces = {scripted->text};
            }
        }
        if (probs.empty()) probs.assign(pieces.size(), 1.0);
        std::string joined;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            Token tok{pieces[i], probs[i], {}};
            if (request.top_alternatives > 0 && i < scripted->alternatives.size()) {
                const auto& alts = scripted->alternatives[i];
                const auto take = std::min<std::size_t>(alts.size(), request.top_alternatives);
                tok.alternatives.assign(alts.begin(), alts.begin() + static_cast<std::ptrdiff_t>(take));
            }
            joined += tok.text;
            gen.tokens.push_back(std::move(tok));
        }
        gen.text = joined;
        if (!gen.probs_available && !gen.text.empty()) {
            gen.tokens = {Token{gen.text, 1.0, {}}};
        }
        return gen;
    }

private:
    BackendDescriptor d_;
};

struct ParsedUrl {
    std::string scheme_host_port;
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("malformed endpoint URL '" + url + "'");
    return ParsedUrl{m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class HttpTransport final : public Transport {
public:
    HttpTransport(BackendDescriptor d, std::chrono::seconds timeout)
        : d_(std::move(d)), url_(parse_url(*d_.endpoint)), timeout_(timeout) {}

    Generation complete(const GenerationRequest& request, int sample_index) override {
        const char* key = std::getenv(d_.auth_env->c_str());
        if (key == nullptr || *key == '\0') {
            throw TransportError("API key environment variable '" + *d_.auth_env + "' is not set");
        }
        httplib::Client client(url_.scheme_host_port);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
        const auto body = wire_request(d_.model_id, request, sample_index).dump();
        auto res = client.Post(url_.path, headers, body, "application/json");
        if (!res) {
            throw TransportError("request to " + url_.scheme_host_port + " failed: " +
                                 httplib::to_string(res.error()));
        }
        if (res->status == 429 || res->status >= 500) {
            throw TransportError("HTTP " + std::to_string(res->status) + " from " + url_.scheme_host_port);
        }
        if (res->status != 200) {
            std::string message = res->body;
            try {
                const auto j = json::parse(res->body);
                if (j.contains("error")) {
                    const auto& e = j.at("error");
                    message = e.is_object() ? e.value("message", e.dump()) : e.dump();
                }
            } catch (const json::exception&) {
            }
            throw ApiRefusal("HTTP " + std::to_string(res->status) + ": " + message);
        }
        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("unparseable response body: ") + e.what());
        }
        return parse_wire_response(parsed, d_.model_id, request);
    }

private:
    BackendDescriptor d_;
    ParsedUrl url_;
    std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<Transport> make_mock_transport(BackendDescriptor descriptor) {
    return std::make_unique<MockTransport>(std::move(descriptor));
}

std::unique_ptr<Transport> make_http_transport(BackendDescriptor descriptor, std::chrono::seconds timeout) {
    return std::make_unique<HttpTransport>(std::move(descriptor), timeout);
}

json wire_request(const std::string& model_id, const GenerationRequest& request, int sample_index) {
    json messages = json::array();
    for (const auto& m : request.prompt_messages) {
        messages.push_back(json{{"role", std::string(to_string(m.role))}, {"content", m.text}});
    }
    json body{{"model", model_id},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens},
              {"n", 1},
              {"seed", sample_index}};
    if (request.want_token_probs || request.top_alternatives > 0) {
        body["logprobs"] = true;
        if (request.top_alternatives > 0) body["top_logprobs"] = request.top_alternatives;
    }
    return body;
}

Generation parse_wire_response(const json& body, const std::string& model_id,
                               const GenerationRequest& request) {
    Generation gen;
    gen.model_id = model_id;
    gen.temperature = request.temperature;
    gen.prompt_fingerprint = request_fingerprint(model_id, request);
    try {
        const auto& choice = body.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        const std::string text = content.is_null() ? std::string{} : content.get<std::string>();

        const json* logprobs = nullptr;
        if (auto it = choice.find("logprobs"); it != choice.end() && it->is_object()) {
            if (auto c = it->find("content"); c != it->end() && c->is_array()) logprobs = &*c;
        }
        const bool need_probs = request.want_token_probs || request.top_alternatives > 0;
        if (logprobs == nullptr) {
            if (need_probs) throw ProbsUnavailable("response carries no token log-probabilities");
            gen.text = text;
            gen.probs_available = false;
            if (!text.empty()) gen.tokens = {Token{text, 1.0, {}}};
            return gen;
        }
        // Detokenization rule: the text is the concatenation of the token strings.
        for (const auto& entry : *logprobs) {
            Token tok;
            tok.text = entry.at("token").get<std::string>();
            tok.prob = prob_from_logprob(entry.at("logprob").get<double>());
            if (auto alts = entry.find("top_logprobs"); alts != entry.end() && alts->is_array()) {
                for (const auto& a : *alts) {
                    tok.alternatives.push_back(
                        {a.at("token").get<std::string>(), prob_from_logprob(a.at("logprob").get<double>())});
                }
            }
            gen.text += tok.text;
            gen.tokens.push_back(std::move(tok));
        }
        gen.probs_available = true;
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected response shape: ") + e.what());
    }
    return gen;
}

// ---------------------------------------------------------------------------
// Backend

class Backend::Gate {
public:
    explicit Gate(std::size_t limit) : free_(std::max<std::size_t>(limit, 1)) {}
    void acquire() {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return free_ > 0; });
        --free_;
    }
    void release() {
        {
            std::lock_guard lock(m_);
            ++free_;
        }
        cv_.notify_one();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    std::size_t free_;
};

class Backend::AuditLog {
public:
    static std::shared_ptr<AuditLog> open(const fs::path& path) {
        static std::mutex registry_mutex;
        static std::map<fs::path, std::weak_ptr<AuditLog>> registry;
        std::lock_guard lock(registry_mutex);
        const auto key = fs::absolute(path).lexically_normal();
        if (auto existing = registry[key].lock()) return existing;
        auto log = std::shared_ptr<AuditLog>(new AuditLog(key));
        registry[key] = log;
        return log;
    }

    void append(const json& j) {
        std::lock_guard lock(m_);
        out_ << dump_line(j) << '\n';
        out_.flush();
    }

private:
    explicit AuditLog(const fs::path& path) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        out_.open(path, std::ios::app | std::ios::binary);
        if (!out_) throw IoError("cannot open audit log " + path.string());
    }
    std::mutex m_;
    std::ofstream out_;
};

namespace {

std::unique_ptr<Transport> transport_for(const BackendDescriptor& d, const BackendOptions& options) {
    validate_descriptor(d);
    if (d.kind == BackendKind::Mock) return make_mock_transport(d);
    return make_http_transport(d, options.http_timeout);
}

}  // namespace

Backend::Backend(BackendDescriptor descriptor, BackendOptions options)
    : Backend(descriptor, options, transport_for(descriptor, options)) {}

Backend::Backend(BackendDescriptor descriptor, BackendOptions options, std::unique_ptr<Transport> transport)
    : descriptor_(std::move(descriptor)),
      options_(std::move(options)),
      transport_(std::move(transport)),
      gate_(std::make_unique<Gate>(options_.max_in_flight)) {
    validate_descriptor(descriptor_);
    if (options_.cache_dir) cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
    if (options_.audit_path) audit_ = AuditLog::open(*options_.audit_path);
}

Backend::~Backend() = default;

std::size_t Backend::transport_calls() const noexcept { return transport_calls_.load(); }

std::size_t Backend::purge_cache(const std::optional<std::string>& model_id) const {
    return cache_ ? cache_->purge(model_id) : 0;
}

GenerateResult Backend::generate(const GenerationRequest& request, int sample_index) const {
    validate_request(request);
    if (sample_index < 0) throw InvalidArgument("sample_index must be >= 0");
    GenerateResult result;
    result.digest = cache_digest(descriptor_.model_id, request, sample_index);

    if (cache_) {
        if (auto hit = cache_->lookup(result.digest)) {
            result.generation = std::move(*hit);
            result.from_cache = true;
        }
    }

    if (!result.from_cache) {
        if (descriptor_.kind == BackendKind::HttpApi) {
            const char* key = std::getenv(descriptor_.auth_env->c_str());
            if (key == nullptr || *key == '\0') {
                throw TransportError("API key environment variable '" + *descriptor_.auth_env +
                                     "' is not set");
            }
        }
        auto delay = options_.retry.base_delay;
        for (int attempt = 1;; ++attempt) {
            gate_->acquire();
            try {
                ++transport_calls_;
                result.generation = transport_->complete(request, sample_index);
                gate_->release();
                break;
            } catch (const TransportError&) {
                gate_->release();
                if (attempt >= options_.retry.max_attempts) throw;
            } catch (...) {
                gate_->release();
                throw;
            }
            std::this_thread::sleep_for(delay);
            delay = std::min(delay * 2, options_.retry.max_delay);
        }
        validate_generation(result.generation);
        if (request.want_token_probs && !result.generation.probs_available) {
            throw ProbsUnavailable("backend '" + descriptor_.model_id + "' returned no token probabilities");
        }
        if (cache_) {
            cache_->store(result.digest, descriptor_.model_id, sample_index,
                          canonical_request(descriptor_.model_id, request), result.generation);
        }
    }

    if (audit_) {
        audit_->append(json{{"digest", result.digest},
                            {"model_id", descriptor_.model_id},
                            {"sample_index", sample_index},
                            {"from_cache", result.from_cache},
                            {"request", canonical_request(descriptor_.model_id, request)},
                            {"response", result.generation}});
    }
    return result;
}

}  // namespace mlconf::backend
