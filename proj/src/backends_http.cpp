#include "mopo/backends.hpp"

#include "mopo/errors.hpp"
#include "mopo/rng.hpp"
#include "mopo/text.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace mopo {

using nlohmann::json;

namespace {

/// Per-endpoint in-flight limiter shared by all capabilities on that endpoint.
class InflightGate {
  public:
    void enter(const std::string& endpoint, int cap) {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return inflight_[endpoint] < cap; });
        ++inflight_[endpoint];
    }
    void leave(const std::string& endpoint) {
        {
            std::lock_guard lock(mutex_);
            --inflight_[endpoint];
        }
        cv_.notify_all();
    }
    static InflightGate& instance() {
        static InflightGate gate;
        return gate;
    }

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::string, int> inflight_;
};

struct GateScope {
    GateScope(const std::string& endpoint, int cap) : endpoint(endpoint) {
        InflightGate::instance().enter(endpoint, cap);
    }
    ~GateScope() { InflightGate::instance().leave(endpoint); }
    std::string endpoint;
};

std::string request_id_for(const std::string& path, const std::string& body) {
    return to_hex16(fnv1a64(path + "\x1f" + body));
}

/// POST with retry on transient failures (connection errors, timeouts, 5xx,
/// 429). Non-429 4xx responses are permanent.
json post_json(const std::string& endpoint, const std::string& path, const json& body,
               const RetryPolicy& policy) {
    const std::string payload = body.dump();
    const std::string request_id = request_id_for(path, payload);
    GateScope gate(endpoint, policy.inflight_cap);

    std::string last_error = "no attempt made";
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        httplib::Client client(endpoint);
        client.set_connection_timeout(policy.timeout_ms / 1000,
                                      (policy.timeout_ms % 1000) * 1000);
        client.set_read_timeout(policy.timeout_ms / 1000, (policy.timeout_ms % 1000) * 1000);
        client.set_write_timeout(policy.timeout_ms / 1000, (policy.timeout_ms % 1000) * 1000);

        auto result = client.Post(path, payload, "application/json");
        if (result) {
            const int status = result->status;
            if (status >= 200 && status < 300) {
                try {
                    return json::parse(result->body);
                } catch (const json::exception& e) {
                    throw BackendError(request_id, true,
                                       "unparseable response from " + endpoint + path + ": " +
                                           e.what());
                }
            }
            if (status != 429 && status >= 400 && status < 500)
                throw BackendError(request_id, true,
                                   "permanent failure " + std::to_string(status) + " from " +
                                       endpoint + path);
            last_error = "status " + std::to_string(status);
        } else {
            last_error = "transport error " + httplib::to_string(result.error());
        }

        if (attempt < policy.max_attempts) {
            const double delay = policy.base_delay_ms *
                                 std::pow(policy.backoff_factor, attempt - 1);
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(delay)));
        }
    }
    throw BackendError(request_id, false,
                       "retry budget exhausted for " + endpoint + path + " (" + last_error + ")");
}

} // namespace

HttpGenerator::HttpGenerator(std::string endpoint, RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy) {}

GenerateResponse HttpGenerator::generate(const GenerateRequest& request) {
    GenerateResponse response;
    int remaining = request.n;
    std::int64_t seed = request.seed;
    int rounds = 0;
    while (remaining > 0) {
        if (++rounds > policy_.max_attempts)
            throw BackendError(request_id_for("/v1/generate", request.prompt), false,
                               "generator kept under-filling after " +
                                   std::to_string(policy_.max_attempts) + " rounds");
        const json reply = post_json(endpoint_, "/v1/generate",
                                     json{{"prompt", request.prompt},
                                          {"n", remaining},
                                          {"seed", seed}},
                                     policy_);
        if (!reply.contains("texts") || !reply["texts"].is_array())
            throw BackendError(request_id_for("/v1/generate", request.prompt), true,
                               "generate response missing texts array");
        for (const auto& t : reply["texts"]) {
            if (static_cast<int>(response.texts.size()) >= request.n) break;
            response.texts.push_back(t.get<std::string>());
        }
        remaining = request.n - static_cast<int>(response.texts.size());
        seed = static_cast<std::int64_t>(
            hash_mix(static_cast<std::uint64_t>(seed), 0x70616431));
    }
    return response;
}

HttpScorer::HttpScorer(std::string endpoint, RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy) {}

ScoreResponse HttpScorer::score(const ScoreRequest& request) {
    ScoreResponse response;
    if (request.texts.empty()) return response; // vacuous: no network call

    const json reply = post_json(endpoint_, "/v1/score",
                                 json{{"texts", request.texts}, {"label", request.label}},
                                 policy_);
    const std::string request_id = request_id_for("/v1/score", request.label);
    if (!reply.contains("scores") || !reply["scores"].is_array())
        throw BackendError(request_id, true, "score response missing scores array");
    for (const auto& s : reply["scores"]) {
        const double value = s.get<double>();
        if (!(value >= 0.0 && value <= 1.0))
            throw BackendError(request_id, true,
                               "score out of [0,1]: " + std::to_string(value));
        response.scores.push_back(value);
    }
    if (response.scores.size() != request.texts.size())
        throw BackendError(request_id, true, "score count does not match text count");
    return response;
}

HttpSuggester::HttpSuggester(std::string endpoint, RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy) {}

SuggestResponse HttpSuggester::suggest(const SuggestRequest& request) {
    if (count_occurrences(request.text, kMaskToken) != 1)
        throw ContractViolation("suggest: request must contain exactly one mask marker");
    const json reply =
        post_json(endpoint_, "/v1/suggest", json{{"text", request.text}}, policy_);
    const std::string request_id = request_id_for("/v1/suggest", request.text);
    if (!reply.contains("token") || !reply["token"].is_string())
        throw BackendError(request_id, true, "suggest response missing token");
    SuggestResponse response;
    response.token = reply["token"].get<std::string>();
    if (response.token.empty() || split_ws(response.token).size() != 1 ||
        split_ws(response.token)[0] != response.token)
        throw BackendError(request_id, true, "suggest token empty or contains whitespace");
    return response;
}

Backends make_backends(const RunConfig& config, bool force_mock, RetryPolicy policy) {
    Backends backends;

    if (!force_mock && config.generator.kind == "http")
        backends.generator = std::make_shared<HttpGenerator>(config.generator.endpoint, policy);
    else
        backends.generator = std::make_shared<MockGenerator>(config.emotions);

    if (!force_mock && config.suggester.kind == "http")
        backends.suggester = std::make_shared<HttpSuggester>(config.suggester.endpoint, policy);
    else
        backends.suggester = std::make_shared<MockSuggester>();

    for (const auto& objective : config.objectives) {
        if (!force_mock && objective.kind == "http") {
            backends.scorers.push_back(
                std::make_shared<HttpScorer>(objective.endpoint, policy));
            continue;
        }
        auto lexicon = objective.lexicon.empty() ? default_emotion_lexicon() : objective.lexicon;
        for (const auto& label : config.emotions)
            if (!lexicon.count(label))
                throw ConfigError("objective " + objective.name +
                                  ": lexicon does not cover label " + label);
        backends.scorers.push_back(std::make_shared<LexiconScorer>(
            objective.style.empty() ? "neutral" : objective.style, std::move(lexicon)));
    }
    return backends;
}

} // namespace mopo
