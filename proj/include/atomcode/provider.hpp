/*
 * Copyright 2026 The Atomcode Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace atomcode::provider {

enum class ProviderKind { openai_compat, anthropic, ollama_local, mock };

const char* to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& s);

/// Model configuration: which endpoint runs the job and how it samples.
/// API keys are never stored here, only the *name* of the environment
/// variable that holds one.
struct ModelConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::string base_url;
    std::string api_key_env;
    int request_timeout_s = 120;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Fill in the conventional base_url / api_key_env for a kind when unset.
void apply_kind_defaults(ModelConfig& config);

struct ChatRequest {
    std::optional<std::string> system;
    std::string user;  // the rendered prompt
};

struct ChatResponse {
    std::string text;
    std::optional<long long> input_tokens;
    std::optional<long long> output_tokens;
    long long latency_ms = 0;
    std::optional<std::string> model_echo;
};

/// A provider-ready HTTP request: endpoint path plus serialized JSON body.
struct WireRequest {
    std::string path;
    std::string body;
};

/// Build the wire body for the configured provider kind. Key order in the
/// body is deterministic; the golden fixtures under tests/fixtures/wire pin
/// it byte-for-byte. Throws NotApplicableError for the mock kind.
WireRequest encode_request(const ModelConfig& config, const ChatRequest& request);

/// Extract text and token usage from a provider success body.
/// Throws MalformedResponseError naming the missing path.
ChatResponse decode_response(ProviderKind kind, const std::string& body);

/// Retry policy for transient provider failures: exponential backoff with
/// full jitter. 429, 5xx and transport errors are retryable; auth and
/// malformed responses are not.
struct RetryPolicy {
    int max_attempts = 5;
    int base_delay_ms = 1000;
    double factor = 2.0;
    int max_delay_ms = 30000;
};

/// Token bucket limiting request starts, shared by all in-flight calls on
/// one provider instance.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    /// Block until a token is available.
    void acquire();

private:
    std::mutex mu_;
    double rate_;
    double tokens_;
    double capacity_;
    std::chrono::steady_clock::time_point last_refill_;
};

class Provider {
public:
    virtual ~Provider() = default;
    /// Send one completion request. Safe for concurrent callers.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual const ModelConfig& config() const = 0;
};

/// Deterministic offline provider. Two modes, selected by model_id:
///   - "fixture=<path>": replay a JSON map of sha256(prompt) -> response text
///   - anything else: the id seeds a procedural generator that emits a
///     parseable JSON object (score, label, count, rationale) derived from
///     sha256(seed, prompt). Same (seed, prompt) always yields the same bytes.
class MockProvider : public Provider {
public:
    explicit MockProvider(ModelConfig config);
    MockProvider(ModelConfig config, std::map<std::string, std::string> fixture);

    ChatResponse complete(const ChatRequest& request) override;
    const ModelConfig& config() const override { return config_; }

    /// The procedural response body for (seed, prompt); exposed so tests can
    /// assert byte-determinism without a provider instance.
    static std::string procedural_text(const std::string& seed, const std::string& prompt);

private:
    ModelConfig config_;
    bool fixture_mode_ = false;
    std::map<std::string, std::string> fixture_;  // sha256(prompt) -> text
};

/// HTTP-backed provider for the three wire kinds. Each call opens its own
/// connection; the retry policy and rate limiter are shared.
class HttpProvider : public Provider {
public:
    HttpProvider(ModelConfig config, RetryPolicy policy,
                 std::shared_ptr<RateLimiter> limiter);

    ChatResponse complete(const ChatRequest& request) override;
    const ModelConfig& config() const override { return config_; }

private:
    ModelConfig config_;
    RetryPolicy policy_;
    std::shared_ptr<RateLimiter> limiter_;
};

std::unique_ptr<Provider> make_provider(const ModelConfig& config,
                                        RetryPolicy policy = {},
                                        double requests_per_second = 2.0);

}  // namespace atomcode::provider
