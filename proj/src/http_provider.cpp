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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "atomcode/errors.hpp"
#include "atomcode/provider.hpp"
#include "atomcode/util.hpp"

namespace atomcode::provider {

namespace {

std::string resolve_api_key(const ModelConfig& config) {
    if (config.api_key_env.empty()) {
        if (config.kind == ProviderKind::ollama_local) return "";
        throw AuthError("no api_key_env configured for " +
                        std::string(to_string(config.kind)));
    }
    const char* value = std::getenv(config.api_key_env.c_str());
    if (!value || !*value) {
        if (config.kind == ProviderKind::ollama_local) return "";
        throw AuthError("environment variable " + config.api_key_env + " is not set");
    }
    return value;
}

httplib::Headers build_headers(const ModelConfig& config, const std::string& key) {
    httplib::Headers headers;
    switch (config.kind) {
        case ProviderKind::openai_compat:
            headers.emplace("Authorization", "Bearer " + key);
            break;
        case ProviderKind::anthropic:
            headers.emplace("x-api-key", key);
            headers.emplace("anthropic-version", "2023-06-01");
            break;
        case ProviderKind::ollama_local:
            if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
            break;
        case ProviderKind::mock:
            break;
    }
    return headers;
}

bool is_retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

int jittered_delay_ms(const RetryPolicy& policy, int attempt) {
    const double ceiling =
        std::min(static_cast<double>(policy.max_delay_ms),
                 policy.base_delay_ms * std::pow(policy.factor, attempt - 1));
    thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_real_distribution<double> dist(0.0, ceiling);
    return static_cast<int>(dist(rng));
}

}  // namespace

HttpProvider::HttpProvider(ModelConfig config, RetryPolicy policy,
                           std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)), policy_(policy), limiter_(std::move(limiter)) {
    apply_kind_defaults(config_);
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
    const std::string key = resolve_api_key(config_);
    const WireRequest wire = encode_request(config_, request);
    const httplib::Headers headers = build_headers(config_, key);

    std::string last_error;
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
        if (limiter_) limiter_->acquire();

        // One client per call: httplib clients are not safe for concurrent
        // requests on a shared connection.
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.request_timeout_s, 0);
        client.set_read_timeout(config_.request_timeout_s, 0);
        client.set_write_timeout(config_.request_timeout_s, 0);

        const auto start = std::chrono::steady_clock::now();
        httplib::Result result = client.Post(wire.path, headers, wire.body, "application/json");
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();

        if (!result) {
            last_error = "network error: " + httplib::to_string(result.error());
        } else if (result->status == 401 || result->status == 403) {
            throw AuthError("provider rejected credentials (HTTP " +
                            std::to_string(result->status) + ")");
        } else if (result->status >= 200 && result->status < 300) {
            ChatResponse response = decode_response(config_.kind, result->body);
            response.latency_ms = elapsed;
            return response;
        } else if (is_retryable_status(result->status)) {
            last_error = "HTTP " + std::to_string(result->status);
        } else {
            throw RequestError("provider returned HTTP " + std::to_string(result->status) +
                               ": " + result->body.substr(0, 200));
        }

        if (attempt < policy_.max_attempts) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(jittered_delay_ms(policy_, attempt)));
        }
    }
    throw RetriesExhaustedError("gave up after " + std::to_string(policy_.max_attempts) +
                                " attempts; last error: " + last_error);
}

}  // namespace atomcode::provider
