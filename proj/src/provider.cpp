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

#include "atomcode/provider.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

#include <json.hpp>

#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"

using nlohmann::json;

namespace atomcode::provider {

const char* to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::openai_compat: return "openai_compat";
        case ProviderKind::anthropic: return "anthropic";
        case ProviderKind::ollama_local: return "ollama_local";
        case ProviderKind::mock: return "mock";
    }
    return "mock";
}

ProviderKind provider_kind_from_string(const std::string& s) {
    if (s == "openai_compat" || s == "openai") return ProviderKind::openai_compat;
    if (s == "anthropic") return ProviderKind::anthropic;
    if (s == "ollama_local" || s == "ollama") return ProviderKind::ollama_local;
    if (s == "mock") return ProviderKind::mock;
    throw SchemaError("unknown provider kind: '" + s + "'");
}

void apply_kind_defaults(ModelConfig& config) {
    switch (config.kind) {
        case ProviderKind::openai_compat:
            if (config.base_url.empty()) config.base_url = "https://api.openai.com";
            if (config.api_key_env.empty()) config.api_key_env = "OPENAI_API_KEY";
            break;
        case ProviderKind::anthropic:
            if (config.base_url.empty()) config.base_url = "https://api.anthropic.com";
            if (config.api_key_env.empty()) config.api_key_env = "ANTHROPIC_API_KEY";
            break;
        case ProviderKind::ollama_local:
            if (config.base_url.empty()) config.base_url = "http://127.0.0.1:11434";
            break;
        case ProviderKind::mock:
            break;
    }
}

WireRequest encode_request(const ModelConfig& config, const ChatRequest& request) {
    if (request.user.empty()) throw SchemaError("chat request has empty user message");
    // nlohmann objects serialize with sorted keys, which keeps these bodies
    // byte-stable across builds.
    switch (config.kind) {
        case ProviderKind::openai_compat: {
            json messages = json::array();
            if (request.system) {
                messages.push_back({{"role", "system"}, {"content", *request.system}});
            }
            messages.push_back({{"role", "user"}, {"content", request.user}});
            json body = {
                {"model", config.model_id},
                {"temperature", config.temperature},
                {"max_tokens", config.max_tokens},
                {"messages", messages},
            };
            return {"/v1/chat/completions", body.dump()};
        }
        case ProviderKind::anthropic: {
            json body = {
                {"model", config.model_id},
                {"max_tokens", config.max_tokens},
                {"temperature", config.temperature},
                {"messages", json::array({{{"role", "user"}, {"content", request.user}}})},
            };
            if (request.system) body["system"] = *request.system;
            return {"/v1/messages", body.dump()};
        }
        case ProviderKind::ollama_local: {
            json messages = json::array();
            if (request.system) {
                messages.push_back({{"role", "system"}, {"content", *request.system}});
            }
            messages.push_back({{"role", "user"}, {"content", request.user}});
            json body = {
                {"model", config.model_id},
                {"messages", messages},
                {"options", {{"temperature", config.temperature},
                             {"num_predict", config.max_tokens}}},
                {"stream", false},
            };
            return {"/api/chat", body.dump()};
        }
        case ProviderKind::mock:
            throw NotApplicableError("mock provider has no wire encoding");
    }
    throw NotApplicableError("unknown provider kind");
}

namespace {

json parse_body(const std::string& body) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        throw MalformedResponseError("response body is not valid JSON");
    }
    return parsed;
}

std::optional<long long> opt_int(const json& obj, const char* key) {
    if (obj.is_object() && obj.contains(key) && obj[key].is_number()) {
        return obj[key].get<long long>();
    }
    return std::nullopt;
}

}  // namespace

ChatResponse decode_response(ProviderKind kind, const std::string& body) {
    const json parsed = parse_body(body);
    ChatResponse out;
    switch (kind) {
        case ProviderKind::openai_compat: {
            if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
                parsed["choices"].empty()) {
                throw MalformedResponseError("missing choices[0]");
            }
            const json& msg = parsed["choices"][0];
            if (!msg.contains("message") || !msg["message"].contains("content") ||
                !msg["message"]["content"].is_string()) {
                throw MalformedResponseError("missing choices[0].message.content");
            }
            out.text = msg["message"]["content"].get<std::string>();
            if (parsed.contains("usage")) {
                out.input_tokens = opt_int(parsed["usage"], "prompt_tokens");
                out.output_tokens = opt_int(parsed["usage"], "completion_tokens");
            }
            break;
        }
        case ProviderKind::anthropic: {
            if (!parsed.contains("content") || !parsed["content"].is_array() ||
                parsed["content"].empty()) {
                throw MalformedResponseError("missing content[0]");
            }
            const json& block = parsed["content"][0];
            if (!block.contains("text") || !block["text"].is_string()) {
                throw MalformedResponseError("missing content[0].text");
            }
            out.text = block["text"].get<std::string>();
            if (parsed.contains("usage")) {
                out.input_tokens = opt_int(parsed["usage"], "input_tokens");
                out.output_tokens = opt_int(parsed["usage"], "output_tokens");
            }
            break;
        }
        case ProviderKind::ollama_local: {
            if (!parsed.contains("message") || !parsed["message"].contains("content") ||
                !parsed["message"]["content"].is_string()) {
                throw MalformedResponseError("missing message.content");
            }
            out.text = parsed["message"]["content"].get<std::string>();
            out.input_tokens = opt_int(parsed, "prompt_eval_count");
            out.output_tokens = opt_int(parsed, "eval_count");
            break;
        }
        case ProviderKind::mock:
            throw NotApplicableError("mock provider has no wire decoding");
    }
    if (parsed.contains("model") && parsed["model"].is_string()) {
        out.model_echo = parsed["model"].get<std::string>();
    }
    return out;
}

// -- rate limiter -------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_second)
    : rate_(std::max(0.1, requests_per_second)),
      tokens_(std::max(1.0, requests_per_second)),
      capacity_(std::max(1.0, requests_per_second)),
      last_refill_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    using namespace std::chrono;
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
        const auto now = steady_clock::now();
        const double elapsed = duration_cast<duration<double>>(now - last_refill_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        last_refill_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait_s = (1.0 - tokens_) / rate_;
        lock.unlock();
        std::this_thread::sleep_for(duration<double>(wait_s));
        lock.lock();
    }
}

// -- mock provider ------------------------------------------------------------

MockProvider::MockProvider(ModelConfig config) : config_(std::move(config)) {
    constexpr std::string_view prefix = "fixture=";
    const std::string& id = config_.model_id;
    if (id.size() > prefix.size() && id.compare(0, prefix.size(), prefix) == 0) {
        fixture_mode_ = true;
        const std::string path = id.substr(prefix.size());
        const json table = json::parse(read_file(path));
        for (const auto& [key, value] : table.items()) {
            fixture_[key] = value.get<std::string>();
        }
    }
}

MockProvider::MockProvider(ModelConfig config, std::map<std::string, std::string> fixture)
    : config_(std::move(config)), fixture_mode_(true), fixture_(std::move(fixture)) {}

std::string MockProvider::procedural_text(const std::string& seed, const std::string& prompt) {
    // Derive every field from the digest bytes directly; std::uniform_int
    // would make the output implementation-defined.
    const std::string digest = sha256_hex(seed + "\n" + prompt);
    auto byte_at = [&](size_t i) {
        return std::stoi(digest.substr(2 * i, 2), nullptr, 16);
    };
    const int score = 1 + byte_at(0) % 6;
    const bool present = byte_at(1) % 2 == 0;
    const int count = present ? 1 + byte_at(2) % 3 : 0;
    json body = {
        {"score", score},
        {"label", present ? "Present" : "Absent"},
        {"count", count},
        {"rationale", "deterministic mock response " + digest.substr(0, 8)},
    };
    return body.dump();
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
    if (request.user.empty()) throw SchemaError("chat request has empty user message");
    ChatResponse out;
    if (fixture_mode_) {
        const std::string key = sha256_hex(request.user);
        auto it = fixture_.find(key);
        if (it == fixture_.end()) {
            throw MalformedResponseError("mock fixture has no entry for prompt hash " + key);
        }
        out.text = it->second;
    } else {
        out.text = procedural_text(config_.model_id, request.user);
    }
    out.input_tokens = static_cast<long long>(request.user.size() / 4);
    out.output_tokens = static_cast<long long>(out.text.size() / 4);
    out.latency_ms = 0;
    out.model_echo = "mock:" + config_.model_id;
    return out;
}

std::unique_ptr<Provider> make_provider(const ModelConfig& config, RetryPolicy policy,
                                        double requests_per_second) {
    if (config.model_id.empty()) throw SchemaError("model_id must be non-empty");
    if (config.kind == ProviderKind::mock) {
        return std::make_unique<MockProvider>(config);
    }
    return std::make_unique<HttpProvider>(config, policy,
                                          std::make_shared<RateLimiter>(requests_per_second));
}

}  // namespace atomcode::provider
