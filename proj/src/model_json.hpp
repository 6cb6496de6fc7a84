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

// Internal: the JSON object form of ModelConfig shared by the ledger and
// session checkpoints. Holds the *name* of the API key env var, never a key.

#pragma once

#include <json.hpp>

#include "atomcode/provider.hpp"

namespace atomcode::provider {

inline nlohmann::json model_config_to_json(const ModelConfig& config) {
    return nlohmann::json{
        {"kind", to_string(config.kind)},
        {"model_id", config.model_id},
        {"temperature", config.temperature},
        {"max_tokens", config.max_tokens},
        {"base_url", config.base_url},
        {"api_key_env", config.api_key_env},
        {"request_timeout_s", config.request_timeout_s},
    };
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig config;
    config.kind = provider_kind_from_string(j.at("kind").get<std::string>());
    config.model_id = j.at("model_id").get<std::string>();
    config.temperature = j.at("temperature").get<double>();
    config.max_tokens = j.at("max_tokens").get<int>();
    config.base_url = j.value("base_url", "");
    config.api_key_env = j.value("api_key_env", "");
    config.request_timeout_s = j.value("request_timeout_s", 120);
    return config;
}

}  // namespace atomcode::provider
