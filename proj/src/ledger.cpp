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

#include "atomcode/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"
#include "model_json.hpp"

using nlohmann::json;

namespace atomcode::store {

namespace {

using provider::model_config_from_json;
using provider::model_config_to_json;

json per_row_to_json(const PerRowRecord& row) {
    json j = {
        {"row_index", row.row_index},
        {"prompt_hash", row.prompt_hash},
        {"response_hash", row.response_hash},
        {"status", row.status},
        {"latency_ms", row.latency_ms},
    };
    if (row.input_tokens || row.output_tokens) {
        json usage = json::object();
        if (row.input_tokens) usage["input"] = *row.input_tokens;
        if (row.output_tokens) usage["output"] = *row.output_tokens;
        j["token_usage"] = usage;
    }
    return j;
}

PerRowRecord per_row_from_json(const json& j) {
    PerRowRecord row;
    row.row_index = j.at("row_index").get<size_t>();
    row.prompt_hash = j.value("prompt_hash", "");
    row.response_hash = j.value("response_hash", "");
    row.status = j.at("status").get<std::string>();
    row.latency_ms = j.value("latency_ms", 0LL);
    if (j.contains("token_usage")) {
        const json& usage = j["token_usage"];
        if (usage.contains("input")) row.input_tokens = usage["input"].get<long long>();
        if (usage.contains("output")) row.output_tokens = usage["output"].get<long long>();
    }
    return row;
}

void validate_record(const RunRecord& record) {
    if (record.run_id.empty()) throw SchemaError("run record missing run_id");
    if (record.template_hash != sha256_hex(record.template_body)) {
        throw SchemaError("template_hash does not match template_body");
    }
    if (record.row_end < record.row_start) throw SchemaError("row_range end before start");
    for (const auto& row : record.per_row) {
        if (row.row_index < record.row_start || row.row_index >= record.row_end) {
            throw SchemaError("per_row index " + std::to_string(row.row_index) +
                              " outside row_range");
        }
    }
}

}  // namespace

std::string to_json_line(const RunRecord& record) {
    json per_row = json::array();
    for (const auto& row : record.per_row) per_row.push_back(per_row_to_json(row));
    const json j = {
        {"run_id", record.run_id},
        {"session_id", record.session_id},
        {"timestamp", record.timestamp},
        {"module", record.module},
        {"model_config", model_config_to_json(record.model_config)},
        {"template_name", record.template_name},
        {"template_hash", record.template_hash},
        {"template_body", record.template_body},
        {"source", record.source},
        {"row_range", json::array({record.row_start, record.row_end})},
        {"output_column", record.output_column},
        {"per_row", per_row},
    };
    return j.dump();
}

RunRecord run_record_from_json(const std::string& line) {
    const json j = json::parse(line);
    RunRecord record;
    record.run_id = j.at("run_id").get<std::string>();
    record.session_id = j.value("session_id", "");
    record.timestamp = j.at("timestamp").get<std::string>();
    record.module = j.at("module").get<std::string>();
    record.model_config = model_config_from_json(j.at("model_config"));
    record.template_name = j.value("template_name", "");
    record.template_hash = j.at("template_hash").get<std::string>();
    record.template_body = j.at("template_body").get<std::string>();
    record.source = j.at("source").get<std::string>();
    record.row_start = j.at("row_range").at(0).get<size_t>();
    record.row_end = j.at("row_range").at(1).get<size_t>();
    record.output_column = j.at("output_column").get<std::string>();
    for (const auto& row : j.at("per_row")) {
        record.per_row.push_back(per_row_from_json(row));
    }
    return record;
}

void append_run_record(const std::filesystem::path& ledger_path, const RunRecord& record) {
    validate_record(record);
    // Scan for a duplicate run_id before touching the file.
    if (std::filesystem::exists(ledger_path)) {
        std::ifstream in(ledger_path);
        if (!in) throw IoError("cannot open ledger: " + ledger_path.string());
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("run_id")) continue;
            if (j["run_id"] == record.run_id) {
                throw DuplicateRunError("run_id " + record.run_id +
                                        " already present at ledger line " +
                                        std::to_string(line_no));
            }
        }
    } else if (ledger_path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(ledger_path.parent_path(), ec);
    }
    std::ofstream out(ledger_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open ledger for append: " + ledger_path.string());
    const std::string line = to_json_line(record);
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
    out.flush();
    if (!out) throw IoError("ledger append failed: " + ledger_path.string());
}

HistoryResult query_history(const std::filesystem::path& ledger_path,
                            const HistoryFilter& filter) {
    if (!std::filesystem::exists(ledger_path)) {
        throw IoError("ledger not found: " + ledger_path.string());
    }
    std::ifstream in(ledger_path);
    if (!in) throw IoError("cannot open ledger: " + ledger_path.string());

    HistoryResult result;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        RunRecord record;
        try {
            record = run_record_from_json(line);
        } catch (const std::exception& e) {
            result.warnings.push_back("ledger line " + std::to_string(line_no) +
                                      " is corrupt: " + e.what());
            continue;
        }
        if (filter.model) {
            const std::string full = std::string(provider::to_string(record.model_config.kind)) +
                                     ":" + record.model_config.model_id;
            if (*filter.model != record.model_config.model_id && *filter.model != full) {
                continue;
            }
        }
        if (filter.column && *filter.column != record.output_column) continue;
        if (filter.since && record.timestamp < *filter.since) continue;
        result.records.push_back(std::move(record));
    }
    // Newest first: appends are chronological, so reverse file order and let
    // the timestamp sort settle records from merged ledgers.
    std::reverse(result.records.begin(), result.records.end());
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const RunRecord& a, const RunRecord& b) {
                         return a.timestamp > b.timestamp;
                     });
    return result;
}

}  // namespace atomcode::store
