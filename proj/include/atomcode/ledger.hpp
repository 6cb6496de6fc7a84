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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atomcode/provider.hpp"

namespace atomcode::store {

/// Outcome of one row within a run.
struct PerRowRecord {
    size_t row_index = 0;
    std::string prompt_hash;    // sha256 of the rendered prompt; empty when skipped
    std::string response_hash;  // sha256 of the raw response; empty unless ok
    std::string status;         // ok | error | skipped
    long long latency_ms = 0;
    std::optional<long long> input_tokens;
    std::optional<long long> output_tokens;
};

/// One ledger entry: everything needed to audit (and replay the prompts of)
/// a batch run. The full template body is stored, not just its hash, so the
/// prompt stays recoverable without the library state at run time.
struct RunRecord {
    std::string run_id;      // UUID, unique within a ledger
    std::string session_id;  // shared by a run and its resumes
    std::string timestamp;   // UTC ISO-8601
    std::string module;      // e.g. "run", "resume"
    provider::ModelConfig model_config;
    std::string template_name;
    std::string template_hash;
    std::string template_body;
    std::string source;  // table path
    size_t row_start = 0;
    size_t row_end = 0;  // half-open [start, end)
    std::string output_column;
    std::vector<PerRowRecord> per_row;
};

std::string to_json_line(const RunRecord& record);
RunRecord run_record_from_json(const std::string& line);

/// Append one record as one JSONL line. Prior bytes are never touched.
/// Throws DuplicateRunError when run_id already exists in the ledger and
/// IoError when the path is unwritable.
void append_run_record(const std::filesystem::path& ledger_path, const RunRecord& record);

struct HistoryFilter {
    std::optional<std::string> model;   // matches model_id or kind:model_id
    std::optional<std::string> column;  // matches output_column
    std::optional<std::string> since;   // ISO-8601 lower bound, inclusive
};

struct HistoryResult {
    std::vector<RunRecord> records;    // newest first
    std::vector<std::string> warnings; // one per corrupt line, with line number
};

/// Scan the ledger, newest first, keeping records that match every provided
/// filter field. Corrupt lines are reported as warnings; parsing continues.
HistoryResult query_history(const std::filesystem::path& ledger_path,
                            const HistoryFilter& filter = {});

}  // namespace atomcode::store
