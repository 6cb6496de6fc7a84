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
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "atomcode/prompt.hpp"
#include "atomcode/provider.hpp"
#include "atomcode/table.hpp"

namespace atomcode::engine {

/// One batch job: apply a template to a row range of a table under a model
/// configuration, writing results into one output column.
struct Job {
    std::filesystem::path table_path;
    prompt::PromptTemplate tmpl;
    provider::ModelConfig config;
    size_t row_start = 0;
    /// Half-open end; the default sentinel means "to the last row".
    size_t row_end = std::numeric_limits<size_t>::max();
    std::string output_column;
    std::string pass_tag;  // derived from output_column
    int parallelism = 4;

    friend bool operator==(const Job&, const Job&) = default;
};

struct RowOutcome {
    std::string status;  // ok | error | skipped
    std::string response_hash;

    friend bool operator==(const RowOutcome&, const RowOutcome&) = default;
};

/// Durable progress of one session, checkpointed after every completed row.
/// A session survives crashes: resume() re-processes every row whose status
/// is not ok and converges to the uninterrupted result.
struct SessionState {
    std::string session_id;
    std::string status;  // running | interrupted | complete
    std::string created_at;
    std::string updated_at;
    Job job;
    size_t table_row_count = 0;
    std::map<size_t, RowOutcome> completed;
    std::filesystem::path ledger_path;
    std::filesystem::path checkpoint_path;  // where this state lives; not serialized

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

std::string session_to_json(const SessionState& session);
SessionState session_from_json(const std::string& text);
SessionState load_session(const std::filesystem::path& checkpoint_path);

/// `.sessions` directory next to a table, and the checkpoint path inside it.
std::filesystem::path sessions_dir(const std::filesystem::path& table_path);
std::filesystem::path checkpoint_path_for(const std::filesystem::path& table_path,
                                          const std::string& session_id);
std::filesystem::path default_ledger_path(const std::filesystem::path& table_path);

struct ProgressEvent {
    size_t row = 0;
    std::string status;
    long long elapsed_ms = 0;
};

/// Render a progress event as the single-line JSON emitted on stderr.
std::string progress_json(const ProgressEvent& event);

struct RunResult {
    std::string run_id;
    std::string session_id;
    size_t ok = 0;
    size_t error = 0;
    size_t skipped = 0;
    long long wall_time_ms = 0;
    bool interrupted = false;
    std::vector<std::string> errors;  // "row N: message" for each errored row
};

struct RunOptions {
    /// Audit ledger location; defaults to ledger.jsonl next to the table.
    std::filesystem::path ledger_path;
    /// Called after every completed row (any thread order, rows may
    /// interleave); null disables reporting.
    std::function<void(const ProgressEvent&)> progress;
    /// Polled after every checkpoint; returning true stops the run
    /// cooperatively. In-flight rows still finish and checkpoint.
    std::function<bool()> should_stop;
};

/// Build the provider request for one row: the rendered prompt as the user
/// message, nothing else. No other row's content and no history appears, so
/// the request is invariant under changes to unrelated rows.
provider::ChatRequest build_request(const prompt::PromptTemplate& tmpl, const store::Row& row,
                                    const provider::ModelConfig& config);

/// Execute a job: per row, render, call the provider, write the cell, then
/// checkpoint. Rows with blank data are skipped; per-row provider errors
/// mark the row `error` and the run continues. Table or schema problems
/// throw before any request is sent. A RunRecord lands in the ledger even
/// when the run is stopped early.
RunResult run_job(const Job& job, provider::Provider& provider, const RunOptions& options = {});

/// Resume a checkpointed session: re-process rows not yet ok, reusing the
/// session id under a fresh run id. Throws StaleCheckpointError when the
/// table's row count no longer matches the checkpoint.
RunResult resume(const std::filesystem::path& checkpoint_path, provider::Provider& provider,
                 const RunOptions& options = {});

}  // namespace atomcode::engine
