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

#include "atomcode/engine.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "atomcode/errors.hpp"
#include "atomcode/ledger.hpp"
#include "atomcode/util.hpp"
#include "model_json.hpp"

using nlohmann::json;

namespace atomcode::engine {

namespace {

long long elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

/// Advisory per-table lock. A live pid in the lock file blocks the run; a
/// dead one is treated as a leftover from a crashed process and taken over.
class LockFile {
public:
    explicit LockFile(const std::filesystem::path& table_path)
        : path_(table_path.string() + ".lock") {
        std::error_code ec;
        if (std::filesystem::exists(path_, ec)) {
            long long pid = 0;
            try {
                pid = json::parse(read_file(path_)).value("pid", 0LL);
            } catch (const std::exception&) {
                pid = 0;  // unreadable lock counts as stale
            }
            const bool other = pid > 0 && pid != static_cast<long long>(::getpid());
            if (other && (::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM)) {
                throw LockError("table is locked by running process " + std::to_string(pid) +
                                " (" + path_.string() + ")");
            }
        }
        const json body{{"pid", static_cast<long long>(::getpid())},
                        {"acquired_at", now_iso8601_utc()}};
        atomic_write_file(path_, body.dump());
        owned_ = true;
    }

    ~LockFile() {
        if (owned_) {
            std::error_code ec;
            std::filesystem::remove(path_, ec);
        }
    }

    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
    bool owned_ = false;
};

/// Normalize and validate a job against its loaded table. Runs before any
/// request so schema problems abort whole, not mid-table.
void preflight(Job& job, const store::SegmentTable& table) {
    const auto parsed = store::parse_output_column(job.output_column);
    if (!parsed) {
        throw SchemaError("output column must follow out:<label>:<pass>: '" + job.output_column +
                          "'");
    }
    job.pass_tag = parsed->pass_tag;
    if (job.row_end == std::numeric_limits<size_t>::max()) job.row_end = table.row_count();
    if (job.row_start > job.row_end || job.row_end > table.row_count()) {
        throw IndexError("row range [" + std::to_string(job.row_start) + ", " +
                         std::to_string(job.row_end) + ") exceeds the table's " +
                         std::to_string(table.row_count()) + " rows");
    }
    if (job.parallelism < 1) job.parallelism = 1;
    for (const auto& field : job.tmpl.declared_fields) {
        if (!table.has_column(field)) {
            throw MissingFieldError("template placeholder {{" + field +
                                    "}} has no matching column in " + job.table_path.string());
        }
    }
}

struct RowResult {
    size_t row = 0;
    store::CellOutput cell;
    store::PerRowRecord record;
    std::string error_message;
};

RowResult process_row(const SessionState& session, const store::SegmentTable& table,
                      size_t row_index, provider::Provider& prov, const std::string& run_id) {
    RowResult result;
    result.row = row_index;
    result.record.row_index = row_index;
    result.cell.run_id = run_id;

    const store::Row& row = table.rows()[row_index];
    if (trim(row.values.at(table.data_column())).empty()) {
        result.record.status = "skipped";
        result.cell.status = store::CellOutput::Status::skipped;
        return result;
    }

    const provider::ChatRequest request = build_request(session.job.tmpl, row, session.job.config);
    result.record.prompt_hash = sha256_hex(request.user);
    try {
        const provider::ChatResponse response = prov.complete(request);
        if (response.text.empty()) {
            throw MalformedResponseError("provider returned an empty response");
        }
        result.record.status = "ok";
        result.record.response_hash = sha256_hex(response.text);
        result.record.latency_ms = response.latency_ms;
        result.record.input_tokens = response.input_tokens;
        result.record.output_tokens = response.output_tokens;
        result.cell.status = store::CellOutput::Status::ok;
        result.cell.raw_text = response.text;
    } catch (const Error& e) {
        result.record.status = "error";
        result.cell.status = store::CellOutput::Status::error;
        result.error_message = e.what();
    }
    return result;
}

/// Shared body of run_job and resume: bounded worker pool for provider
/// calls, all table/checkpoint/ledger writes on the calling thread.
RunResult execute(SessionState& session, store::SegmentTable table, provider::Provider& prov,
                  const RunOptions& options, const std::vector<size_t>& todo,
                  const std::string& module_name) {
    const auto start = std::chrono::steady_clock::now();
    LockFile lock(session.job.table_path);

    RunResult result;
    result.run_id = new_uuid();
    result.session_id = session.session_id;

    std::vector<store::PerRowRecord> per_row;
    per_row.reserve(todo.size());

    const size_t worker_count =
        std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(session.job.parallelism),
                                             std::max<size_t>(todo.size(), 1)));
    std::atomic<size_t> cursor{0};
    std::atomic<bool> stop{false};
    std::mutex mu;
    std::condition_variable cv;
    std::deque<RowResult> ready;
    size_t active = worker_count;

    auto worker = [&]() {
        while (!stop.load()) {
            const size_t k = cursor.fetch_add(1);
            if (k >= todo.size()) break;
            RowResult row_result = process_row(session, table, todo[k], prov, result.run_id);
            {
                std::lock_guard<std::mutex> guard(mu);
                ready.push_back(std::move(row_result));
            }
            cv.notify_one();
        }
        {
            std::lock_guard<std::mutex> guard(mu);
            --active;
        }
        cv.notify_one();
    };

    std::vector<std::thread> threads;
    threads.reserve(worker_count);
    for (size_t i = 0; i < worker_count; ++i) threads.emplace_back(worker);

    size_t handled = 0;
    while (true) {
        std::unique_lock<std::mutex> lk(mu);
        cv.wait(lk, [&] { return !ready.empty() || active == 0; });
        if (ready.empty()) break;
        RowResult row_result = std::move(ready.front());
        ready.pop_front();
        lk.unlock();

        table = store::write_outputs(table, session.job.output_column,
                                     {{row_result.row, row_result.cell}});
        session.completed[row_result.row] = {row_result.record.status,
                                             row_result.record.response_hash};
        session.updated_at = now_iso8601_utc();
        atomic_write_file(session.checkpoint_path, session_to_json(session));

        ++handled;
        if (row_result.record.status == "ok") {
            ++result.ok;
        } else if (row_result.record.status == "error") {
            ++result.error;
            result.errors.push_back("row " + std::to_string(row_result.row) + ": " +
                                    row_result.error_message);
        } else {
            ++result.skipped;
        }
        per_row.push_back(std::move(row_result.record));

        if (options.progress) {
            options.progress({row_result.row, per_row.back().status, elapsed_ms(start)});
        }
        if (!stop.load() && options.should_stop && options.should_stop()) {
            stop.store(true);
        }
    }
    for (auto& t : threads) t.join();
    result.interrupted = stop.load() && handled < todo.size();

    std::sort(per_row.begin(), per_row.end(),
              [](const store::PerRowRecord& a, const store::PerRowRecord& b) {
                  return a.row_index < b.row_index;
              });

    store::RunRecord record;
    record.run_id = result.run_id;
    record.session_id = session.session_id;
    record.timestamp = now_iso8601_utc();
    record.module = module_name;
    record.model_config = session.job.config;
    record.template_name = session.job.tmpl.name;
    record.template_hash = session.job.tmpl.version_hash;
    record.template_body = session.job.tmpl.body;
    record.source = session.job.table_path.string();
    record.row_start = session.job.row_start;
    record.row_end = session.job.row_end;
    record.output_column = session.job.output_column;
    record.per_row = std::move(per_row);
    store::append_run_record(session.ledger_path, record);

    session.status = result.interrupted ? "interrupted" : "complete";
    session.updated_at = now_iso8601_utc();
    atomic_write_file(session.checkpoint_path, session_to_json(session));

    result.wall_time_ms = elapsed_ms(start);
    return result;
}

}  // namespace

std::filesystem::path sessions_dir(const std::filesystem::path& table_path) {
    return table_path.parent_path() / ".sessions";
}

std::filesystem::path checkpoint_path_for(const std::filesystem::path& table_path,
                                          const std::string& session_id) {
    return sessions_dir(table_path) / (session_id + ".json");
}

std::filesystem::path default_ledger_path(const std::filesystem::path& table_path) {
    return table_path.parent_path() / "ledger.jsonl";
}

std::string progress_json(const ProgressEvent& event) {
    const json j{{"row", event.row}, {"status", event.status}, {"elapsed_ms", event.elapsed_ms}};
    return j.dump();
}

std::string session_to_json(const SessionState& session) {
    json job;
    job["table_path"] = session.job.table_path.string();
    job["row_start"] = session.job.row_start;
    job["row_end"] = session.job.row_end;
    job["output_column"] = session.job.output_column;
    job["pass_tag"] = session.job.pass_tag;
    job["parallelism"] = session.job.parallelism;
    job["template"] = json{{"name", session.job.tmpl.name}, {"body", session.job.tmpl.body}};
    job["model"] = provider::model_config_to_json(session.job.config);

    json completed = json::object();
    for (const auto& [row, outcome] : session.completed) {
        completed[std::to_string(row)] =
            json{{"status", outcome.status}, {"response_hash", outcome.response_hash}};
    }

    const json j{
        {"session_id", session.session_id},
        {"status", session.status},
        {"created_at", session.created_at},
        {"updated_at", session.updated_at},
        {"table_row_count", session.table_row_count},
        {"ledger_path", session.ledger_path.string()},
        {"job", job},
        {"completed", completed},
    };
    return j.dump();
}

SessionState session_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    SessionState session;
    session.session_id = j.at("session_id").get<std::string>();
    session.status = j.at("status").get<std::string>();
    session.created_at = j.at("created_at").get<std::string>();
    session.updated_at = j.at("updated_at").get<std::string>();
    session.table_row_count = j.at("table_row_count").get<size_t>();
    session.ledger_path = j.at("ledger_path").get<std::string>();

    const json& job = j.at("job");
    session.job.table_path = job.at("table_path").get<std::string>();
    session.job.row_start = job.at("row_start").get<size_t>();
    session.job.row_end = job.at("row_end").get<size_t>();
    session.job.output_column = job.at("output_column").get<std::string>();
    session.job.pass_tag = job.value("pass_tag", "");
    session.job.parallelism = job.value("parallelism", 4);
    session.job.tmpl = prompt::make_template(job.at("template").at("name").get<std::string>(),
                                             job.at("template").at("body").get<std::string>());
    session.job.config = provider::model_config_from_json(job.at("model"));

    for (const auto& [key, value] : j.at("completed").items()) {
        const auto row = parse_int(key);
        if (!row || *row < 0) throw FormatError("checkpoint has a bad row key '" + key + "'");
        session.completed[static_cast<size_t>(*row)] = {
            value.at("status").get<std::string>(), value.value("response_hash", "")};
    }
    return session;
}

SessionState load_session(const std::filesystem::path& checkpoint_path) {
    SessionState session = session_from_json(read_file(checkpoint_path));
    session.checkpoint_path = checkpoint_path;
    return session;
}

provider::ChatRequest build_request(const prompt::PromptTemplate& tmpl, const store::Row& row,
                                    const provider::ModelConfig& config) {
    (void)config;  // model selection happens at encode time, not here
    provider::ChatRequest request;
    request.user = prompt::render(tmpl, row);
    return request;
}

RunResult run_job(const Job& job_in, provider::Provider& prov, const RunOptions& options) {
    store::SegmentTable table = store::load_table(job_in.table_path);
    Job job = job_in;
    preflight(job, table);

    SessionState session;
    session.session_id = new_uuid();
    session.status = "running";
    session.created_at = now_iso8601_utc();
    session.updated_at = session.created_at;
    session.job = job;
    session.table_row_count = table.row_count();
    session.ledger_path =
        options.ledger_path.empty() ? default_ledger_path(job.table_path) : options.ledger_path;
    session.checkpoint_path = checkpoint_path_for(job.table_path, session.session_id);
    atomic_write_file(session.checkpoint_path, session_to_json(session));

    std::vector<size_t> todo;
    todo.reserve(job.row_end - job.row_start);
    for (size_t i = job.row_start; i < job.row_end; ++i) todo.push_back(i);
    return execute(session, std::move(table), prov, options, todo, "run");
}

RunResult resume(const std::filesystem::path& checkpoint_path, provider::Provider& prov,
                 const RunOptions& options) {
    SessionState session = load_session(checkpoint_path);
    store::SegmentTable table = store::load_table(session.job.table_path);
    if (table.row_count() != session.table_row_count) {
        throw StaleCheckpointError("table now has " + std::to_string(table.row_count()) +
                                   " rows but the checkpoint recorded " +
                                   std::to_string(session.table_row_count));
    }
    preflight(session.job, table);
    if (!options.ledger_path.empty()) session.ledger_path = options.ledger_path;
    session.status = "running";
    session.updated_at = now_iso8601_utc();

    std::vector<size_t> todo;
    for (size_t i = session.job.row_start; i < session.job.row_end; ++i) {
        const auto it = session.completed.find(i);
        if (it == session.completed.end() || it->second.status != "ok") todo.push_back(i);
    }
    return execute(session, std::move(table), prov, options, todo, "resume");
}

}  // namespace atomcode::engine
