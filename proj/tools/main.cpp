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

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atomcode/engine.hpp"
#include "atomcode/errors.hpp"
#include "atomcode/extract.hpp"
#include "atomcode/irr.hpp"
#include "atomcode/ledger.hpp"
#include "atomcode/prompt.hpp"
#include "atomcode/provider.hpp"
#include "atomcode/segmenter.hpp"
#include "atomcode/table.hpp"
#include "atomcode/util.hpp"

namespace {

using namespace atomcode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAuth = 3;

/// Effective defaults, merged from an optional JSON config file; flags win.
/// Never holds a secret — only the *names* of key environment variables.
struct CliConfig {
    provider::ModelConfig model;
    std::filesystem::path ledger;          // empty: next to the table
    std::filesystem::path library = "prompts";
    int parallelism = 4;
    double rps = 2.0;
};

void load_config_file(const std::filesystem::path& path, CliConfig& config) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (doc.contains("model")) {
        const json& model = doc["model"];
        if (model.contains("api_key")) {
            throw SchemaError(
                "config files must not contain api_key; name the environment variable in "
                "api_key_env instead");
        }
        if (model.contains("kind")) {
            config.model.kind =
                provider::provider_kind_from_string(model["kind"].get<std::string>());
        }
        if (model.contains("model_id")) config.model.model_id = model["model_id"];
        if (model.contains("temperature")) config.model.temperature = model["temperature"];
        if (model.contains("max_tokens")) config.model.max_tokens = model["max_tokens"];
        if (model.contains("base_url")) config.model.base_url = model["base_url"];
        if (model.contains("api_key_env")) config.model.api_key_env = model["api_key_env"];
        if (model.contains("request_timeout_s")) {
            config.model.request_timeout_s = model["request_timeout_s"];
        }
    }
    if (doc.contains("ledger")) config.ledger = doc["ledger"].get<std::string>();
    if (doc.contains("library")) config.library = doc["library"].get<std::string>();
    if (doc.contains("parallelism")) config.parallelism = doc["parallelism"];
    if (doc.contains("rps")) config.rps = doc["rps"];
}

json config_as_json(const CliConfig& config) {
    json model;
    model["kind"] = provider::to_string(config.model.kind);
    model["model_id"] = config.model.model_id;
    model["temperature"] = config.model.temperature;
    model["max_tokens"] = config.model.max_tokens;
    model["base_url"] = config.model.base_url;
    model["api_key_env"] = config.model.api_key_env;  // the variable name, never its value
    model["request_timeout_s"] = config.model.request_timeout_s;
    json doc;
    doc["model"] = model;
    doc["ledger"] = config.ledger.string();
    doc["library"] = config.library.string();
    doc["parallelism"] = config.parallelism;
    doc["rps"] = config.rps;
    return doc;
}

/// `--model kind:model_id`; the first colon splits, so ids like
/// "llama3.1:8b-q4" survive.
void apply_model_flag(const std::string& flag, provider::ModelConfig& model) {
    const size_t colon = flag.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= flag.size()) {
        throw SchemaError("--model expects <kind>:<model_id>, got '" + flag + "'");
    }
    model.kind = provider::provider_kind_from_string(flag.substr(0, colon));
    model.model_id = flag.substr(colon + 1);
}

int cmd_segment(const std::vector<std::string>& inputs, const std::string& mode,
                const std::string& delimiter, int sentences,
                const std::filesystem::path& output,
                const std::vector<std::string>& context_defaults, bool as_json) {
    std::map<std::string, std::string> defaults;
    for (const auto& pair : context_defaults) {
        const size_t eq = pair.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("--context expects name=value, got '" + pair + "'");
        }
        defaults[pair.substr(0, eq)] = pair.substr(eq + 1);
    }

    const auto seg_mode = seg::mode_from_string(mode, delimiter, sentences);
    std::vector<seg::Segment> segments;
    std::vector<std::string> warnings;
    for (const auto& input : inputs) {
        const auto document = seg::load_document(input);
        auto result = seg::segment(document, seg_mode);
        for (auto& warning : result.warnings) warnings.push_back(std::move(warning));
        for (auto& segment : result.segments) segments.push_back(std::move(segment));
    }

    store::SegmentTable table = seg::to_table(segments, defaults);
    store::save_table(table, output);
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";

    if (as_json) {
        json doc;
        doc["documents"] = inputs.size();
        doc["segments"] = segments.size();
        doc["output"] = output.string();
        doc["warnings"] = warnings;
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << segments.size() << " segments from " << inputs.size() << " document"
                  << (inputs.size() == 1 ? "" : "s") << " -> " << output.string() << "\n";
    }
    return kExitOk;
}

int cmd_prompt_build(const CliConfig& config, const std::filesystem::path& codebook_path,
                     const std::string& rename, bool as_json) {
    const auto codebook = prompt::load_codebook(codebook_path);
    prompt::PromptTemplate tmpl = prompt::build_from_codebook(codebook);
    if (!rename.empty()) tmpl = prompt::make_template(rename, tmpl.body);
    prompt::save_template(config.library, tmpl);
    if (as_json) {
        json doc{{"name", tmpl.name},
                 {"hash", tmpl.version_hash},
                 {"library", config.library.string()}};
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << "saved template '" << tmpl.name << "' version " << tmpl.version_hash.substr(0, 12)
                  << " (" << tmpl.version_hash << ")\n";
    }
    return kExitOk;
}

int cmd_prompt_save(const CliConfig& config, const std::filesystem::path& body_path,
                    const std::string& name, bool as_json) {
    const auto tmpl = prompt::make_template(name, read_file(body_path));
    prompt::save_template(config.library, tmpl);
    if (as_json) {
        json doc{{"name", tmpl.name}, {"hash", tmpl.version_hash}};
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << "saved template '" << tmpl.name << "' version " << tmpl.version_hash.substr(0, 12)
                  << "\n";
    }
    return kExitOk;
}

int cmd_prompt_render(const CliConfig& config, const std::string& name, const std::string& hash,
                      const std::filesystem::path& table_path, size_t row_index) {
    const auto tmpl = prompt::load_template(
        config.library, name, hash.empty() ? std::nullopt : std::optional<std::string>(hash));
    const auto table = store::load_table(table_path);
    if (row_index >= table.row_count()) {
        throw IndexError("row " + std::to_string(row_index) + " is out of range; table has " +
                         std::to_string(table.row_count()) + " rows");
    }
    std::cout << prompt::render(tmpl, table.rows()[row_index]);
    return kExitOk;
}

int cmd_prompt_list(const CliConfig& config, bool as_json) {
    const auto entries = prompt::list_templates(config.library);
    if (as_json) {
        json doc = json::array();
        for (const auto& entry : entries) {
            doc.push_back(json{
                {"name", entry.name}, {"hash", entry.hash}, {"saved_at", entry.saved_at}});
        }
        std::cout << doc.dump() << "\n";
    } else {
        for (const auto& entry : entries) {
            std::cout << entry.saved_at << "  " << entry.hash.substr(0, 12) << "  " << entry.name
                      << "\n";
        }
    }
    return kExitOk;
}

void print_run_summary(const engine::RunResult& result, bool as_json) {
    if (as_json) {
        json doc;
        doc["run_id"] = result.run_id;
        doc["session_id"] = result.session_id;
        doc["ok"] = result.ok;
        doc["error"] = result.error;
        doc["skipped"] = result.skipped;
        doc["interrupted"] = result.interrupted;
        doc["wall_time_ms"] = result.wall_time_ms;
        doc["errors"] = result.errors;
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << "session " << result.session_id << " run " << result.run_id << ": "
                  << result.ok << " ok, " << result.error << " error, " << result.skipped
                  << " skipped in " << result.wall_time_ms << " ms\n";
        for (const auto& error : result.errors) std::cerr << "error: " << error << "\n";
        if (result.interrupted) {
            std::cerr << "interrupted; resume with: run <table> --resume " << result.session_id
                      << "\n";
        }
    }
}

/// Fail fast on a missing key: auth problems hit every row identically, so
/// they abort the command instead of erroring row by row.
void ensure_api_key(provider::ModelConfig model) {
    provider::apply_kind_defaults(model);
    if (model.kind == provider::ProviderKind::openai_compat ||
        model.kind == provider::ProviderKind::anthropic) {
        if (std::getenv(model.api_key_env.c_str()) == nullptr) {
            throw AuthError("environment variable " + model.api_key_env +
                            " is not set (pass --api-key-env to name a different one)");
        }
    }
}

int cmd_run(const CliConfig& config, const std::filesystem::path& table_path,
            const std::string& prompt_ref, const std::string& prompt_hash,
            const std::string& out_column, const std::string& rows, const std::string& resume_id,
            bool quiet, bool as_json) {
    engine::RunOptions options;
    options.ledger_path = config.ledger;
    if (!quiet) {
        options.progress = [](const engine::ProgressEvent& event) {
            std::cerr << engine::progress_json(event) << "\n";
        };
    }

    engine::RunResult result;
    if (!resume_id.empty()) {
        auto checkpoint = std::filesystem::path(resume_id);
        if (!std::filesystem::exists(checkpoint)) {
            checkpoint = engine::checkpoint_path_for(table_path, resume_id);
        }
        // The checkpoint's recorded model is authoritative; the ledger entry
        // written by resume must describe the provider that actually ran.
        const provider::ModelConfig model = engine::load_session(checkpoint).job.config;
        ensure_api_key(model);
        const auto provider = provider::make_provider(model, {}, config.rps);
        result = engine::resume(checkpoint, *provider, options);
    } else {
        ensure_api_key(config.model);
        const auto provider = provider::make_provider(config.model, {}, config.rps);
        engine::Job job;
        job.table_path = table_path;
        job.tmpl = prompt::load_template(
            config.library, prompt_ref,
            prompt_hash.empty() ? std::nullopt : std::optional<std::string>(prompt_hash));
        job.config = config.model;
        job.output_column = out_column;
        job.parallelism = config.parallelism;
        if (!rows.empty()) {
            const size_t colon = rows.find(':');
            if (colon == std::string::npos) {
                throw SchemaError("--rows expects start:end (half-open), got '" + rows + "'");
            }
            const auto start = parse_int(rows.substr(0, colon));
            const auto end = parse_int(rows.substr(colon + 1));
            if (!start || !end || *start < 0 || *end < *start) {
                throw SchemaError("--rows expects start:end with 0 <= start <= end, got '" +
                                  rows + "'");
            }
            job.row_start = static_cast<size_t>(*start);
            job.row_end = static_cast<size_t>(*end);
        }
        result = engine::run_job(job, *provider, options);
    }

    print_run_summary(result, as_json);
    return result.error > 0 || result.interrupted ? kExitPartial : kExitOk;
}

extract::OutputSchema schema_from_flags(double score_min, double score_max, bool has_score,
                                        bool label, const std::vector<std::string>& allowed,
                                        bool count, bool quotes, bool rationale) {
    extract::OutputSchema schema;
    if (has_score) schema.score = extract::OutputSchema::ScoreBounds{score_min, score_max};
    schema.label = label || !allowed.empty();
    schema.allowed_labels = allowed;
    schema.count = count;
    schema.quotes = quotes;
    schema.rationale = rationale;
    if (!schema.expects_anything()) {
        throw SchemaError(
            "nothing to extract: pass --score-min/--score-max, --label, --count, --quotes, or "
            "--rationale");
    }
    return schema;
}

int cmd_extract(const std::filesystem::path& table_path, const std::string& column,
                const extract::OutputSchema& schema, bool as_json) {
    store::SegmentTable table = store::load_table(table_path);
    const auto* source = table.find_column(column);
    if (source == nullptr || source->role != store::ColumnRole::output) {
        throw NotFoundError("no output column named '" + column + "' in " + table_path.string());
    }

    const auto parsed = store::parse_output_column(column);
    const auto column_for = [&](const std::string& field) {
        return "out:" + parsed->label + "." + field + ":" + parsed->pass_tag;
    };

    std::map<std::string, std::map<size_t, store::CellOutput>> writes;
    const auto put = [&](const std::string& field, size_t row, const std::string& value) {
        store::CellOutput cell;
        if (value.empty()) {
            cell.status = store::CellOutput::Status::skipped;
        } else {
            cell.status = store::CellOutput::Status::ok;
            cell.raw_text = value;
        }
        writes[column_for(field)][row] = cell;
    };

    size_t parsed_json = 0, parsed_fallback = 0, failed = 0, blank = 0;
    for (size_t row = 0; row < table.row_count(); ++row) {
        const std::string raw(table.cell(row, column));
        if (std::string(trim(raw)).empty()) {
            ++blank;
            put("parse_mode", row, "");
            continue;
        }
        const auto out = extract::parse_structured(raw, schema);
        switch (out.parse_mode) {
            case extract::ParseMode::json: ++parsed_json; break;
            case extract::ParseMode::fallback_regex: ++parsed_fallback; break;
            case extract::ParseMode::failed: ++failed; break;
        }
        put("parse_mode", row, extract::to_string(out.parse_mode));
        if (schema.score) put("score", row, out.score ? format_number(*out.score) : "");
        if (schema.label) put("label", row, out.label.value_or(""));
        if (schema.count) put("count", row, out.count ? std::to_string(*out.count) : "");
        if (schema.rationale) put("rationale", row, out.rationale.value_or(""));
        if (schema.quotes) put("quotes", row, out.quotes.empty() ? "" : json(out.quotes).dump());
    }

    for (const auto& [name, cells] : writes) {
        table = store::write_outputs(table, name, cells);
    }

    if (as_json) {
        json doc;
        doc["rows"] = table.row_count();
        doc["json"] = parsed_json;
        doc["fallback_regex"] = parsed_fallback;
        doc["failed"] = failed;
        doc["blank"] = blank;
        json columns = json::array();
        for (const auto& [name, cells] : writes) columns.push_back(name);
        doc["columns"] = columns;
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << table.row_count() << " rows: " << parsed_json << " json, " << parsed_fallback
                  << " fallback, " << failed << " failed, " << blank << " blank\n";
    }
    return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_tabulate(const std::filesystem::path& table_path, const std::string& col_a,
                 const std::string& col_b, const std::string& out_column, double threshold,
                 bool as_json) {
    store::SegmentTable table = store::load_table(table_path);
    for (const auto* name : {&col_a, &col_b}) {
        if (!table.has_column(*name)) {
            throw NotFoundError("no column named '" + *name + "' in " + table_path.string());
        }
    }
    const auto parsed = store::parse_output_column(out_column);
    if (!parsed) {
        throw SchemaError("--out must follow out:<label>:<pass>: '" + out_column + "'");
    }
    const std::string flag_column = "out:" + parsed->label + ".flag:" + parsed->pass_tag;

    extract::TabulationPolicy policy;
    policy.adjudication_threshold = threshold;

    std::map<size_t, store::CellOutput> values, flags;
    size_t ok = 0, adjudicate = 0, missing = 0;
    for (size_t row = 0; row < table.row_count(); ++row) {
        const auto a = parse_number(std::string(trim(table.cell(row, col_a))));
        const auto b = parse_number(std::string(trim(table.cell(row, col_b))));
        const auto result = extract::tabulate_passes(a, b, policy);
        switch (result.flag) {
            case extract::TabulationFlag::ok: ++ok; break;
            case extract::TabulationFlag::adjudicate: ++adjudicate; break;
            case extract::TabulationFlag::missing: ++missing; break;
        }
        store::CellOutput value_cell;
        if (result.value) {
            value_cell.status = store::CellOutput::Status::ok;
            value_cell.raw_text = format_number(*result.value);
        } else {
            value_cell.status = store::CellOutput::Status::skipped;
        }
        values[row] = value_cell;
        store::CellOutput flag_cell;
        flag_cell.status = store::CellOutput::Status::ok;
        flag_cell.raw_text = extract::to_string(result.flag);
        flags[row] = flag_cell;
    }
    table = store::write_outputs(table, out_column, values);
    table = store::write_outputs(table, flag_column, flags);

    if (as_json) {
        json doc{{"rows", table.row_count()},
                 {"ok", ok},
                 {"adjudicate", adjudicate},
                 {"missing", missing},
                 {"value_column", out_column},
                 {"flag_column", flag_column}};
        std::cout << doc.dump() << "\n";
    } else {
        std::cout << table.row_count() << " rows: " << ok << " ok, " << adjudicate
                  << " to adjudicate, " << missing << " missing -> " << out_column << "\n";
    }
    return kExitOk;
}

int cmd_irr(const std::filesystem::path& table_path, const std::string& col_a,
            const std::string& col_b, const std::string& kind, bool as_json) {
    const auto table = store::load_table(table_path);
    const auto report =
        irr::compute_report(table, col_a, col_b, irr::pair_kind_from_string(kind));
    std::cout << (as_json ? irr::to_json_string(report) + "\n" : irr::to_text(report));
    return kExitOk;
}

int cmd_history(const CliConfig& config, const std::filesystem::path& table_path,
                const std::string& model, const std::string& column, const std::string& since,
                size_t limit, bool as_json) {
    std::filesystem::path ledger = config.ledger;
    if (ledger.empty()) {
        if (table_path.empty()) {
            throw SchemaError("history needs --ledger or a table path to locate the ledger");
        }
        ledger = engine::default_ledger_path(table_path);
    }
    store::HistoryFilter filter;
    if (!model.empty()) filter.model = model;
    if (!column.empty()) filter.column = column;
    if (!since.empty()) filter.since = since;

    auto result = store::query_history(ledger, filter);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    if (limit > 0 && result.records.size() > limit) result.records.resize(limit);

    if (as_json) {
        json doc = json::array();
        for (const auto& record : result.records) {
            json entry;
            entry["run_id"] = record.run_id;
            entry["session_id"] = record.session_id;
            entry["timestamp"] = record.timestamp;
            entry["module"] = record.module;
            entry["model"] = std::string(provider::to_string(record.model_config.kind)) + ":" +
                             record.model_config.model_id;
            entry["template_name"] = record.template_name;
            entry["template_hash"] = record.template_hash;
            entry["source"] = record.source;
            entry["row_start"] = record.row_start;
            entry["row_end"] = record.row_end;
            entry["output_column"] = record.output_column;
            entry["rows"] = record.per_row.size();
            doc.push_back(entry);
        }
        std::cout << doc.dump() << "\n";
    } else {
        for (const auto& record : result.records) {
            size_t ok = 0, error = 0, skipped = 0;
            for (const auto& row : record.per_row) {
                if (row.status == "ok") ++ok;
                else if (row.status == "error") ++error;
                else ++skipped;
            }
            std::cout << record.timestamp << "  " << record.module << "  "
                      << provider::to_string(record.model_config.kind) << ":"
                      << record.model_config.model_id << "  " << record.output_column << "  rows ["
                      << record.row_start << ", " << record.row_end << ")  " << ok << " ok/"
                      << error << " err/" << skipped << " skip  run "
                      << record.run_id.substr(0, 8) << "\n";
        }
    }
    return kExitOk;
}

int exit_code_for(const Error& error) {
    if (dynamic_cast<const AuthError*>(&error) != nullptr) return kExitAuth;
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Atomistic document coding: segment, prompt, run, extract, compare"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool print_config = false;
    app.add_option("--config", config_path, "JSON config file with defaults");
    app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

    CliConfig config;

    // segment
    auto* segment = app.add_subcommand("segment", "Split documents into a segment table");
    std::vector<std::string> seg_inputs;
    std::string seg_mode = "paragraph", seg_delimiter;
    int seg_sentences = 3;
    std::filesystem::path seg_output = "segments.csv";
    std::vector<std::string> seg_context;
    bool seg_json = false;
    segment->add_option("inputs", seg_inputs, "Input text files")->required();
    segment->add_option("--mode", seg_mode, "paragraph|speaker|delimiter|sentences|whole");
    segment->add_option("--delimiter", seg_delimiter, "Token for --mode delimiter");
    segment->add_option("--sentences", seg_sentences, "Sentences per segment for --mode sentences");
    segment->add_option("-o,--output", seg_output, "Output CSV path");
    segment->add_option("--context", seg_context, "Constant context column name=value");
    segment->add_flag("--json", seg_json, "Machine-readable summary");

    // prompt build|render|save|list
    auto* prompt_cmd = app.add_subcommand("prompt", "Manage versioned prompt templates");
    prompt_cmd->require_subcommand(1);
    std::string lib_override;

    auto* prompt_build = prompt_cmd->add_subcommand("build", "Build a template from a codebook");
    std::filesystem::path build_codebook;
    std::string build_name;
    bool build_json = false;
    prompt_build->add_option("codebook", build_codebook, "Codebook JSON file")->required();
    prompt_build->add_option("--name", build_name, "Override the template name");
    prompt_build->add_option("--library", lib_override, "Prompt library directory");
    prompt_build->add_flag("--json", build_json, "Machine-readable summary");

    auto* prompt_save = prompt_cmd->add_subcommand("save", "Save a template body file");
    std::filesystem::path save_body;
    std::string save_name;
    bool save_json = false;
    prompt_save->add_option("body", save_body, "Template body text file")->required();
    prompt_save->add_option("--name", save_name, "Template name")->required();
    prompt_save->add_option("--library", lib_override, "Prompt library directory");
    prompt_save->add_flag("--json", save_json, "Machine-readable summary");

    auto* prompt_render = prompt_cmd->add_subcommand("render", "Render a template against a row");
    std::string render_name, render_hash;
    std::filesystem::path render_table;
    size_t render_row = 0;
    prompt_render->add_option("name", render_name, "Template name")->required();
    prompt_render->add_option("--hash", render_hash, "Version hash or unique prefix");
    prompt_render->add_option("--table", render_table, "Segment table CSV")->required();
    prompt_render->add_option("--row", render_row, "Row index");
    prompt_render->add_option("--library", lib_override, "Prompt library directory");

    auto* prompt_list = prompt_cmd->add_subcommand("list", "List stored template versions");
    bool list_json = false;
    prompt_list->add_option("--library", lib_override, "Prompt library directory");
    prompt_list->add_flag("--json", list_json, "Machine-readable listing");

    // run
    auto* run = app.add_subcommand("run", "Apply a template to table rows through a model");
    std::filesystem::path run_table;
    std::string run_prompt, run_prompt_hash, run_model, run_out, run_rows, run_resume;
    std::string run_ledger, run_library, run_api_key_env, run_base_url;
    double run_temperature = 0.0, run_rps = 0.0;
    int run_max_tokens = 0, run_parallelism = 0;
    bool run_quiet = false, run_json = false;
    run->add_option("table", run_table, "Segment table CSV")->required();
    run->add_option("--prompt", run_prompt, "Template name in the library");
    run->add_option("--prompt-hash", run_prompt_hash, "Template version hash or prefix");
    run->add_option("--model", run_model, "<kind>:<model_id>, e.g. mock:seed1 or openai:gpt-4o");
    run->add_option("--out", run_out, "Output column out:<label>:<pass>");
    run->add_option("--rows", run_rows, "Half-open row range start:end");
    run->add_option("--resume", run_resume, "Resume a session id or checkpoint path");
    run->add_option("--ledger", run_ledger, "Audit ledger path");
    run->add_option("--library", run_library, "Prompt library directory");
    run->add_option("--temperature", run_temperature, "Sampling temperature");
    run->add_option("--max-tokens", run_max_tokens, "Response token cap");
    run->add_option("--base-url", run_base_url, "Provider endpoint override");
    run->add_option("--api-key-env", run_api_key_env,
                    "Environment variable holding the API key");
    run->add_option("--parallelism", run_parallelism, "Concurrent in-flight requests");
    run->add_option("--rps", run_rps, "Requests per second cap");
    run->add_flag("--quiet", run_quiet, "Suppress per-row progress on stderr");
    run->add_flag("--json", run_json, "Machine-readable summary");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "Parse raw outputs into typed columns");
    std::filesystem::path extract_table;
    std::string extract_col;
    double extract_min = 0, extract_max = 0;
    std::vector<std::string> extract_allowed;
    bool extract_label = false, extract_count = false, extract_quotes = false;
    bool extract_rationale = false, extract_json = false;
    extract_cmd->add_option("table", extract_table, "Segment table CSV")->required();
    extract_cmd->add_option("--col", extract_col, "Output column to parse");
    auto* opt_min = extract_cmd->add_option("--score-min", extract_min, "Score lower bound");
    auto* opt_max = extract_cmd->add_option("--score-max", extract_max, "Score upper bound");
    extract_cmd->add_flag("--label", extract_label, "Expect a label field");
    extract_cmd->add_option("--allowed", extract_allowed, "Allowed label values");
    extract_cmd->add_flag("--count", extract_count, "Expect a count field");
    extract_cmd->add_flag("--quotes", extract_quotes, "Expect a quotes array");
    extract_cmd->add_flag("--rationale", extract_rationale, "Expect a rationale field");
    extract_cmd->add_flag("--json", extract_json, "Machine-readable summary");

    // tabulate (two scoring passes -> one combined column)
    auto* tabulate = app.add_subcommand("tabulate", "Combine two numeric passes into one column");
    std::filesystem::path tab_table;
    std::string tab_a, tab_b, tab_out;
    double tab_threshold = 1.0;
    bool tab_json = false;
    tabulate->add_option("table", tab_table, "Segment table CSV")->required();
    tabulate->add_option("--col-a", tab_a, "First pass column")->required();
    tabulate->add_option("--col-b", tab_b, "Second pass column")->required();
    tabulate->add_option("--out", tab_out, "Combined column out:<label>:<pass>")->required();
    tabulate->add_option("--threshold", tab_threshold, "Adjudication threshold");
    tabulate->add_flag("--json", tab_json, "Machine-readable summary");

    // irr
    auto* irr_cmd = app.add_subcommand("irr", "Inter-rater reliability between two columns");
    std::filesystem::path irr_table;
    std::string irr_a, irr_b, irr_kind = "categorical";
    bool irr_json = false;
    irr_cmd->add_option("table", irr_table, "Segment table CSV")->required();
    irr_cmd->add_option("--col-a", irr_a, "First column")->required();
    irr_cmd->add_option("--col-b", irr_b, "Second column")->required();
    irr_cmd->add_option("--kind", irr_kind, "categorical|count");
    irr_cmd->add_flag("--json", irr_json, "Machine-readable report");

    // history
    auto* history = app.add_subcommand("history", "List audit ledger entries, newest first");
    std::filesystem::path hist_table;
    std::string hist_ledger, hist_model, hist_column, hist_since;
    size_t hist_limit = 0;
    bool hist_json = false;
    history->add_option("table", hist_table, "Table whose ledger to read");
    history->add_option("--ledger", hist_ledger, "Ledger path (overrides the table default)");
    history->add_option("--model", hist_model, "Filter: model_id or kind:model_id");
    history->add_option("--column", hist_column, "Filter: output column");
    history->add_option("--since", hist_since, "Filter: ISO-8601 lower bound, inclusive");
    history->add_option("--limit", hist_limit, "Keep at most N records");
    history->add_flag("--json", hist_json, "Machine-readable listing");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) load_config_file(config_path, config);
        if (!lib_override.empty()) config.library = lib_override;

        if (print_config) {
            std::cout << config_as_json(config).dump(2) << "\n";
            return kExitOk;
        }

        if (segment->parsed()) {
            return cmd_segment(seg_inputs, seg_mode, seg_delimiter, seg_sentences, seg_output,
                               seg_context, seg_json);
        }
        if (prompt_build->parsed()) {
            return cmd_prompt_build(config, build_codebook, build_name, build_json);
        }
        if (prompt_save->parsed()) return cmd_prompt_save(config, save_body, save_name, save_json);
        if (prompt_render->parsed()) {
            return cmd_prompt_render(config, render_name, render_hash, render_table, render_row);
        }
        if (prompt_list->parsed()) return cmd_prompt_list(config, list_json);

        if (run->parsed()) {
            if (!run_ledger.empty()) config.ledger = run_ledger;
            if (!run_library.empty()) config.library = run_library;
            if (!run_model.empty()) apply_model_flag(run_model, config.model);
            if (run->count("--temperature") > 0) config.model.temperature = run_temperature;
            if (run_max_tokens > 0) config.model.max_tokens = run_max_tokens;
            if (!run_base_url.empty()) config.model.base_url = run_base_url;
            if (!run_api_key_env.empty()) config.model.api_key_env = run_api_key_env;
            if (run_parallelism > 0) config.parallelism = run_parallelism;
            if (run_rps > 0) config.rps = run_rps;
            if (run_resume.empty()) {
                if (config.model.model_id.empty()) {
                    throw SchemaError("run needs --model <kind>:<model_id> (or a config file)");
                }
                if (run_prompt.empty()) throw SchemaError("run needs --prompt <template name>");
                if (run_out.empty()) throw SchemaError("run needs --out out:<label>:<pass>");
            } else if (run->count("--model") > 0 || run->count("--prompt") > 0 ||
                       run->count("--out") > 0 || run->count("--rows") > 0) {
                throw SchemaError(
                    "--resume reuses the session's recorded job; drop --model/--prompt/--out/"
                    "--rows");
            }
            return cmd_run(config, run_table, run_prompt, run_prompt_hash, run_out, run_rows,
                           run_resume, run_quiet, run_json);
        }

        if (extract_cmd->parsed()) {
            if (extract_col.empty()) throw SchemaError("extract needs --col <output column>");
            const bool has_score = opt_min->count() > 0 || opt_max->count() > 0;
            if (has_score && (opt_min->count() == 0 || opt_max->count() == 0)) {
                throw SchemaError("--score-min and --score-max must be given together");
            }
            if (has_score && extract_min > extract_max) {
                throw SchemaError("--score-min must not exceed --score-max");
            }
            const auto schema =
                schema_from_flags(extract_min, extract_max, has_score, extract_label,
                                  extract_allowed, extract_count, extract_quotes,
                                  extract_rationale);
            return cmd_extract(extract_table, extract_col, schema, extract_json);
        }

        if (tabulate->parsed()) {
            return cmd_tabulate(tab_table, tab_a, tab_b, tab_out, tab_threshold, tab_json);
        }
        if (irr_cmd->parsed()) return cmd_irr(irr_table, irr_a, irr_b, irr_kind, irr_json);
        if (history->parsed()) {
            if (!hist_ledger.empty()) config.ledger = hist_ledger;
            return cmd_history(config, hist_table, hist_model, hist_column, hist_since,
                               hist_limit, hist_json);
        }

        std::cout << app.help();
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
