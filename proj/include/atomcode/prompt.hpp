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

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "atomcode/extract.hpp"
#include "atomcode/table.hpp"

namespace atomcode::prompt {

/// A versioned prompt template. Placeholders use `{{name}}` syntax:
/// `{{data}}` receives the unit text, `{{context_k}}` (or any other column
/// name) the matching column value. version_hash is the SHA-256 of body.
struct PromptTemplate {
    std::string name;
    std::string body;
    std::set<std::string> declared_fields;
    std::string version_hash;

    friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// Placeholder names found in `body`, in order of appearance with
/// multiplicity. Text between `{{` and `}}` that is not a valid column name
/// is left alone.
std::vector<std::string> scan_placeholders(const std::string& body);

/// Build a template from a body: scan placeholders, hash the content.
/// Throws SchemaError unless `{{data}}` appears exactly once.
PromptTemplate make_template(std::string name, std::string body);

/// Substitute every placeholder with the row's value for the column of the
/// same name. Substitution scans the template only, never the substituted
/// values, so placeholder-like text inside cells stays literal. Throws
/// MissingFieldError when a placeholder has no column and EmptyDataError
/// when the data cell is blank.
std::string render(const PromptTemplate& tmpl, const store::Row& row);

/// Structured coding instructions, the source a template is built from.
struct Codebook {
    struct Construct {
        std::string name;
        std::string definition;
    };
    struct Level {
        std::string label;
        std::string criteria;
    };
    struct Example {
        std::string input;
        std::string expected_output;
    };

    Construct construct;
    std::vector<std::string> indicators;
    std::vector<Level> levels;
    std::vector<Example> few_shot;
    extract::OutputSchema output_schema;
};

/// Parse a codebook from its JSON document form. Throws FormatError on bad
/// JSON, SchemaError on an empty construct name or duplicate level labels.
Codebook parse_codebook(const std::string& json_text);
Codebook load_codebook(const std::filesystem::path& path);

/// Deterministically assemble a template from a codebook. Sections appear
/// in fixed order: construct definition, level criteria, indicators, a JSON
/// output contract naming each expected field, few-shot input/expected
/// pairs, then the material slot holding `{{data}}`. Equal codebooks yield
/// equal version hashes.
PromptTemplate build_from_codebook(const Codebook& codebook);

struct LibraryEntry {
    std::string name;
    std::string hash;
    std::string saved_at;  // UTC ISO-8601
};

/// Persist a template as `<lib>/<name>/<hash>.txt` plus an index line in
/// `<lib>/index.jsonl`. Re-saving an existing version refreshes its recency.
/// Throws IntegrityError if a different body is already stored under the
/// same hash.
void save_template(const std::filesystem::path& library_path, const PromptTemplate& tmpl);

/// Load by name (most recently saved version) or by name plus hash (that
/// exact version; a unique hash prefix is accepted). Throws NotFoundError
/// for unknown or ambiguous lookups, IntegrityError when the stored bytes
/// no longer match the recorded hash.
PromptTemplate load_template(const std::filesystem::path& library_path, const std::string& name,
                             const std::optional<std::string>& hash = std::nullopt);

/// All index entries, oldest first. A missing library yields an empty list.
std::vector<LibraryEntry> list_templates(const std::filesystem::path& library_path);

}  // namespace atomcode::prompt
