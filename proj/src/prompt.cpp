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

#include "atomcode/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"
#include "json.hpp"

namespace atomcode::prompt {

namespace {

using nlohmann::json;

bool placeholder_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == ':' || c == '.' || c == '-';
}

struct Placeholder {
    std::string name;
    size_t begin = 0;  // offset of "{{"
    size_t end = 0;    // offset one past "}}"
};

std::vector<Placeholder> scan(const std::string& body) {
    std::vector<Placeholder> found;
    size_t pos = 0;
    while (true) {
        const size_t open = body.find("{{", pos);
        if (open == std::string::npos) break;
        const size_t close = body.find("}}", open + 2);
        if (close == std::string::npos) break;
        const std::string inner = body.substr(open + 2, close - open - 2);
        const bool valid = !inner.empty() &&
                           std::all_of(inner.begin(), inner.end(), placeholder_char);
        if (valid) {
            found.push_back({inner, open, close + 2});
            pos = close + 2;
        } else {
            pos = open + 1;
        }
    }
    return found;
}

}  // namespace

std::vector<std::string> scan_placeholders(const std::string& body) {
    std::vector<std::string> names;
    for (const auto& p : scan(body)) names.push_back(p.name);
    return names;
}

PromptTemplate make_template(std::string name, std::string body) {
    PromptTemplate tmpl;
    tmpl.name = std::move(name);
    tmpl.version_hash = sha256_hex(body);
    size_t data_slots = 0;
    for (const auto& p : scan(body)) {
        if (p.name == "data") ++data_slots;
        tmpl.declared_fields.insert(p.name);
    }
    if (data_slots != 1) {
        throw SchemaError("template '" + tmpl.name + "' must contain {{data}} exactly once, found " +
                          std::to_string(data_slots));
    }
    tmpl.body = std::move(body);
    return tmpl;
}

std::string render(const PromptTemplate& tmpl, const store::Row& row) {
    std::string out;
    out.reserve(tmpl.body.size());
    size_t copied = 0;
    for (const auto& p : scan(tmpl.body)) {
        out.append(tmpl.body, copied, p.begin - copied);
        const auto it = row.values.find(p.name);
        if (it == row.values.end()) {
            throw MissingFieldError("placeholder {{" + p.name + "}} has no matching column");
        }
        if (p.name == "data" && trim(it->second).empty()) {
            throw EmptyDataError("row " + std::to_string(row.index) + " has an empty data cell");
        }
        out.append(it->second);
        copied = p.end;
    }
    out.append(tmpl.body, copied, tmpl.body.size() - copied);
    return out;
}

namespace {

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return "";
    if (!it->is_string()) throw SchemaError(where + "." + key + " must be a string");
    return it->get<std::string>();
}

extract::OutputSchema schema_from_json(const json& obj) {
    extract::OutputSchema schema;
    if (!obj.is_object()) throw SchemaError("output_schema must be an object");
    if (const auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
        if (!it->is_object() || !it->contains("min") || !it->contains("max") ||
            !(*it)["min"].is_number() || !(*it)["max"].is_number()) {
            throw SchemaError("output_schema.score must be {min, max}");
        }
        extract::OutputSchema::ScoreBounds bounds;
        bounds.min = (*it)["min"].get<double>();
        bounds.max = (*it)["max"].get<double>();
        if (bounds.min > bounds.max) throw SchemaError("output_schema.score has min > max");
        schema.score = bounds;
    }
    schema.label = obj.value("label", false);
    if (const auto it = obj.find("allowed_labels"); it != obj.end()) {
        if (!it->is_array()) throw SchemaError("output_schema.allowed_labels must be an array");
        for (const auto& v : *it) {
            if (!v.is_string()) throw SchemaError("output_schema.allowed_labels entries must be strings");
            schema.allowed_labels.push_back(v.get<std::string>());
        }
        if (!schema.allowed_labels.empty()) schema.label = true;
    }
    schema.count = obj.value("count", false);
    schema.quotes = obj.value("quotes", false);
    schema.rationale = obj.value("rationale", false);
    return schema;
}

}  // namespace

Codebook parse_codebook(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("codebook is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("codebook root must be a JSON object");

    Codebook cb;
    const auto construct = doc.find("construct");
    if (construct == doc.end() || !construct->is_object()) {
        throw SchemaError("codebook.construct must be an object");
    }
    cb.construct.name = get_string(*construct, "name", "construct");
    cb.construct.definition = get_string(*construct, "definition", "construct");
    if (trim(cb.construct.name).empty()) throw SchemaError("construct.name must be non-empty");

    if (const auto it = doc.find("indicators"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("codebook.indicators must be an array");
        for (const auto& v : *it) {
            if (!v.is_string()) throw SchemaError("codebook.indicators entries must be strings");
            cb.indicators.push_back(v.get<std::string>());
        }
    }
    if (const auto it = doc.find("levels"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("codebook.levels must be an array");
        std::set<std::string> seen;
        for (const auto& v : *it) {
            if (!v.is_object()) throw SchemaError("codebook.levels entries must be objects");
            Codebook::Level level;
            level.label = get_string(v, "label", "levels");
            level.criteria = get_string(v, "criteria", "levels");
            if (level.label.empty()) throw SchemaError("codebook level labels must be non-empty");
            if (!seen.insert(level.label).second) {
                throw SchemaError("duplicate level label '" + level.label + "'");
            }
            cb.levels.push_back(std::move(level));
        }
    }
    if (const auto it = doc.find("few_shot"); it != doc.end()) {
        if (!it->is_array()) throw SchemaError("codebook.few_shot must be an array");
        for (const auto& v : *it) {
            if (!v.is_object()) throw SchemaError("codebook.few_shot entries must be objects");
            Codebook::Example example;
            example.input = get_string(v, "input", "few_shot");
            example.expected_output = get_string(v, "expected_output", "few_shot");
            cb.few_shot.push_back(std::move(example));
        }
    }
    if (const auto it = doc.find("output_schema"); it != doc.end()) {
        cb.output_schema = schema_from_json(*it);
    }
    return cb;
}

Codebook load_codebook(const std::filesystem::path& path) {
    return parse_codebook(read_file(path));
}

namespace {

void append_output_contract(std::ostringstream& out, const extract::OutputSchema& schema) {
    if (!schema.expects_anything()) return;
    out << "Respond with a single JSON object containing exactly these fields:\n";
    if (schema.score) {
        out << "  \"score\": a number from " << format_number(schema.score->min) << " to "
            << format_number(schema.score->max) << "\n";
    }
    if (schema.label) {
        out << "  \"label\": ";
        if (schema.allowed_labels.empty()) {
            out << "a short category label";
        } else {
            out << "one of ";
            for (size_t i = 0; i < schema.allowed_labels.size(); ++i) {
                if (i > 0) out << (i + 1 == schema.allowed_labels.size() ? " or " : ", ");
                out << '"' << schema.allowed_labels[i] << '"';
            }
        }
        out << "\n";
    }
    if (schema.count) out << "  \"count\": the number of mentions, a non-negative integer\n";
    if (schema.quotes) out << "  \"quotes\": an array of short verbatim quotes from the material\n";
    if (schema.rationale) out << "  \"rationale\": a one-sentence justification\n";
    out << "Return only the JSON object, with no surrounding text.\n\n";
}

}  // namespace

PromptTemplate build_from_codebook(const Codebook& codebook) {
    if (trim(codebook.construct.name).empty()) {
        throw SchemaError("construct.name must be non-empty");
    }
    std::ostringstream out;
    out << "You are coding qualitative material for the construct \"" << codebook.construct.name
        << "\".\n";
    if (!codebook.construct.definition.empty()) {
        out << "Definition: " << codebook.construct.definition << "\n";
    }
    out << "\n";
    if (!codebook.levels.empty()) {
        out << "Score levels:\n";
        for (const auto& level : codebook.levels) {
            out << "  " << level.label << ": " << level.criteria << "\n";
        }
        out << "\n";
    }
    if (!codebook.indicators.empty()) {
        out << "Indicators to look for:\n";
        for (const auto& indicator : codebook.indicators) {
            out << "  - " << indicator << "\n";
        }
        out << "\n";
    }
    append_output_contract(out, codebook.output_schema);
    if (!codebook.few_shot.empty()) {
        out << "Examples:\n";
        for (const auto& example : codebook.few_shot) {
            out << "\nInput:\n" << example.input << "\nExpected output:\n"
                << example.expected_output << "\n";
        }
        out << "\n";
    }
    out << "Material to analyze:\n{{data}}\n";
    return make_template(codebook.construct.name, out.str());
}

namespace {

std::filesystem::path template_file(const std::filesystem::path& library_path,
                                    const std::string& name, const std::string& hash) {
    return library_path / name / (hash + ".txt");
}

}  // namespace

void save_template(const std::filesystem::path& library_path, const PromptTemplate& tmpl) {
    if (tmpl.name.empty()) throw SchemaError("template name must be non-empty");
    const auto path = template_file(library_path, tmpl.name, tmpl.version_hash);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
        if (read_file(path) != tmpl.body) {
            throw IntegrityError("library file " + path.string() +
                                 " holds different content for this hash");
        }
    } else {
        atomic_write_file(path, tmpl.body);
    }

    json line;
    line["name"] = tmpl.name;
    line["hash"] = tmpl.version_hash;
    line["saved_at"] = now_iso8601_utc();
    std::filesystem::create_directories(library_path, ec);
    std::ofstream index(library_path / "index.jsonl", std::ios::app | std::ios::binary);
    if (!index) throw IoError("cannot open " + (library_path / "index.jsonl").string());
    index << line.dump() << "\n";
    if (!index.flush()) throw IoError("cannot write " + (library_path / "index.jsonl").string());
}

std::vector<LibraryEntry> list_templates(const std::filesystem::path& library_path) {
    std::vector<LibraryEntry> entries;
    const auto index_path = library_path / "index.jsonl";
    std::error_code ec;
    if (!std::filesystem::exists(index_path, ec)) return entries;
    std::istringstream lines(read_file(index_path));
    std::string line;
    while (std::getline(lines, line)) {
        if (trim(line).empty()) continue;
        try {
            const json parsed = json::parse(line);
            entries.push_back({parsed.value("name", ""), parsed.value("hash", ""),
                               parsed.value("saved_at", "")});
        } catch (const json::parse_error&) {
            continue;  // a torn write must not hide the rest of the library
        }
    }
    return entries;
}

PromptTemplate load_template(const std::filesystem::path& library_path, const std::string& name,
                             const std::optional<std::string>& hash) {
    const auto entries = list_templates(library_path);
    std::optional<LibraryEntry> match;
    std::set<std::string> candidate_hashes;
    for (const auto& entry : entries) {  // oldest first; the last hit is newest
        if (entry.name != name) continue;
        if (hash && entry.hash.rfind(*hash, 0) != 0) continue;
        candidate_hashes.insert(entry.hash);
        match = entry;
    }
    if (!match) {
        throw NotFoundError("no template named '" + name + "'" +
                            (hash ? " with hash " + *hash : "") + " in " + library_path.string());
    }
    if (hash && candidate_hashes.size() > 1) {
        throw NotFoundError("hash prefix '" + *hash + "' is ambiguous for template '" + name + "'");
    }

    const auto path = template_file(library_path, match->name, match->hash);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        throw NotFoundError("library file missing: " + path.string());
    }
    std::string body = read_file(path);
    if (sha256_hex(body) != match->hash) {
        throw IntegrityError("stored template " + path.string() + " no longer matches its hash");
    }
    return make_template(match->name, std::move(body));
}

}  // namespace atomcode::prompt
