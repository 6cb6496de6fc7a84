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

#include "atomcode/csv.hpp"

#include "atomcode/errors.hpp"

namespace atomcode::csv {

std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // true once the current record has content
    size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };

    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw FormatError("csv: quote inside unquoted field at line " +
                                      std::to_string(line));
                }
                in_quotes = true;
                field_started = true;
                ++i;
                break;
            case ',':
                end_field();
                field_started = true;
                ++i;
                break;
            case '\r':
                if (i + 1 < n && text[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                end_record();
                ++line;
                ++i;
                break;
            default:
                field.push_back(c);
                field_started = true;
                ++i;
                break;
        }
    }
    if (in_quotes) {
        throw FormatError("csv: unterminated quoted field at line " + std::to_string(line));
    }
    // Final record without trailing newline.
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

std::string escape_field(std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\r' || c == '\n') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string serialize(const std::vector<std::vector<std::string>>& records) {
    std::string out;
    for (const auto& record : records) {
        for (size_t i = 0; i < record.size(); ++i) {
            if (i) out.push_back(',');
            out += escape_field(record[i]);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace atomcode::csv
