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

#include "atomcode/table.hpp"

#include <algorithm>
#include <set>

#include "atomcode/csv.hpp"
#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"

namespace atomcode::store {

const char* to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::id: return "id";
        case ColumnRole::data: return "data";
        case ColumnRole::context: return "context";
        case ColumnRole::output: return "output";
    }
    return "context";
}

const char* to_string(CellOutput::Status s) {
    switch (s) {
        case CellOutput::Status::ok: return "ok";
        case CellOutput::Status::error: return "error";
        case CellOutput::Status::skipped: return "skipped";
    }
    return "error";
}

CellOutput::Status cell_status_from_string(const std::string& s) {
    if (s == "ok") return CellOutput::Status::ok;
    if (s == "skipped") return CellOutput::Status::skipped;
    if (s == "error") return CellOutput::Status::error;
    throw FormatError("unknown cell status: " + s);
}

namespace {

bool name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_' || c == ':' || c == '.' || c == '-';
}

bool label_char(char c) {
    return name_char(c) && c != ':';
}

}  // namespace

bool valid_column_name(const std::string& name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), name_char);
}

std::optional<OutputColumnName> parse_output_column(const std::string& name) {
    // out:<label>:<pass>, label and pass non-empty and colon-free.
    constexpr std::string_view prefix = "out:";
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) {
        return std::nullopt;
    }
    const std::string rest = name.substr(prefix.size());
    const size_t sep = rest.rfind(':');
    if (sep == std::string::npos || sep == 0 || sep + 1 == rest.size()) {
        return std::nullopt;
    }
    OutputColumnName out;
    out.label = rest.substr(0, sep);
    out.pass_tag = rest.substr(sep + 1);
    if (!std::all_of(out.label.begin(), out.label.end(), label_char)) return std::nullopt;
    if (!std::all_of(out.pass_tag.begin(), out.pass_tag.end(), label_char)) return std::nullopt;
    return out;
}

ColumnSpec column_from_name(const std::string& name) {
    ColumnSpec spec;
    spec.name = name;
    if (name == "id" || name == "doc_id" || name == "segment_index") {
        spec.role = ColumnRole::id;
    } else if (name == "data") {
        spec.role = ColumnRole::data;
    } else if (auto out = parse_output_column(name)) {
        spec.role = ColumnRole::output;
        spec.pass_tag = out->pass_tag;
    } else {
        spec.role = ColumnRole::context;
    }
    return spec;
}

SegmentTable::SegmentTable(std::vector<ColumnSpec> columns, std::vector<Row> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
    validate();
}

void SegmentTable::validate() {
    std::set<std::string> seen;
    const std::string* data = nullptr;
    for (const auto& col : columns_) {
        if (!valid_column_name(col.name)) {
            throw SchemaError("invalid column name: '" + col.name + "'");
        }
        if (!seen.insert(col.name).second) {
            throw SchemaError("duplicate column name: '" + col.name + "'");
        }
        if (col.role == ColumnRole::data) {
            if (data) throw SchemaError("more than one data column");
            data = &col.name;
        }
    }
    if (!data) throw SchemaError("table has no data column");
    data_column_ = *data;

    for (size_t i = 0; i < rows_.size(); ++i) {
        const Row& row = rows_[i];
        if (row.index != i) {
            throw SchemaError("row indices not contiguous at row " + std::to_string(i));
        }
        if (row.values.size() != columns_.size()) {
            throw SchemaError("row " + std::to_string(i) + " has " +
                              std::to_string(row.values.size()) + " values, expected " +
                              std::to_string(columns_.size()));
        }
        for (const auto& col : columns_) {
            if (row.values.find(col.name) == row.values.end()) {
                throw SchemaError("row " + std::to_string(i) + " missing value for column '" +
                                  col.name + "'");
            }
        }
    }
}

bool SegmentTable::has_column(const std::string& name) const {
    return find_column(name) != nullptr;
}

const ColumnSpec* SegmentTable::find_column(const std::string& name) const {
    for (const auto& col : columns_) {
        if (col.name == name) return &col;
    }
    return nullptr;
}

const std::string& SegmentTable::cell(size_t row, const std::string& column) const {
    if (row >= rows_.size()) {
        throw IndexError("row index " + std::to_string(row) + " out of range (" +
                         std::to_string(rows_.size()) + " rows)");
    }
    auto it = rows_[row].values.find(column);
    if (it == rows_[row].values.end()) {
        throw IndexError("no column named '" + column + "'");
    }
    return it->second;
}

void SegmentTable::set_cell(size_t row, const std::string& column, std::string value) {
    if (row >= rows_.size()) {
        throw IndexError("row index " + std::to_string(row) + " out of range (" +
                         std::to_string(rows_.size()) + " rows)");
    }
    auto it = rows_[row].values.find(column);
    if (it == rows_[row].values.end()) {
        throw IndexError("no column named '" + column + "'");
    }
    it->second = std::move(value);
}

void SegmentTable::add_column(const ColumnSpec& spec) {
    if (!valid_column_name(spec.name)) {
        throw SchemaError("invalid column name: '" + spec.name + "'");
    }
    if (has_column(spec.name)) {
        throw SchemaError("column already exists: '" + spec.name + "'");
    }
    if (spec.role == ColumnRole::data) {
        throw SchemaError("table already has a data column");
    }
    columns_.push_back(spec);
    for (auto& row : rows_) {
        row.values.emplace(spec.name, "");
    }
}

bool SegmentTable::operator==(const SegmentTable& other) const {
    if (columns_.size() != other.columns_.size() || rows_.size() != other.rows_.size()) {
        return false;
    }
    for (size_t i = 0; i < columns_.size(); ++i) {
        const auto& a = columns_[i];
        const auto& b = other.columns_[i];
        if (a.name != b.name || a.role != b.role || a.pass_tag != b.pass_tag) return false;
    }
    for (size_t i = 0; i < rows_.size(); ++i) {
        const auto& a = rows_[i];
        const auto& b = other.rows_[i];
        if (a.index != b.index || a.doc_id != b.doc_id || a.values != b.values) return false;
    }
    return true;
}

SegmentTable load_table(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("table file not found: " + path.string());
    }
    std::string text = read_file(path);
    // Strip a UTF-8 BOM; spreadsheet exports commonly prepend one.
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        text.erase(0, 3);
    }
    auto records = csv::parse(text);
    // Drop fully blank records (stray empty lines).
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [](const std::vector<std::string>& r) {
                                     return r.size() == 1 && r[0].empty();
                                 }),
                  records.end());
    if (records.empty()) {
        throw FormatError("missing header row: " + path.string());
    }
    const auto& header = records.front();
    std::vector<ColumnSpec> columns;
    columns.reserve(header.size());
    for (const auto& name : header) {
        columns.push_back(column_from_name(name));
    }

    std::vector<Row> rows;
    rows.reserve(records.size() - 1);
    for (size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size()) {
            throw FormatError("row " + std::to_string(r) + " has " +
                              std::to_string(rec.size()) + " fields, expected " +
                              std::to_string(header.size()) + ": " + path.string());
        }
        Row row;
        row.index = r - 1;
        for (size_t c = 0; c < header.size(); ++c) {
            row.values[header[c]] = rec[c];
        }
        if (auto it = row.values.find("doc_id"); it != row.values.end()) {
            row.doc_id = it->second;
        }
        rows.push_back(std::move(row));
    }
    SegmentTable table(std::move(columns), std::move(rows));
    table.set_source_path(path);
    return table;
}

std::string serialize_table(const SegmentTable& table) {
    std::vector<std::vector<std::string>> records;
    records.reserve(table.rows().size() + 1);
    std::vector<std::string> header;
    header.reserve(table.columns().size());
    for (const auto& col : table.columns()) header.push_back(col.name);
    records.push_back(std::move(header));
    for (const auto& row : table.rows()) {
        std::vector<std::string> rec;
        rec.reserve(table.columns().size());
        for (const auto& col : table.columns()) {
            rec.push_back(row.values.at(col.name));
        }
        records.push_back(std::move(rec));
    }
    return csv::serialize(records);
}

void save_table(const SegmentTable& table, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_table(table));
}

SegmentTable write_outputs(const SegmentTable& table, const std::string& column,
                           const std::map<size_t, CellOutput>& cells) {
    if (!parse_output_column(column)) {
        throw SchemaError("output column must follow out:<label>:<pass>: '" + column + "'");
    }
    for (const auto& [index, cell] : cells) {
        if (index >= table.row_count()) {
            throw IndexError("output cell index " + std::to_string(index) +
                             " out of range (" + std::to_string(table.row_count()) + " rows)");
        }
        if (cell.status == CellOutput::Status::ok && cell.raw_text.empty()) {
            throw SchemaError("ok cell with empty text at row " + std::to_string(index));
        }
    }
    SegmentTable updated = table;
    if (!updated.has_column(column)) {
        updated.add_column(column_from_name(column));
    }
    for (const auto& [index, cell] : cells) {
        updated.set_cell(index, column,
                         cell.status == CellOutput::Status::ok ? cell.raw_text : "");
    }
    if (table.source_path().empty()) {
        throw IoError("table has no source path to persist to");
    }
    save_table(updated, table.source_path());
    return updated;
}

}  // namespace atomcode::store
