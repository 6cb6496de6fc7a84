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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace atomcode::store {

/// Column roles in the tabular workspace. Each row is one analytic unit:
/// exactly one `data` column holds the unit text, `context` columns carry
/// auxiliary fields, `output` columns hold model responses, `id` columns
/// identify the unit.
enum class ColumnRole { id, data, context, output };

const char* to_string(ColumnRole role);

struct ColumnSpec {
    std::string name;
    ColumnRole role = ColumnRole::context;
    /// For output columns: the trailing pass tag of `out:<label>:<pass>`.
    std::string pass_tag;
};

/// Parsed form of an output column name `out:<label>:<pass>`.
struct OutputColumnName {
    std::string label;
    std::string pass_tag;
};

/// Validates the `out:<label>:<pass>` grammar; nullopt when it doesn't match.
std::optional<OutputColumnName> parse_output_column(const std::string& name);

/// True when `name` is non-empty and drawn from [A-Za-z0-9_:.-].
bool valid_column_name(const std::string& name);

/// Infer a column's role from its name: `id`/`doc_id`/`segment_index` are id
/// columns, `data` is the data column, `out:<label>:<pass>` is an output
/// column, everything else is treated as context.
ColumnSpec column_from_name(const std::string& name);

struct Row {
    size_t index = 0;  // zero-based, contiguous
    std::string doc_id;
    std::map<std::string, std::string> values;  // keyed by column name
};

struct CellOutput {
    std::string raw_text;
    enum class Status { ok, error, skipped } status = Status::ok;
    std::string run_id;
};

const char* to_string(CellOutput::Status s);
CellOutput::Status cell_status_from_string(const std::string& s);

/// The tabular workspace: one row per analytic unit, columns typed by role.
/// Persisted as UTF-8 CSV with a header row, RFC 4180 quoting and LF record
/// separators.
class SegmentTable {
public:
    SegmentTable() = default;
    SegmentTable(std::vector<ColumnSpec> columns, std::vector<Row> rows);

    const std::vector<ColumnSpec>& columns() const { return columns_; }
    const std::vector<Row>& rows() const { return rows_; }
    const std::filesystem::path& source_path() const { return source_path_; }
    void set_source_path(std::filesystem::path p) { source_path_ = std::move(p); }

    size_t row_count() const { return rows_.size(); }
    bool has_column(const std::string& name) const;
    const ColumnSpec* find_column(const std::string& name) const;
    /// Name of the unique data column.
    const std::string& data_column() const { return data_column_; }

    const std::string& cell(size_t row, const std::string& column) const;
    void set_cell(size_t row, const std::string& column, std::string value);

    /// Appends an empty column. Throws SchemaError on a duplicate or invalid
    /// name.
    void add_column(const ColumnSpec& spec);

    bool operator==(const SegmentTable& other) const;

private:
    void validate();

    std::vector<ColumnSpec> columns_;
    std::vector<Row> rows_;
    std::string data_column_;
    std::filesystem::path source_path_;
};

/// Load a CSV table. Column roles are inferred from the header names.
/// Throws FormatError on a missing header or ragged rows, SchemaError when
/// no data column exists or names are duplicated/invalid.
SegmentTable load_table(const std::filesystem::path& path);

/// Serialize and atomically persist the table to `path`
/// (write-temp-then-rename).
void save_table(const SegmentTable& table, const std::filesystem::path& path);

/// In-memory form of save_table, exposed for byte-level tests.
std::string serialize_table(const SegmentTable& table);

/// Write output cells into `column`, creating the column if absent, then
/// persist atomically to the table's source path. Only the named cells
/// change; a cell with status ok carries its raw text, error and skipped
/// cells are stored empty. Throws SchemaError on bad column grammar and
/// IndexError on an out-of-range row index.
SegmentTable write_outputs(const SegmentTable& table, const std::string& column,
                           const std::map<size_t, CellOutput>& cells);

}  // namespace atomcode::store
