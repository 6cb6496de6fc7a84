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

#include <string>
#include <string_view>
#include <vector>

namespace atomcode::csv {

/// Parse RFC 4180 CSV text into records of fields. Quoted fields may contain
/// commas, quotes (doubled) and line breaks; CRLF record separators are
/// accepted. A trailing newline does not produce an empty record.
/// Throws FormatError on a bare quote mid-field or an unterminated quote.
std::vector<std::vector<std::string>> parse(std::string_view text);

/// Serialize records as RFC 4180 with LF record separators. Fields are quoted
/// only when they contain a comma, quote, CR or LF.
std::string serialize(const std::vector<std::vector<std::string>>& records);

std::string escape_field(std::string_view field);

}  // namespace atomcode::csv
