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

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace atomcode {

/// SHA-256 of the input bytes as 64 lowercase hex characters.
std::string sha256_hex(std::string_view bytes);

/// First 12 hex characters of sha256_hex; used for display, never for lookup.
std::string short_hash(std::string_view bytes);

/// Random (version 4) UUID in canonical 8-4-4-4-12 form.
std::string new_uuid();

/// Current time as UTC ISO-8601 with millisecond precision,
/// e.g. "2026-08-14T09:15:02.123Z". Fixed width, so lexicographic order
/// equals chronological order.
std::string now_iso8601_utc();
std::string to_iso8601_utc(std::chrono::system_clock::time_point tp);

std::string_view ltrim(std::string_view s);
std::string_view rtrim(std::string_view s);
std::string_view trim(std::string_view s);

/// Collapse every whitespace run to a single space and trim the ends.
std::string normalize_whitespace(std::string_view s);

/// Parse a whole string as a decimal integer; nullopt on any stray character.
std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_number(std::string_view s);

/// Render a double with the shortest round-trippable decimal form
/// ("4" not "4.000000", "4.5" not "4.50").
std::string format_number(double v);

/// Read a whole file into a string. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Write bytes to a temp file in the target directory, then rename over
/// the destination. Readers never observe a half-written file.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace atomcode
