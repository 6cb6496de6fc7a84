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
#include <variant>
#include <vector>

#include "atomcode/table.hpp"

namespace atomcode::seg {

/// A source document after normalization: CRLF/CR collapsed to LF, UTF-8 BOM
/// stripped, trailing whitespace removed from every line. Segment spans index
/// into this normalized text.
struct Document {
    std::string doc_id;
    std::string text;
    std::filesystem::path origin;
};

/// Normalize raw file content per the rules above.
std::string normalize_text(std::string_view raw);

/// Read a UTF-8 text file; doc_id defaults to the file stem.
Document load_document(const std::filesystem::path& path);

/// One analytic unit. `span` is the half-open [start, end) byte range in the
/// normalized document; `text` equals exactly that substring and carries no
/// leading or trailing whitespace.
struct Segment {
    std::string doc_id;
    size_t index = 0;  // position within its document
    std::string text;
    size_t span_start = 0;
    size_t span_end = 0;
};

struct Paragraph {};
struct SpeakerTurn {};
struct Delimiter {
    std::string token;  // non-empty
};
struct SentenceCount {
    size_t n = 1;  // sentences per segment, >= 1
};
struct EntireFile {};

using SegmentationMode = std::variant<Paragraph, SpeakerTurn, Delimiter, SentenceCount, EntireFile>;

SegmentationMode mode_from_string(const std::string& name, const std::string& delimiter,
                                  size_t sentences);
std::string mode_name(const SegmentationMode& mode);

struct SegmentationResult {
    std::vector<Segment> segments;
    std::vector<std::string> warnings;
};

/// Split a document into analytic units. EntireFile yields exactly one
/// segment holding the whole trimmed document. Empty pieces are dropped.
/// Throws EmptyDocumentError when nothing remains after normalization;
/// SpeakerTurn with no detected speaker line falls back to one segment and
/// records a warning.
SegmentationResult segment(const Document& doc, const SegmentationMode& mode);

/// If the line opens with a transcript speaker marker ("P01: ..."), return
/// the label without the colon. The label starts the line (leading
/// whitespace tolerated), runs at most 40 characters of letters, digits,
/// space, underscore, period, apostrophe or hyphen, and its colon must be
/// followed by whitespace or end the line; a clock time mid-sentence never
/// matches.
std::optional<std::string> detect_speaker_line(std::string_view line);

/// Split sentences with the boundary heuristic used by SentenceCount:
/// a terminator (. ! ?) optionally followed by a closing quote or bracket,
/// then whitespace and an uppercase letter or digit (or end of text).
/// No abbreviation dictionary; "Dr. Smith" splits. Exposed for tests.
std::vector<std::pair<size_t, size_t>> split_sentences(std::string_view text);

/// Assemble segments (from one or more documents, in ingestion order) into a
/// table with columns doc_id, segment_index, data, plus one constant-filled
/// context column per entry in `context_defaults`.
store::SegmentTable to_table(const std::vector<Segment>& segments,
                             const std::map<std::string, std::string>& context_defaults = {});

}  // namespace atomcode::seg
