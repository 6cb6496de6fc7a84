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

#include "atomcode/segmenter.hpp"

#include <algorithm>
#include <cctype>

#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"

namespace atomcode::seg {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

/// Shrink [start, end) to exclude surrounding whitespace; empty result
/// collapses to start == end.
std::pair<size_t, size_t> shrink_span(std::string_view text, size_t start, size_t end) {
    while (start < end && is_space(text[start])) ++start;
    while (end > start && is_space(text[end - 1])) --end;
    return {start, end};
}

/// Line boundaries of the normalized text as [start, end) pairs excluding
/// the terminating newline.
std::vector<std::pair<size_t, size_t>> line_spans(std::string_view text) {
    std::vector<std::pair<size_t, size_t>> lines;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            lines.emplace_back(start, i);
            start = i + 1;
        }
    }
    return lines;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
    std::string_view input = raw;
    if (input.size() >= 3 && input.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        input.remove_prefix(3);
    }
    // CRLF and lone CR become LF.
    std::string unified;
    unified.reserve(input.size());
    for (size_t i = 0; i < input.size(); ++i) {
        if (input[i] == '\r') {
            unified.push_back('\n');
            if (i + 1 < input.size() && input[i + 1] == '\n') ++i;
        } else {
            unified.push_back(input[i]);
        }
    }
    // Strip trailing whitespace from every line so spans are stable across
    // editors that leave stray tabs and spaces.
    std::string out;
    out.reserve(unified.size());
    size_t line_start = 0;
    for (size_t i = 0; i <= unified.size(); ++i) {
        if (i == unified.size() || unified[i] == '\n') {
            std::string_view line(unified.data() + line_start, i - line_start);
            line = rtrim(line);
            out.append(line);
            if (i < unified.size()) out.push_back('\n');
            line_start = i + 1;
        }
    }
    return out;
}

Document load_document(const std::filesystem::path& path) {
    Document doc;
    doc.origin = path;
    doc.doc_id = path.stem().string();
    doc.text = normalize_text(read_file(path));
    return doc;
}

std::optional<std::string> detect_speaker_line(std::string_view line) {
    size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    const size_t label_start = i;
    auto label_char = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == ' ' || c == '_' ||
               c == '.' || c == '\'' || c == '-';
    };
    while (i < line.size() && label_char(line[i]) && i - label_start < 40) ++i;
    if (i == label_start) return std::nullopt;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    // The colon must end the marker: whitespace or end of line after it.
    if (i + 1 < line.size() && !is_space(line[i + 1])) return std::nullopt;
    const std::string_view label = rtrim(line.substr(label_start, i - label_start));
    if (label.empty()) return std::nullopt;
    return std::string(label);
}

std::vector<std::pair<size_t, size_t>> split_sentences(std::string_view text) {
    auto is_terminator = [](char c) { return c == '.' || c == '!' || c == '?'; };
    auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };

    std::vector<std::pair<size_t, size_t>> sentences;
    size_t start = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        size_t end = i + 1;
        while (end < n && is_closer(text[end])) ++end;
        size_t next = end;
        while (next < n && is_space(text[next])) ++next;
        const bool boundary =
            next == n ||
            (next > end && (std::isupper(static_cast<unsigned char>(text[next])) ||
                            std::isdigit(static_cast<unsigned char>(text[next]))));
        if (boundary) {
            auto [s, e] = shrink_span(text, start, end);
            if (s < e) sentences.emplace_back(s, e);
            start = next;
            i = next;
        } else {
            i = end;
        }
    }
    auto [s, e] = shrink_span(text, start, n);
    if (s < e) sentences.emplace_back(s, e);
    return sentences;
}

namespace {

void push_segment(std::vector<Segment>& out, const Document& doc, size_t start, size_t end) {
    auto [s, e] = shrink_span(doc.text, start, end);
    if (s >= e) return;  // empty pieces are dropped
    Segment segment;
    segment.doc_id = doc.doc_id;
    segment.index = out.size();
    segment.text = doc.text.substr(s, e - s);
    segment.span_start = s;
    segment.span_end = e;
    out.push_back(std::move(segment));
}

std::vector<Segment> split_paragraphs(const Document& doc) {
    std::vector<Segment> out;
    const auto lines = line_spans(doc.text);
    size_t para_start = std::string::npos;
    size_t para_end = 0;
    for (const auto& [ls, le] : lines) {
        const bool blank = ls == le;  // trailing whitespace already stripped
        if (blank) {
            if (para_start != std::string::npos) {
                push_segment(out, doc, para_start, para_end);
                para_start = std::string::npos;
            }
        } else {
            if (para_start == std::string::npos) para_start = ls;
            para_end = le;
        }
    }
    if (para_start != std::string::npos) push_segment(out, doc, para_start, para_end);
    return out;
}

std::vector<Segment> split_speaker_turns(const Document& doc, std::vector<std::string>& warnings) {
    const auto lines = line_spans(doc.text);
    std::vector<size_t> turn_starts;
    for (const auto& [ls, le] : lines) {
        if (detect_speaker_line(std::string_view(doc.text).substr(ls, le - ls))) {
            turn_starts.push_back(ls);
        }
    }
    std::vector<Segment> out;
    if (turn_starts.empty()) {
        warnings.push_back("no speaker lines detected in '" + doc.doc_id +
                           "'; emitting the whole document as one segment");
        push_segment(out, doc, 0, doc.text.size());
        return out;
    }
    // Content before the first speaker line becomes a leading segment.
    push_segment(out, doc, 0, turn_starts.front());
    for (size_t t = 0; t < turn_starts.size(); ++t) {
        const size_t end = t + 1 < turn_starts.size() ? turn_starts[t + 1] : doc.text.size();
        push_segment(out, doc, turn_starts[t], end);
    }
    return out;
}

std::vector<Segment> split_delimiter(const Document& doc, const std::string& token) {
    std::vector<Segment> out;
    size_t start = 0;
    size_t pos;
    while ((pos = doc.text.find(token, start)) != std::string::npos) {
        push_segment(out, doc, start, pos);
        start = pos + token.size();
    }
    push_segment(out, doc, start, doc.text.size());
    return out;
}

std::vector<Segment> split_sentence_groups(const Document& doc, size_t per_group) {
    const auto sentences = split_sentences(doc.text);
    std::vector<Segment> out;
    for (size_t i = 0; i < sentences.size(); i += per_group) {
        const size_t last = std::min(i + per_group, sentences.size()) - 1;
        push_segment(out, doc, sentences[i].first, sentences[last].second);
    }
    return out;
}

}  // namespace

SegmentationResult segment(const Document& doc, const SegmentationMode& mode) {
    if (trim(doc.text).empty()) {
        throw EmptyDocumentError("document '" + doc.doc_id + "' is empty after normalization");
    }
    SegmentationResult result;
    if (std::holds_alternative<Paragraph>(mode)) {
        result.segments = split_paragraphs(doc);
    } else if (std::holds_alternative<SpeakerTurn>(mode)) {
        result.segments = split_speaker_turns(doc, result.warnings);
    } else if (const auto* d = std::get_if<Delimiter>(&mode)) {
        if (d->token.empty()) throw SchemaError("delimiter token must be non-empty");
        result.segments = split_delimiter(doc, d->token);
    } else if (const auto* s = std::get_if<SentenceCount>(&mode)) {
        if (s->n < 1) throw SchemaError("sentence count must be >= 1");
        result.segments = split_sentence_groups(doc, s->n);
    } else {
        std::vector<Segment> out;
        push_segment(out, doc, 0, doc.text.size());
        result.segments = std::move(out);
    }
    return result;
}

SegmentationMode mode_from_string(const std::string& name, const std::string& delimiter,
                                  size_t sentences) {
    if (name == "paragraph") return Paragraph{};
    if (name == "speaker") return SpeakerTurn{};
    if (name == "delimiter") {
        if (delimiter.empty()) throw SchemaError("delimiter mode requires --delimiter");
        return Delimiter{delimiter};
    }
    if (name == "sentences") {
        if (sentences < 1) throw SchemaError("sentences mode requires --sentences >= 1");
        return SentenceCount{sentences};
    }
    if (name == "whole") return EntireFile{};
    throw SchemaError("unknown segmentation mode: '" + name + "'");
}

std::string mode_name(const SegmentationMode& mode) {
    if (std::holds_alternative<Paragraph>(mode)) return "paragraph";
    if (std::holds_alternative<SpeakerTurn>(mode)) return "speaker";
    if (std::holds_alternative<Delimiter>(mode)) return "delimiter";
    if (std::holds_alternative<SentenceCount>(mode)) return "sentences";
    return "whole";
}

store::SegmentTable to_table(const std::vector<Segment>& segments,
                             const std::map<std::string, std::string>& context_defaults) {
    std::vector<store::ColumnSpec> columns;
    columns.push_back(store::column_from_name("doc_id"));
    columns.push_back(store::column_from_name("segment_index"));
    columns.push_back(store::column_from_name("data"));
    for (const auto& [name, value] : context_defaults) {
        (void)value;
        if (!store::valid_column_name(name)) {
            throw SchemaError("invalid context column name: '" + name + "'");
        }
        columns.push_back(store::column_from_name(name));
    }

    std::vector<store::Row> rows;
    rows.reserve(segments.size());
    for (const auto& segment : segments) {
        store::Row row;
        row.index = rows.size();
        row.doc_id = segment.doc_id;
        row.values["doc_id"] = segment.doc_id;
        row.values["segment_index"] = std::to_string(segment.index);
        row.values["data"] = segment.text;
        for (const auto& [name, value] : context_defaults) {
            row.values[name] = value;
        }
        rows.push_back(std::move(row));
    }
    return store::SegmentTable(std::move(columns), std::move(rows));
}

}  // namespace atomcode::seg
