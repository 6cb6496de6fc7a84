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

#include <numeric>

#include "atomcode/errors.hpp"
#include "atomcode/segmenter.hpp"
#include "atomcode/util.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace atomcode;
using namespace atomcode::seg;
using testsupport::Rng;
using testsupport::TempDir;

namespace {

Document doc(const std::string& text, const std::string& id = "d1") {
    Document d;
    d.doc_id = id;
    d.text = normalize_text(text);
    return d;
}

std::vector<std::string> texts(const SegmentationResult& result) {
    std::vector<std::string> out;
    for (const auto& s : result.segments) out.push_back(s.text);
    return out;
}

/// Segment invariants that hold for every mode: monotone non-overlapping
/// spans, text == substring at span, non-empty trimmed text, and the
/// uncovered gaps contain nothing but whitespace (and the delimiter token,
/// when one is in play).
void check_invariants(const Document& d, const SegmentationResult& result,
                      const std::string& delimiter = "") {
    size_t prev_end = 0;
    size_t expected_index = 0;
    std::string gaps;
    for (const auto& s : result.segments) {
        CHECK(s.index == expected_index++);
        CHECK(s.span_start >= prev_end);
        CHECK(s.span_end > s.span_start);
        CHECK(s.span_end <= d.text.size());
        CHECK(s.text == d.text.substr(s.span_start, s.span_end - s.span_start));
        CHECK_FALSE(s.text.empty());
        CHECK(trim(s.text) == s.text);
        gaps += d.text.substr(prev_end, s.span_start - prev_end);
        prev_end = s.span_end;
    }
    gaps += d.text.substr(prev_end);
    if (!delimiter.empty()) {
        size_t pos;
        while ((pos = gaps.find(delimiter)) != std::string::npos) {
            gaps.replace(pos, delimiter.size(), " ");
        }
    }
    CHECK(trim(gaps).empty());
}

}  // namespace

TEST_CASE("normalize_text canonicalizes line endings and trailing space") {
    CHECK(normalize_text("a\r\nb\rc\n") == "a\nb\nc\n");
    CHECK(normalize_text("line one   \nline two\t\n") == "line one\nline two\n");
    CHECK(normalize_text("\xEF\xBB\xBF" "hello") == "hello");
}

TEST_CASE("paragraph mode splits on blank lines") {
    const auto d = doc("A\n\nB");
    const auto result = segment(d, Paragraph{});
    CHECK(texts(result) == std::vector<std::string>{"A", "B"});
    check_invariants(d, result);
}

TEST_CASE("paragraph mode joins adjacent lines and drops blank runs") {
    const auto d = doc("first line\nsecond line\n\n\n   \nnext para\n");
    const auto result = segment(d, Paragraph{});
    REQUIRE(result.segments.size() == 2);
    CHECK(result.segments[0].text == "first line\nsecond line");
    CHECK(result.segments[1].text == "next para");
    check_invariants(d, result);
}

TEST_CASE("entire file mode yields exactly one segment") {
    const auto d = doc("  some text\nwith lines\n");
    const auto result = segment(d, EntireFile{});
    REQUIRE(result.segments.size() == 1);
    CHECK(result.segments[0].index == 0);
    CHECK(result.segments[0].text == "some text\nwith lines");
    check_invariants(d, result);
}

TEST_CASE("empty document is an error in every mode") {
    const auto d = doc("   \n\n  \n");
    CHECK_THROWS_AS(segment(d, Paragraph{}), EmptyDocumentError);
    CHECK_THROWS_AS(segment(d, EntireFile{}), EmptyDocumentError);
    CHECK_THROWS_AS(segment(d, SpeakerTurn{}), EmptyDocumentError);
    CHECK_THROWS_AS(segment(d, Delimiter{"---"}), EmptyDocumentError);
    CHECK_THROWS_AS(segment(d, SentenceCount{2}), EmptyDocumentError);
}

TEST_CASE("speaker mode groups lines into turns") {
    const auto d = doc("INTERVIEWER: hi\nP01: hello\nmore words\nINTERVIEWER: why?");
    const auto result = segment(d, SpeakerTurn{});
    REQUIRE(result.segments.size() == 3);
    CHECK(result.segments[0].text == "INTERVIEWER: hi");
    CHECK(result.segments[1].text == "P01: hello\nmore words");
    CHECK(result.segments[2].text == "INTERVIEWER: why?");
    CHECK(result.warnings.empty());
    check_invariants(d, result);
}

TEST_CASE("speaker mode keeps preamble text before the first turn") {
    const auto d = doc("Transcript of session 4.\n\nP01: I think so.\n");
    const auto result = segment(d, SpeakerTurn{});
    REQUIRE(result.segments.size() == 2);
    CHECK(result.segments[0].text == "Transcript of session 4.");
    CHECK(result.segments[1].text == "P01: I think so.");
}

TEST_CASE("speaker mode without speakers falls back to one segment") {
    const auto d = doc("no transcript markers here\njust prose\n");
    const auto result = segment(d, SpeakerTurn{});
    REQUIRE(result.segments.size() == 1);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("speaker") != std::string::npos);
}

TEST_CASE("detect_speaker_line follows the transcript pattern") {
    CHECK(detect_speaker_line("P01: hello") == "P01");
    CHECK(detect_speaker_line("  Interviewer:  so tell me") == "Interviewer");
    CHECK(detect_speaker_line("Speaker 1:") == "Speaker 1");
    CHECK(detect_speaker_line("Dr. O'Neil-Smith: yes") == "Dr. O'Neil-Smith");
    CHECK_FALSE(detect_speaker_line("it was 3:45pm").has_value());
    CHECK_FALSE(detect_speaker_line("http://example.com").has_value());
    CHECK_FALSE(detect_speaker_line("no colon here").has_value());
    CHECK_FALSE(detect_speaker_line(":").has_value());
    CHECK_FALSE(detect_speaker_line(std::string(41, 'a') + ": too long").has_value());
    CHECK(detect_speaker_line(std::string(40, 'a') + ": fits") == std::string(40, 'a'));
}

TEST_CASE("delimiter mode splits on the literal token") {
    const auto d = doc("part one\n---\npart two\n---\npart three");
    const auto result = segment(d, Delimiter{"---"});
    CHECK(texts(result) == std::vector<std::string>{"part one", "part two", "part three"});
    check_invariants(d, result, "---");
}

TEST_CASE("delimiter mode drops empty pieces") {
    const auto d = doc("---a------b---");
    const auto result = segment(d, Delimiter{"---"});
    CHECK(texts(result) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("delimiter absent from the text yields one segment") {
    const auto d = doc("all one piece");
    const auto result = segment(d, Delimiter{"##"});
    REQUIRE(result.segments.size() == 1);
    CHECK(result.segments[0].text == "all one piece");
}

TEST_CASE("sentence mode groups n sentences per segment") {
    const auto d = doc("One is here. Two is here! Three is here? Four is here. Five.");
    const auto result = segment(d, SentenceCount{2});
    REQUIRE(result.segments.size() == 3);
    CHECK(result.segments[0].text == "One is here. Two is here!");
    CHECK(result.segments[1].text == "Three is here? Four is here.");
    CHECK(result.segments[2].text == "Five.");
    check_invariants(d, result);
}

TEST_CASE("sentence boundaries handle closers and resist decimals") {
    const auto spans = split_sentences("He said \"stop.\" Then 3.5 things happened. Done.");
    REQUIRE(spans.size() == 3);
    CHECK(spans[0].second > spans[0].first);

    const auto one = split_sentences("only one sentence without terminator");
    CHECK(one.size() == 1);

    // Lowercase continuation does not split.
    const auto lower = split_sentences("e.g. this stays joined. Next one.");
    CHECK(lower.size() == 2);
}

TEST_CASE("sentence mode with n=1 emits one segment per sentence") {
    const auto d = doc("A first. A second. A third.");
    const auto result = segment(d, SentenceCount{1});
    CHECK(result.segments.size() == 3);
    check_invariants(d, result);
}

TEST_CASE("to_table assembles rows in ingestion order") {
    const auto d1 = doc("A\n\nB", "alpha");
    const auto d2 = doc("C", "beta");
    auto segs = segment(d1, Paragraph{}).segments;
    const auto more = segment(d2, Paragraph{}).segments;
    segs.insert(segs.end(), more.begin(), more.end());

    const auto table = to_table(segs, {{"context_1", "study-A"}});
    REQUIRE(table.row_count() == 3);
    REQUIRE(table.columns().size() == 4);
    CHECK(table.columns()[0].name == "doc_id");
    CHECK(table.columns()[1].name == "segment_index");
    CHECK(table.columns()[2].name == "data");
    CHECK(table.columns()[3].name == "context_1");
    CHECK(table.cell(0, "doc_id") == "alpha");
    CHECK(table.cell(0, "segment_index") == "0");
    CHECK(table.cell(1, "segment_index") == "1");
    CHECK(table.cell(2, "doc_id") == "beta");
    CHECK(table.cell(2, "segment_index") == "0");  // indices restart per document
    for (size_t r = 0; r < 3; ++r) CHECK(table.cell(r, "context_1") == "study-A");
}

TEST_CASE("load_document uses the file stem as doc_id") {
    TempDir dir;
    atomic_write_file(dir.file("session_04.txt"), "hello\r\nworld\r\n");
    const auto d = load_document(dir.file("session_04.txt"));
    CHECK(d.doc_id == "session_04");
    CHECK(d.text == "hello\nworld\n");
}

TEST_CASE("segmentation is lossless modulo separators on random documents") {
    Rng rng(42);
    const std::vector<std::string> words{"alpha", "beta",  "gamma", "delta", "Echo",
                                         "Foxes", "run",   "fast",  "Seven", "items",
                                         "now",   "P01:",  "said",  "3.5",   "things"};
    int checked = 0;
    for (int iter = 0; iter < 120; ++iter) {
        std::string text;
        const size_t pieces = 1 + rng.below(40);
        for (size_t i = 0; i < pieces; ++i) {
            switch (rng.below(6)) {
                case 0: text += "\n\n"; break;
                case 1: text += "\n"; break;
                case 2: text += ". "; break;
                case 3: text += "---"; break;
                default: text += words[rng.below(words.size())] + " "; break;
            }
        }
        const Document d = doc(text);
        if (trim(d.text).empty()) continue;
        ++checked;
        check_invariants(d, segment(d, Paragraph{}));
        check_invariants(d, segment(d, EntireFile{}));
        check_invariants(d, segment(d, SpeakerTurn{}));
        check_invariants(d, segment(d, Delimiter{"---"}), "---");
        check_invariants(d, segment(d, SentenceCount{1 + rng.below(4)}));
        CHECK(segment(d, EntireFile{}).segments.size() == 1);
        // Determinism: same input, same output.
        const auto a = segment(d, Paragraph{});
        const auto b = segment(d, Paragraph{});
        CHECK(texts(a) == texts(b));
    }
    CHECK(checked > 80);
}

TEST_CASE("mode_from_string parses the CLI names") {
    CHECK(std::holds_alternative<Paragraph>(mode_from_string("paragraph", "", 1)));
    CHECK(std::holds_alternative<SpeakerTurn>(mode_from_string("speaker", "", 1)));
    CHECK(std::holds_alternative<EntireFile>(mode_from_string("whole", "", 1)));
    const auto delim = mode_from_string("delimiter", "###", 1);
    CHECK(std::get<Delimiter>(delim).token == "###");
    const auto sentences = mode_from_string("sentences", "", 3);
    CHECK(std::get<SentenceCount>(sentences).n == 3);
    CHECK_THROWS_AS(mode_from_string("bogus", "", 1), SchemaError);
    CHECK_THROWS_AS(mode_from_string("delimiter", "", 1), SchemaError);
    CHECK_THROWS_AS(mode_from_string("sentences", "", 0), SchemaError);
}
