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

#include "atomcode/errors.hpp"
#include "atomcode/prompt.hpp"
#include "atomcode/util.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace atomcode;
using namespace atomcode::prompt;
using testsupport::Rng;
using testsupport::TempDir;

namespace {

store::Row make_row(std::map<std::string, std::string> values, size_t index = 0) {
    store::Row row;
    row.index = index;
    row.doc_id = "d1";
    row.values = std::move(values);
    return row;
}

Codebook binary_codebook() {
    Codebook cb;
    cb.construct.name = "Development";
    cb.construct.definition = "Mentions of growth over time.";
    cb.indicators = {"references to change", "references to stages"};
    cb.output_schema.label = true;
    cb.output_schema.allowed_labels = {"Present", "Absent"};
    cb.output_schema.count = true;
    cb.output_schema.quotes = true;
    return cb;
}

}  // namespace

TEST_CASE("render substitutes the data placeholder") {
    const auto tmpl = make_template("t", "Code this: {{data}}");
    CHECK(render(tmpl, make_row({{"data", "hello"}})) == "Code this: hello");
}

TEST_CASE("render substitutes data and context placeholders") {
    const auto tmpl = make_template("t", "Grade: {{context_1}}\nText: {{data}}");
    const auto row = make_row({{"data", "the essay"}, {"context_1", "Grade 8"}});
    CHECK(render(tmpl, row) == "Grade: Grade 8\nText: the essay");
}

TEST_CASE("render fails on a placeholder with no column") {
    const auto tmpl = make_template("t", "{{data}} {{context_2}}");
    const auto row = make_row({{"data", "x"}, {"context_1", "y"}});
    CHECK_THROWS_AS(render(tmpl, row), MissingFieldError);
}

TEST_CASE("render fails on an empty data cell") {
    const auto tmpl = make_template("t", "{{data}}");
    CHECK_THROWS_AS(render(tmpl, make_row({{"data", ""}})), EmptyDataError);
    CHECK_THROWS_AS(render(tmpl, make_row({{"data", "   "}})), EmptyDataError);
}

TEST_CASE("placeholders in cell values are never re-expanded") {
    const auto tmpl = make_template("t", "{{data}} and {{context_1}}");
    const auto row = make_row({{"data", "literal {{context_1}} stays"}, {"context_1", "C"}});
    CHECK(render(tmpl, row) == "literal {{context_1}} stays and C");
}

TEST_CASE("template requires exactly one data slot") {
    CHECK_THROWS_AS(make_template("t", "no placeholders"), SchemaError);
    CHECK_THROWS_AS(make_template("t", "{{data}} twice {{data}}"), SchemaError);
    CHECK_NOTHROW(make_template("t", "{{data}} and {{data }} brace noise"));
}

TEST_CASE("template hash and declared fields derive from the body") {
    const auto tmpl = make_template("t", "{{context_1}} {{data}} {{context_1}}");
    CHECK(tmpl.version_hash == sha256_hex(tmpl.body));
    CHECK(tmpl.declared_fields == std::set<std::string>{"context_1", "data"});
    CHECK(scan_placeholders(tmpl.body) ==
          std::vector<std::string>{"context_1", "data", "context_1"});
}

TEST_CASE("extra braces around a placeholder stay literal") {
    const auto tmpl = make_template("t", "{{{data}}}");
    CHECK(render(tmpl, make_row({{"data", "X"}})) == "{X}");
}

TEST_CASE("codebook builds sections in fixed order") {
    auto cb = binary_codebook();
    cb.levels = {{"Present", "any clear mention"}, {"Absent", "no mention"}};
    cb.few_shot = {{"sample input text", "{\"label\": \"Present\", \"count\": 1}"}};
    const auto tmpl = build_from_codebook(cb);

    const auto pos_definition = tmpl.body.find("Mentions of growth over time.");
    const auto pos_levels = tmpl.body.find("any clear mention");
    const auto pos_indicators = tmpl.body.find("references to change");
    const auto pos_contract = tmpl.body.find("JSON object");
    const auto pos_examples = tmpl.body.find("sample input text");
    const auto pos_material = tmpl.body.find("{{data}}");
    REQUIRE(pos_definition != std::string::npos);
    REQUIRE(pos_levels != std::string::npos);
    REQUIRE(pos_indicators != std::string::npos);
    REQUIRE(pos_contract != std::string::npos);
    REQUIRE(pos_examples != std::string::npos);
    REQUIRE(pos_material != std::string::npos);
    CHECK(pos_definition < pos_levels);
    CHECK(pos_levels < pos_indicators);
    CHECK(pos_indicators < pos_contract);
    CHECK(pos_contract < pos_examples);
    CHECK(pos_examples < pos_material);
}

TEST_CASE("minimal codebook still produces definition, indicator, contract, slot") {
    Codebook cb;
    cb.construct.name = "Curiosity";
    cb.construct.definition = "Expressions of wanting to know more.";
    cb.indicators = {"questions about mechanisms"};
    cb.output_schema.score = extract::OutputSchema::ScoreBounds{1, 6};
    const auto tmpl = build_from_codebook(cb);
    CHECK(tmpl.body.find("Curiosity") != std::string::npos);
    CHECK(tmpl.body.find("questions about mechanisms") != std::string::npos);
    CHECK(tmpl.body.find("\"score\"") != std::string::npos);
    CHECK(tmpl.body.find("{{data}}") != std::string::npos);
    CHECK(tmpl.body.find("Score levels") == std::string::npos);
    CHECK(tmpl.body.find("Examples:") == std::string::npos);
}

TEST_CASE("binary schema contract names label, count and quotes") {
    const auto tmpl = build_from_codebook(binary_codebook());
    CHECK(tmpl.body.find("\"label\"") != std::string::npos);
    CHECK(tmpl.body.find("\"count\"") != std::string::npos);
    CHECK(tmpl.body.find("\"quotes\"") != std::string::npos);
    CHECK(tmpl.body.find("\"Present\"") != std::string::npos);
    CHECK(tmpl.body.find("\"Absent\"") != std::string::npos);
    CHECK(tmpl.body.find("\"score\"") == std::string::npos);
}

TEST_CASE("identical codebooks build identical hashes") {
    const auto a = build_from_codebook(binary_codebook());
    const auto b = build_from_codebook(binary_codebook());
    CHECK(a.version_hash == b.version_hash);
    CHECK(a.body == b.body);

    auto changed = binary_codebook();
    changed.indicators[0] = "references to change over years";
    CHECK(build_from_codebook(changed).version_hash != a.version_hash);
}

TEST_CASE("codebook JSON parses every section") {
    const std::string text = R"({
        "construct": {"name": "Development", "definition": "Growth mentions."},
        "indicators": ["stages", "change"],
        "levels": [{"label": "Present", "criteria": "any"}, {"label": "Absent", "criteria": "none"}],
        "few_shot": [{"input": "in", "expected_output": "out"}],
        "output_schema": {"label": true, "allowed_labels": ["Present", "Absent"],
                          "count": true, "quotes": true,
                          "score": {"min": 1, "max": 6}, "rationale": true}
    })";
    const auto cb = parse_codebook(text);
    CHECK(cb.construct.name == "Development");
    CHECK(cb.indicators.size() == 2);
    CHECK(cb.levels.size() == 2);
    CHECK(cb.few_shot.size() == 1);
    REQUIRE(cb.output_schema.score.has_value());
    CHECK(cb.output_schema.score->min == 1);
    CHECK(cb.output_schema.score->max == 6);
    CHECK(cb.output_schema.label);
    CHECK(cb.output_schema.allowed_labels == std::vector<std::string>{"Present", "Absent"});
    CHECK(cb.output_schema.count);
    CHECK(cb.output_schema.quotes);
    CHECK(cb.output_schema.rationale);
}

TEST_CASE("codebook JSON rejects bad shapes") {
    CHECK_THROWS_AS(parse_codebook("not json"), FormatError);
    CHECK_THROWS_AS(parse_codebook(R"({"construct": {"name": ""}})"), SchemaError);
    CHECK_THROWS_AS(parse_codebook(R"({"construct": {"name": "X"},
        "levels": [{"label": "A", "criteria": "1"}, {"label": "A", "criteria": "2"}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_codebook(R"({"construct": {"name": "X"},
        "output_schema": {"score": {"min": 6, "max": 1}}})"),
                    SchemaError);
}

TEST_CASE("library saves and loads by hash and by name") {
    TempDir dir;
    const auto lib = dir.file("prompts");
    const auto v1 = make_template("demo", "First body: {{data}}");
    const auto v2 = make_template("demo", "Second body: {{data}}");
    save_template(lib, v1);
    save_template(lib, v2);

    CHECK(load_template(lib, "demo", v1.version_hash).body == v1.body);
    CHECK(load_template(lib, "demo", v2.version_hash).body == v2.body);
    // Without a hash: the most recently saved wins.
    CHECK(load_template(lib, "demo").body == v2.body);
    // Re-saving an older version refreshes its recency.
    save_template(lib, v1);
    CHECK(load_template(lib, "demo").body == v1.body);

    CHECK(list_templates(lib).size() == 3);
    CHECK_THROWS_AS(load_template(lib, "missing"), NotFoundError);
    CHECK_THROWS_AS(load_template(lib, "demo", "0000"), NotFoundError);
}

TEST_CASE("library accepts unique hash prefixes") {
    TempDir dir;
    const auto lib = dir.file("prompts");
    const auto tmpl = make_template("demo", "A body: {{data}}");
    save_template(lib, tmpl);
    CHECK(load_template(lib, "demo", tmpl.version_hash.substr(0, 12)).body == tmpl.body);
}

TEST_CASE("library detects tampered bodies") {
    TempDir dir;
    const auto lib = dir.file("prompts");
    const auto tmpl = make_template("demo", "A body: {{data}}");
    save_template(lib, tmpl);
    atomic_write_file(lib / "demo" / (tmpl.version_hash + ".txt"), "tampered {{data}}");
    CHECK_THROWS_AS(load_template(lib, "demo"), IntegrityError);
}

TEST_CASE("render depends only on the template and the row's own values") {
    Rng rng(99);
    const auto tmpl = make_template("t", "ctx={{context_1}} unit={{data}}");
    for (int iter = 0; iter < 50; ++iter) {
        std::map<std::string, std::string> values{
            {"data", "unit " + std::to_string(rng.below(1000))},
            {"context_1", "c" + std::to_string(rng.below(10))}};
        const auto baseline = render(tmpl, make_row(values, rng.below(5)));
        // The same values at any row position in any table render identically.
        for (size_t position : {size_t{0}, size_t{7}, size_t{999}}) {
            CHECK(render(tmpl, make_row(values, position)) == baseline);
        }
    }
}
