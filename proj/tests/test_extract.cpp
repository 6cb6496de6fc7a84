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

#include "atomcode/extract.hpp"

#include <sstream>

#include <json.hpp>

#include "atomcode/util.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace atomcode;
using namespace atomcode::extract;
using testsupport::Rng;
using testsupport::fixture_dir;

namespace {

OutputSchema binary_schema() {
    OutputSchema schema;
    schema.label = true;
    schema.allowed_labels = {"Present", "Absent"};
    schema.count = true;
    schema.quotes = true;
    schema.rationale = true;
    return schema;
}

OutputSchema schema_by_name(const std::string& name) {
    if (name == "score16") return score_only_schema(1, 6);
    if (name == "binary") return binary_schema();
    if (name == "count") {
        OutputSchema schema;
        schema.count = true;
        return schema;
    }
    if (name == "quotes") {
        OutputSchema schema;
        schema.quotes = true;
        return schema;
    }
    if (name == "label") {
        OutputSchema schema;
        schema.label = true;
        schema.allowed_labels = {"Present", "Absent"};
        return schema;
    }
    if (name == "score_rationale") {
        OutputSchema schema = score_only_schema(1, 6);
        schema.rationale = true;
        return schema;
    }
    FAIL("unknown corpus schema: " << name);
    return {};
}

struct CorpusSample {
    nlohmann::json spec;
    std::string name() const { return spec["name"].get<std::string>(); }
    std::string raw() const { return spec["raw"].get<std::string>(); }
};

std::vector<CorpusSample> load_corpus() {
    std::istringstream in(read_file(fixture_dir() / "extract_corpus.jsonl"));
    std::vector<CorpusSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        samples.push_back({nlohmann::json::parse(line)});
    }
    return samples;
}

}  // namespace

TEST_CASE("the raw-output corpus parses to the expected mode and fields") {
    const auto samples = load_corpus();
    REQUIRE(samples.size() >= 20);

    for (const auto& sample : samples) {
        CAPTURE(sample.name());
        const auto& spec = sample.spec;
        const auto out = parse_structured(sample.raw(), schema_by_name(spec["schema"]));

        CHECK(to_string(out.parse_mode) == spec["mode"].get<std::string>());
        CHECK(out.raw == sample.raw());

        // Every field is checked: expected values must match, everything
        // else must be absent.
        if (spec.contains("score")) {
            REQUIRE(out.score.has_value());
            CHECK(*out.score == doctest::Approx(spec["score"].get<double>()));
        } else {
            CHECK_FALSE(out.score.has_value());
        }
        if (spec.contains("label")) {
            CHECK(out.label == spec["label"].get<std::string>());
        } else {
            CHECK_FALSE(out.label.has_value());
        }
        if (spec.contains("count")) {
            CHECK(out.count == spec["count"].get<long long>());
        } else {
            CHECK_FALSE(out.count.has_value());
        }
        if (spec.contains("quotes")) {
            CHECK(out.quotes == spec["quotes"].get<std::vector<std::string>>());
        } else {
            CHECK(out.quotes.empty());
        }
        if (spec.contains("rationale")) {
            CHECK(out.rationale == spec["rationale"].get<std::string>());
        } else {
            CHECK_FALSE(out.rationale.has_value());
        }
        if (out.parse_mode == ParseMode::failed) CHECK_FALSE(out.has_any_field());
    }
}

TEST_CASE("a parseable JSON object beats any prose fallback") {
    const auto out = parse_structured("{\"score\": 2} ... Score: 5", score_only_schema(1, 6));
    CHECK(out.parse_mode == ParseMode::json);
    CHECK(out.score == 2.0);
}

TEST_CASE("extract_score mirrors the documented examples") {
    CHECK(extract_score("{\"score\": 5}", 1, 6) == 5.0);
    CHECK(extract_score("I would give this a 2.", 1, 6) == 2.0);
    CHECK_FALSE(extract_score("no number here", 1, 6).has_value());
}

TEST_CASE("an empty schema never yields fields") {
    const auto out = parse_structured("{\"score\": 4}", OutputSchema{});
    CHECK(out.parse_mode == ParseMode::failed);
    CHECK_FALSE(out.has_any_field());
}

TEST_CASE("parse_structured never throws on arbitrary bytes") {
    const std::string alphabet = "{}[]\":,0123456789abc score-\\\n .";
    Rng rng(20260814);
    const OutputSchema schemas[] = {score_only_schema(1, 6), binary_schema(),
                                    schema_by_name("count")};
    for (int iter = 0; iter < 300; ++iter) {
        std::string raw;
        const uint32_t len = rng.below(60);
        for (uint32_t i = 0; i < len; ++i)
            raw += alphabet[rng.below(static_cast<uint32_t>(alphabet.size()))];
        for (const auto& schema : schemas) {
            StructuredOutput out;
            CHECK_NOTHROW(out = parse_structured(raw, schema));
            CHECK(out.raw == raw);
            if (out.parse_mode == ParseMode::failed) CHECK_FALSE(out.has_any_field());
            if (!schema.score) CHECK_FALSE(out.score.has_value());
            if (!schema.label) CHECK_FALSE(out.label.has_value());
            if (!schema.quotes) CHECK(out.quotes.empty());
        }
    }
}

TEST_CASE("tabulate_passes combines two scoring passes") {
    const auto same = tabulate_passes(4, 4);
    CHECK(same.value == 4.0);
    CHECK(same.flag == TabulationFlag::ok);

    const auto near = tabulate_passes(4, 5);
    CHECK(near.value == 4.5);
    CHECK(near.flag == TabulationFlag::ok);

    const auto far = tabulate_passes(2, 5);
    CHECK_FALSE(far.value.has_value());
    CHECK(far.flag == TabulationFlag::adjudicate);

    const auto half = tabulate_passes(4, std::nullopt);
    CHECK_FALSE(half.value.has_value());
    CHECK(half.flag == TabulationFlag::missing);

    const auto none = tabulate_passes(std::nullopt, std::nullopt);
    CHECK(none.flag == TabulationFlag::missing);
}

TEST_CASE("the adjudication threshold is configurable") {
    TabulationPolicy wide;
    wide.adjudication_threshold = 3.0;
    const auto result = tabulate_passes(2, 5, wide);
    CHECK(result.value == 3.5);
    CHECK(result.flag == TabulationFlag::ok);
}

TEST_CASE("tabulation is symmetric in its arguments") {
    Rng rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        const auto pick = [&]() -> std::optional<double> {
            if (rng.chance(20)) return std::nullopt;
            return static_cast<double>(rng.below(7));
        };
        const auto a = pick();
        const auto b = pick();
        const auto ab = tabulate_passes(a, b);
        const auto ba = tabulate_passes(b, a);
        CHECK(ab.flag == ba.flag);
        CHECK(ab.value == ba.value);
    }
}

TEST_CASE("verify_quotes matches after whitespace normalization") {
    const std::string source = "We kept improving,\n  year after   year.";
    const auto checks = verify_quotes(
        {"kept improving, year after year", "kept\nimproving", "we gave up", ""}, source);
    REQUIRE(checks.size() == 4);
    CHECK(checks[0].found);
    CHECK(checks[1].found);          // newline in the quote collapses to a space
    CHECK(checks[2].found == false);
    CHECK(checks[3].found == false);  // empty quotes never count as found
    CHECK(checks[1].quote == "kept\nimproving");  // quote text preserved verbatim
}

TEST_CASE("verify_quotes finds quotes split across whitespace runs") {
    const auto checks = verify_quotes({"year  after \t year"}, "one year after year two");
    REQUIRE(checks.size() == 1);
    CHECK(checks[0].found);
}
