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

#include <optional>
#include <string>
#include <vector>

namespace atomcode::extract {

/// Which structured fields a model output is expected to carry.
/// At least one field must be expected.
struct OutputSchema {
    struct ScoreBounds {
        double min = 0;
        double max = 0;
    };
    std::optional<ScoreBounds> score;
    /// Expect a label; when `allowed` is non-empty the value must be one of
    /// them (compared after trimming, case-sensitive).
    bool label = false;
    std::vector<std::string> allowed_labels;
    bool count = false;
    bool quotes = false;
    bool rationale = false;

    bool expects_anything() const {
        return score.has_value() || label || count || quotes || rationale;
    }
};

OutputSchema score_only_schema(double min, double max);

enum class ParseMode { json, fallback_regex, failed };

const char* to_string(ParseMode mode);

/// Structured view of one raw model output. `raw` is always the verbatim
/// input; parse failures are encoded in `parse_mode`, never thrown.
struct StructuredOutput {
    std::optional<double> score;
    std::optional<std::string> label;
    std::optional<long long> count;
    std::vector<std::string> quotes;
    std::optional<std::string> rationale;
    ParseMode parse_mode = ParseMode::failed;
    std::string raw;

    bool has_any_field() const {
        return score || label || count || rationale || !quotes.empty();
    }
};

/// Parse a raw output against the schema. The first balanced JSON object in
/// the text (fenced or not) that yields at least one schema-valid field wins
/// (parse_mode=json); otherwise field-specific fallback regexes run
/// (parse_mode=fallback_regex); otherwise parse_mode=failed. Never throws on
/// malformed input.
StructuredOutput parse_structured(const std::string& raw, const OutputSchema& schema);

/// Convenience: parse with a score-only schema and return the score.
std::optional<double> extract_score(const std::string& raw, double min, double max);

enum class TabulationFlag { ok, adjudicate, missing };

const char* to_string(TabulationFlag flag);

struct TabulationPolicy {
    /// Passes farther apart than this are flagged for human adjudication.
    double adjudication_threshold = 1.0;
};

struct Tabulation {
    std::optional<double> value;
    TabulationFlag flag = TabulationFlag::missing;
};

/// Combine two scoring passes: both present and within the threshold ->
/// their mean; farther apart -> adjudicate; either absent -> missing.
/// Symmetric in its arguments.
Tabulation tabulate_passes(std::optional<double> a, std::optional<double> b,
                           const TabulationPolicy& policy = {});

struct QuoteCheck {
    std::string quote;
    bool found = false;
};

/// Report, for each quote, whether it appears in the source text after
/// whitespace normalization. Advisory only; callers must not gate on it.
std::vector<QuoteCheck> verify_quotes(const std::vector<std::string>& quotes,
                                      const std::string& source_text);

}  // namespace atomcode::extract
