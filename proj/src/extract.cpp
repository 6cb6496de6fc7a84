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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include <json.hpp>

#include "atomcode/util.hpp"

using nlohmann::json;

namespace atomcode::extract {

const char* to_string(ParseMode mode) {
    switch (mode) {
        case ParseMode::json: return "json";
        case ParseMode::fallback_regex: return "fallback_regex";
        case ParseMode::failed: return "failed";
    }
    return "failed";
}

const char* to_string(TabulationFlag flag) {
    switch (flag) {
        case TabulationFlag::ok: return "ok";
        case TabulationFlag::adjudicate: return "adjudicate";
        case TabulationFlag::missing: return "missing";
    }
    return "missing";
}

OutputSchema score_only_schema(double min, double max) {
    OutputSchema schema;
    schema.score = OutputSchema::ScoreBounds{min, max};
    return schema;
}

namespace {

/// Locate the balanced JSON object starting at text[open] ('{'), honoring
/// string literals and escapes. Returns one past the closing brace, or npos.
size_t find_balanced_close(std::string_view text, size_t open) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string::npos;
}

std::optional<double> number_from_json(const json& v) {
    if (v.is_number()) return v.get<double>();
    // Models frequently quote numbers; accept "4" for a numeric field.
    if (v.is_string()) return parse_number(v.get<std::string>());
    return std::nullopt;
}

bool label_allowed(const OutputSchema& schema, const std::string& value) {
    if (schema.allowed_labels.empty()) return !value.empty();
    return std::find(schema.allowed_labels.begin(), schema.allowed_labels.end(), value) !=
           schema.allowed_labels.end();
}

/// Copy schema-valid fields from a parsed JSON object. Invalid or
/// out-of-schema fields are dropped; returns true when anything was taken.
bool take_valid_fields(const json& obj, const OutputSchema& schema, StructuredOutput& out) {
    bool any = false;
    if (schema.score && obj.contains("score")) {
        if (auto v = number_from_json(obj["score"])) {
            if (*v >= schema.score->min && *v <= schema.score->max) {
                out.score = *v;
                any = true;
            }
        }
    }
    if (schema.label && obj.contains("label") && obj["label"].is_string()) {
        const std::string value = std::string(trim(obj["label"].get<std::string>()));
        if (label_allowed(schema, value)) {
            out.label = value;
            any = true;
        }
    }
    if (schema.count && obj.contains("count")) {
        const json& v = obj["count"];
        std::optional<long long> n;
        if (v.is_number_integer()) {
            n = v.get<long long>();
        } else if (v.is_string()) {
            n = parse_int(v.get<std::string>());
        }
        if (n && *n >= 0) {
            out.count = *n;
            any = true;
        }
    }
    if (schema.quotes && obj.contains("quotes") && obj["quotes"].is_array()) {
        std::vector<std::string> quotes;
        bool all_strings = true;
        for (const auto& q : obj["quotes"]) {
            if (!q.is_string()) {
                all_strings = false;
                break;
            }
            quotes.push_back(q.get<std::string>());
        }
        if (all_strings && !quotes.empty()) {
            out.quotes = std::move(quotes);
            any = true;
        }
    }
    if (schema.rationale && obj.contains("rationale") && obj["rationale"].is_string()) {
        out.rationale = obj["rationale"].get<std::string>();
        any = true;
    }
    return any;
}

bool try_json_route(const std::string& raw, const OutputSchema& schema, StructuredOutput& out) {
    size_t pos = 0;
    while ((pos = raw.find('{', pos)) != std::string::npos) {
        const size_t end = find_balanced_close(raw, pos);
        if (end == std::string::npos) {
            ++pos;
            continue;
        }
        const json obj = json::parse(raw.substr(pos, end - pos), nullptr, false);
        if (!obj.is_discarded() && obj.is_object()) {
            StructuredOutput candidate;
            if (take_valid_fields(obj, schema, candidate)) {
                candidate.raw = out.raw;
                candidate.parse_mode = ParseMode::json;
                out = std::move(candidate);
                return true;
            }
        }
        pos = end > pos ? end : pos + 1;
    }
    return false;
}

std::optional<double> fallback_score(const std::string& raw, const OutputSchema::ScoreBounds& b) {
    // Numbers adjacent to "score"/"rating" win; "3/6" style takes the
    // numerator. Otherwise the first in-bounds integer token anywhere.
    static const std::regex keyword_re(
        R"((?:score|rating)[^0-9+-]{0,12}(-?\d+(?:\.\d+)?))",
        std::regex::icase);
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), keyword_re);
         it != std::sregex_iterator(); ++it) {
        const double v = std::stod((*it)[1].str());
        if (v >= b.min && v <= b.max) return v;
    }
    static const std::regex int_re(R"((-?\d+))");
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), int_re);
         it != std::sregex_iterator(); ++it) {
        // Skip the halves of a decimal like "3.5" (a dot at a sentence end
        // does not disqualify the token).
        const auto& match = (*it)[1];
        const size_t start = static_cast<size_t>(match.first - raw.begin());
        const size_t stop = start + match.str().size();
        const bool dot_before = start > 1 && raw[start - 1] == '.' &&
                                std::isdigit(static_cast<unsigned char>(raw[start - 2]));
        const bool dot_after = stop + 1 < raw.size() && raw[stop] == '.' &&
                               std::isdigit(static_cast<unsigned char>(raw[stop + 1]));
        if (dot_before || dot_after) continue;
        const double v = std::stod(match.str());
        if (v >= b.min && v <= b.max) return v;
    }
    return std::nullopt;
}

std::optional<std::string> fallback_label(const std::string& raw, const OutputSchema& schema) {
    // Only allowed values can be recovered from prose; matching is
    // case-sensitive so prompt drift ("present" vs "Present") stays visible.
    for (const auto& allowed : schema.allowed_labels) {
        size_t pos = raw.find(allowed);
        while (pos != std::string::npos) {
            const bool left_ok =
                pos == 0 || !std::isalnum(static_cast<unsigned char>(raw[pos - 1]));
            const size_t after = pos + allowed.size();
            const bool right_ok =
                after >= raw.size() || !std::isalnum(static_cast<unsigned char>(raw[after]));
            if (left_ok && right_ok) return allowed;
            pos = raw.find(allowed, pos + 1);
        }
    }
    return std::nullopt;
}

std::optional<long long> fallback_count(const std::string& raw) {
    // "count: 3" / "3 mentions"; bare integers are too collision-prone.
    static const std::regex after_kw(R"((?:count|mentions?)[^0-9-]{0,12}(\d+))",
                                     std::regex::icase);
    std::smatch m;
    if (std::regex_search(raw, m, after_kw)) return std::stoll(m[1].str());
    static const std::regex before_kw(R"((\d+)\s+mentions?)", std::regex::icase);
    if (std::regex_search(raw, m, before_kw)) return std::stoll(m[1].str());
    return std::nullopt;
}

std::vector<std::string> fallback_quotes(const std::string& raw) {
    std::vector<std::string> quotes;
    static const std::regex quoted(R"re("([^"\n]{3,})")re");
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), quoted);
         it != std::sregex_iterator(); ++it) {
        quotes.push_back((*it)[1].str());
    }
    return quotes;
}

bool try_fallback_route(const std::string& raw, const OutputSchema& schema,
                        StructuredOutput& out) {
    bool any = false;
    if (schema.score) {
        if (auto v = fallback_score(raw, *schema.score)) {
            out.score = *v;
            any = true;
        }
    }
    if (schema.label) {
        if (auto v = fallback_label(raw, schema)) {
            out.label = *v;
            any = true;
        }
    }
    if (schema.count) {
        if (auto v = fallback_count(raw)) {
            out.count = *v;
            any = true;
        }
    }
    if (schema.quotes) {
        auto quotes = fallback_quotes(raw);
        if (!quotes.empty()) {
            out.quotes = std::move(quotes);
            any = true;
        }
    }
    return any;
}

}  // namespace

StructuredOutput parse_structured(const std::string& raw, const OutputSchema& schema) {
    StructuredOutput out;
    out.raw = raw;
    out.parse_mode = ParseMode::failed;
    if (!schema.expects_anything()) return out;

    if (try_json_route(raw, schema, out)) return out;
    if (try_fallback_route(raw, schema, out)) {
        out.parse_mode = ParseMode::fallback_regex;
        return out;
    }
    // failed: no optional field set.
    StructuredOutput failed;
    failed.raw = raw;
    failed.parse_mode = ParseMode::failed;
    return failed;
}

std::optional<double> extract_score(const std::string& raw, double min, double max) {
    return parse_structured(raw, score_only_schema(min, max)).score;
}

Tabulation tabulate_passes(std::optional<double> a, std::optional<double> b,
                           const TabulationPolicy& policy) {
    Tabulation result;
    if (!a || !b) {
        result.flag = TabulationFlag::missing;
        return result;
    }
    if (std::abs(*a - *b) <= policy.adjudication_threshold) {
        result.value = (*a + *b) / 2.0;
        result.flag = TabulationFlag::ok;
    } else {
        result.flag = TabulationFlag::adjudicate;
    }
    return result;
}

std::vector<QuoteCheck> verify_quotes(const std::vector<std::string>& quotes,
                                      const std::string& source_text) {
    const std::string haystack = normalize_whitespace(source_text);
    std::vector<QuoteCheck> checks;
    checks.reserve(quotes.size());
    for (const auto& quote : quotes) {
        QuoteCheck check;
        check.quote = quote;
        const std::string needle = normalize_whitespace(quote);
        check.found = !needle.empty() && haystack.find(needle) != std::string::npos;
        checks.push_back(std::move(check));
    }
    return checks;
}

}  // namespace atomcode::extract
