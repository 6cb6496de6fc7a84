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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atomcode/table.hpp"

namespace atomcode::irr {

enum class PairKind { categorical, integer_count };

const char* to_string(PairKind kind);
PairKind pair_kind_from_string(const std::string& name);

/// Aligned ratings from two output columns. Rows where either side is blank
/// are dropped and counted in n_missing, never treated as a category.
struct RatingPairs {
    PairKind kind = PairKind::categorical;
    std::vector<std::pair<std::string, std::string>> labels;  // categorical
    std::vector<std::pair<long long, long long>> counts;      // integer_count
    size_t n_total = 0;
    size_t n_missing = 0;

    size_t size() const { return kind == PairKind::categorical ? labels.size() : counts.size(); }
};

/// Pair up two columns row by row. Values are trimmed; an empty side drops
/// the row. Throws NotFoundError on a missing column and TypeError when a
/// count-kind cell is not an integer.
RatingPairs make_rating_pairs(const store::SegmentTable& table, const std::string& col_a,
                              const std::string& col_b, PairKind kind);

struct KappaResult {
    /// Absent only when chance agreement is total and observed agreement
    /// is not; `note` explains.
    std::optional<double> kappa;
    std::string note;
    double p_observed = 0;
    double p_expected = 0;
};

/// Cohen's kappa = (p_o - p_e) / (1 - p_e), with p_e the product-of-marginals
/// chance agreement. When p_e = 1 (both raters constant on one shared value)
/// the quotient is undefined; by convention the result is 1.0 when observed
/// agreement is also perfect, otherwise absent with a DegenerateMarginals
/// note. Count pairs are treated as categories. Throws InsufficientDataError
/// on zero pairs.
KappaResult cohens_kappa(const RatingPairs& pairs);

/// Fraction of pairs that agree exactly. Throws InsufficientDataError on
/// zero pairs.
double percent_agreement(const RatingPairs& pairs);

struct CountAgreement {
    double exact_agreement = 0;
    double mean_signed_diff = 0;
    double mean_abs_diff = 0;
    long long max_abs_diff = 0;
};

/// Agreement statistics for integer counts. Throws InsufficientDataError on
/// zero pairs and TypeError when called on categorical pairs.
CountAgreement count_agreement(const RatingPairs& pairs);

/// Square matrix over the sorted observed alphabet; cell (r, c) counts pairs
/// with a = alphabet[r], b = alphabet[c].
struct ConfusionMatrix {
    std::vector<std::string> alphabet;
    std::vector<std::vector<size_t>> cells;
};

ConfusionMatrix confusion_matrix(const RatingPairs& pairs);

struct IRRReport {
    PairKind kind = PairKind::categorical;
    std::string column_a;
    std::string column_b;
    size_t n = 0;
    size_t n_total = 0;
    size_t n_missing = 0;
    double percent_agreement = 0;
    std::optional<double> kappa;
    std::string kappa_note;
    ConfusionMatrix confusion;               // categorical kind
    std::optional<CountAgreement> counts;    // count kind
};

/// Full report over two columns of a table.
IRRReport compute_report(const store::SegmentTable& table, const std::string& col_a,
                         const std::string& col_b, PairKind kind);

std::string to_json_string(const IRRReport& report);
std::string to_text(const IRRReport& report);

}  // namespace atomcode::irr
