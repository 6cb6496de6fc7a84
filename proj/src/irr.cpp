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

#include "atomcode/irr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "atomcode/errors.hpp"
#include "atomcode/util.hpp"
#include "json.hpp"

namespace atomcode::irr {

namespace {

constexpr double kDegenerateEps = 1e-12;

std::vector<std::pair<std::string, std::string>> as_label_pairs(const RatingPairs& pairs) {
    if (pairs.kind == PairKind::categorical) return pairs.labels;
    std::vector<std::pair<std::string, std::string>> labels;
    labels.reserve(pairs.counts.size());
    for (const auto& [a, b] : pairs.counts) {
        labels.emplace_back(std::to_string(a), std::to_string(b));
    }
    return labels;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

const char* to_string(PairKind kind) {
    return kind == PairKind::categorical ? "categorical" : "count";
}

PairKind pair_kind_from_string(const std::string& name) {
    if (name == "categorical") return PairKind::categorical;
    if (name == "count" || name == "integer_count") return PairKind::integer_count;
    throw SchemaError("unknown rating kind '" + name + "' (expected categorical or count)");
}

RatingPairs make_rating_pairs(const store::SegmentTable& table, const std::string& col_a,
                              const std::string& col_b, PairKind kind) {
    for (const auto* name : {&col_a, &col_b}) {
        if (!table.has_column(*name)) {
            throw NotFoundError("no column named '" + *name + "' in " +
                                (table.source_path().empty() ? std::string("table")
                                                             : table.source_path().string()));
        }
    }
    RatingPairs pairs;
    pairs.kind = kind;
    pairs.n_total = table.row_count();
    for (size_t i = 0; i < table.row_count(); ++i) {
        const std::string a(trim(table.cell(i, col_a)));
        const std::string b(trim(table.cell(i, col_b)));
        if (a.empty() || b.empty()) {
            ++pairs.n_missing;
            continue;
        }
        if (kind == PairKind::categorical) {
            pairs.labels.emplace_back(a, b);
        } else {
            const auto ia = parse_int(a);
            const auto ib = parse_int(b);
            if (!ia || !ib) {
                throw TypeError("row " + std::to_string(i) + ": '" + (ia ? b : a) +
                                "' is not an integer count");
            }
            pairs.counts.emplace_back(*ia, *ib);
        }
    }
    return pairs;
}

KappaResult cohens_kappa(const RatingPairs& pairs) {
    const auto labels = as_label_pairs(pairs);
    if (labels.empty()) throw InsufficientDataError("no rating pairs to compare");

    const double n = static_cast<double>(labels.size());
    std::map<std::string, size_t> marginal_a;
    std::map<std::string, size_t> marginal_b;
    size_t agree = 0;
    for (const auto& [a, b] : labels) {
        ++marginal_a[a];
        ++marginal_b[b];
        if (a == b) ++agree;
    }

    KappaResult result;
    result.p_observed = static_cast<double>(agree) / n;
    double p_expected = 0;
    for (const auto& [label, count_a] : marginal_a) {
        const auto it = marginal_b.find(label);
        if (it == marginal_b.end()) continue;
        p_expected += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
    }
    result.p_expected = p_expected;

    if (1.0 - p_expected <= kDegenerateEps) {
        if (1.0 - result.p_observed <= kDegenerateEps) {
            result.kappa = 1.0;
        } else {
            result.note = "DegenerateMarginals: chance agreement is 1, kappa undefined";
        }
        return result;
    }
    result.kappa = (result.p_observed - p_expected) / (1.0 - p_expected);
    return result;
}

double percent_agreement(const RatingPairs& pairs) {
    if (pairs.size() == 0) throw InsufficientDataError("no rating pairs to compare");
    size_t agree = 0;
    if (pairs.kind == PairKind::categorical) {
        for (const auto& [a, b] : pairs.labels) {
            if (a == b) ++agree;
        }
    } else {
        for (const auto& [a, b] : pairs.counts) {
            if (a == b) ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

CountAgreement count_agreement(const RatingPairs& pairs) {
    if (pairs.kind != PairKind::integer_count) {
        throw TypeError("count agreement requires integer_count pairs");
    }
    if (pairs.counts.empty()) throw InsufficientDataError("no rating pairs to compare");

    CountAgreement stats;
    long long signed_sum = 0;
    long long abs_sum = 0;
    size_t exact = 0;
    for (const auto& [a, b] : pairs.counts) {
        const long long diff = a - b;
        signed_sum += diff;
        abs_sum += std::llabs(diff);
        stats.max_abs_diff = std::max(stats.max_abs_diff, std::llabs(diff));
        if (diff == 0) ++exact;
    }
    const double n = static_cast<double>(pairs.counts.size());
    stats.exact_agreement = static_cast<double>(exact) / n;
    stats.mean_signed_diff = static_cast<double>(signed_sum) / n;
    stats.mean_abs_diff = static_cast<double>(abs_sum) / n;
    return stats;
}

ConfusionMatrix confusion_matrix(const RatingPairs& pairs) {
    const auto labels = as_label_pairs(pairs);
    if (labels.empty()) throw InsufficientDataError("no rating pairs to compare");

    ConfusionMatrix matrix;
    for (const auto& [a, b] : labels) {
        matrix.alphabet.push_back(a);
        matrix.alphabet.push_back(b);
    }
    std::sort(matrix.alphabet.begin(), matrix.alphabet.end());
    matrix.alphabet.erase(std::unique(matrix.alphabet.begin(), matrix.alphabet.end()),
                          matrix.alphabet.end());

    std::map<std::string, size_t> index;
    for (size_t i = 0; i < matrix.alphabet.size(); ++i) index[matrix.alphabet[i]] = i;
    matrix.cells.assign(matrix.alphabet.size(), std::vector<size_t>(matrix.alphabet.size(), 0));
    for (const auto& [a, b] : labels) ++matrix.cells[index[a]][index[b]];
    return matrix;
}

IRRReport compute_report(const store::SegmentTable& table, const std::string& col_a,
                         const std::string& col_b, PairKind kind) {
    const RatingPairs pairs = make_rating_pairs(table, col_a, col_b, kind);
    if (pairs.size() == 0) {
        throw InsufficientDataError("columns '" + col_a + "' and '" + col_b +
                                    "' share no rows with values on both sides");
    }
    IRRReport report;
    report.kind = kind;
    report.column_a = col_a;
    report.column_b = col_b;
    report.n = pairs.size();
    report.n_total = pairs.n_total;
    report.n_missing = pairs.n_missing;
    report.percent_agreement = percent_agreement(pairs);
    const KappaResult kresult = cohens_kappa(pairs);
    report.kappa = kresult.kappa;
    report.kappa_note = kresult.note;
    if (kind == PairKind::categorical) {
        report.confusion = confusion_matrix(pairs);
    } else {
        report.counts = count_agreement(pairs);
    }
    return report;
}

std::string to_json_string(const IRRReport& report) {
    nlohmann::json doc;
    doc["kind"] = to_string(report.kind);
    doc["column_a"] = report.column_a;
    doc["column_b"] = report.column_b;
    doc["n"] = report.n;
    doc["n_total"] = report.n_total;
    doc["n_missing"] = report.n_missing;
    doc["percent_agreement"] = report.percent_agreement;
    if (report.kappa) {
        doc["kappa"] = *report.kappa;
    } else {
        doc["kappa"] = nullptr;
    }
    if (!report.kappa_note.empty()) doc["kappa_note"] = report.kappa_note;
    if (report.kind == PairKind::categorical) {
        nlohmann::json confusion;
        confusion["labels"] = report.confusion.alphabet;
        confusion["matrix"] = report.confusion.cells;
        doc["confusion"] = confusion;
    }
    if (report.counts) {
        nlohmann::json counts;
        counts["exact_agreement"] = report.counts->exact_agreement;
        counts["mean_signed_diff"] = report.counts->mean_signed_diff;
        counts["mean_abs_diff"] = report.counts->mean_abs_diff;
        counts["max_abs_diff"] = report.counts->max_abs_diff;
        doc["count_agreement"] = counts;
    }
    return doc.dump(2);
}

std::string to_text(const IRRReport& report) {
    std::ostringstream out;
    out << "columns: " << report.column_a << " vs " << report.column_b << " ("
        << to_string(report.kind) << ")\n";
    out << "n = " << report.n << " pairs";
    if (report.n_missing > 0) {
        out << " (" << report.n_missing << " of " << report.n_total << " rows missing a value)";
    }
    out << "\n";
    out << "percent agreement = " << fixed3(report.percent_agreement) << "\n";
    if (report.kappa) {
        out << "Cohen's kappa = " << fixed3(*report.kappa) << "\n";
    } else {
        out << "Cohen's kappa = undefined (" << report.kappa_note << ")\n";
    }
    if (report.kind == PairKind::categorical) {
        out << "confusion (rows = " << report.column_a << ", cols = " << report.column_b << "):\n";
        size_t width = 1;
        for (const auto& label : report.confusion.alphabet) width = std::max(width, label.size());
        out << std::string(width + 2, ' ');
        for (const auto& label : report.confusion.alphabet) out << label << "  ";
        out << "\n";
        for (size_t r = 0; r < report.confusion.alphabet.size(); ++r) {
            const auto& label = report.confusion.alphabet[r];
            out << "  " << label << std::string(width - label.size(), ' ');
            for (size_t c = 0; c < report.confusion.cells[r].size(); ++c) {
                out << "  " << report.confusion.cells[r][c];
            }
            out << "\n";
        }
    }
    if (report.counts) {
        out << "exact agreement = " << fixed3(report.counts->exact_agreement) << "\n";
        out << "mean signed diff = " << fixed3(report.counts->mean_signed_diff) << "\n";
        out << "mean abs diff = " << fixed3(report.counts->mean_abs_diff) << "\n";
        out << "max abs diff = " << report.counts->max_abs_diff << "\n";
    }
    return out.str();
}

}  // namespace atomcode::irr
