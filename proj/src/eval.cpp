#include "eqn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "eqn/csv.hpp"
#include "eqn/error.hpp"
#include "eqn/log.hpp"

namespace eqn {

namespace {

std::size_t intersection_size(const LabelSet& a, const LabelSet& b) {
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

const IntensityVector& intensities_of(const Sample& s) {
    if (!s.intensities) throw DataError(fmt::format("sample '{}' has no intensities", s.id));
    return *s.intensities;
}

PrfTriple spread(const std::vector<LabelRow>& rows, const PrfTriple& mean, StdKind kind) {
    PrfTriple var;
    for (const auto& r : rows) {
        var.precision += (r.scores.precision - mean.precision) * (r.scores.precision - mean.precision);
        var.recall += (r.scores.recall - mean.recall) * (r.scores.recall - mean.recall);
        var.f1 += (r.scores.f1 - mean.f1) * (r.scores.f1 - mean.f1);
    }
    double n = static_cast<double>(rows.size());
    double den = kind == StdKind::population ? n : n - 1.0;
    if (den <= 0.0) return {};
    return {std::sqrt(var.precision / den), std::sqrt(var.recall / den), std::sqrt(var.f1 / den)};
}

}  // namespace

std::string_view to_string(PredictionPolicy policy) {
    return policy == PredictionPolicy::oracle_k ? "oracle-k" : "threshold";
}

PredictionPolicy parse_policy(std::string_view name) {
    if (name == "oracle-k") return PredictionPolicy::oracle_k;
    if (name == "threshold") return PredictionPolicy::threshold;
    throw ConfigError(fmt::format("unknown policy '{}' (expected oracle-k or threshold)", name));
}

PrfTriple sample_metrics(std::span<const LabelSet> gold, std::span<const LabelSet> predicted) {
    if (gold.size() != predicted.size()) {
        throw DataError(fmt::format("{} gold sets but {} predictions", gold.size(), predicted.size()));
    }
    if (gold.empty()) throw DataError("sample_metrics needs at least one sample");
    PrfTriple sum;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto& t = gold[i];
        const auto& p = predicted[i];
        if (t.empty() && p.empty()) {
            sum.precision += 1.0;
            sum.recall += 1.0;
            sum.f1 += 1.0;
            continue;
        }
        std::size_t hit = intersection_size(t, p);
        double prec = ratio(hit, p.size());
        double rec = ratio(hit, t.size());
        sum.precision += prec;
        sum.recall += rec;
        sum.f1 += harmonic(prec, rec);
    }
    double m = static_cast<double>(gold.size());
    return {sum.precision / m, sum.recall / m, sum.f1 / m};
}

PerLabelReport per_label_metrics(std::span<const LabelSet> gold, std::span<const LabelSet> predicted,
                                 std::size_t label_count, StdKind std_kind) {
    if (gold.size() != predicted.size()) {
        throw DataError(fmt::format("{} gold sets but {} predictions", gold.size(), predicted.size()));
    }
    PerLabelReport report;
    report.std_kind = std_kind;
    report.rows.resize(label_count);
    std::vector<char> in_gold(label_count);
    std::vector<char> in_pred(label_count);
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::fill(in_gold.begin(), in_gold.end(), 0);
        std::fill(in_pred.begin(), in_pred.end(), 0);
        for (auto j : gold[i]) in_gold.at(j) = 1;
        for (auto j : predicted[i]) in_pred.at(j) = 1;
        for (std::size_t j = 0; j < label_count; ++j) {
            if (in_gold[j] && in_pred[j]) ++report.rows[j].tp;
            if (!in_gold[j] && in_pred[j]) ++report.rows[j].fp;
            if (in_gold[j] && !in_pred[j]) ++report.rows[j].fn;
        }
    }
    for (auto& row : report.rows) {
        row.scores.precision = ratio(row.tp, row.tp + row.fp);
        row.scores.recall = ratio(row.tp, row.tp + row.fn);
        row.scores.f1 = harmonic(row.scores.precision, row.scores.recall);
        report.macro.precision += row.scores.precision;
        report.macro.recall += row.scores.recall;
        report.macro.f1 += row.scores.f1;
    }
    if (label_count > 0) {
        double n = static_cast<double>(label_count);
        report.macro = {report.macro.precision / n, report.macro.recall / n, report.macro.f1 / n};
    }
    report.std = spread(report.rows, report.macro, std_kind);
    return report;
}

std::vector<LabelSet> oracle_k_predictions(const Dataset& annotated) {
    std::vector<LabelSet> out;
    out.reserve(annotated.samples.size());
    for (const auto& s : annotated.samples) {
        if (s.gold.empty()) {
            throw DataError(fmt::format(
                "sample '{}' has no gold labels; oracle-k needs k = |gold| >= 1", s.id));
        }
        out.push_back(top_k(intensities_of(s), s.gold.size()));
    }
    return out;
}

std::vector<LabelSet> threshold_predictions(const Dataset& annotated, const AnnotationConfig& cfg) {
    std::vector<LabelSet> out;
    out.reserve(annotated.samples.size());
    for (const auto& s : annotated.samples) {
        auto values = annotate_threshold(intensities_of(s), cfg);
        LabelSet labels;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] > 0.0) labels.push_back(j);
        }
        out.push_back(std::move(labels));
    }
    return out;
}

std::vector<LabelSet> gold_sets(const Dataset& ds) {
    std::vector<LabelSet> out;
    out.reserve(ds.samples.size());
    for (const auto& s : ds.samples) out.push_back(s.gold);
    return out;
}

Dataset labeled_subset(const Dataset& ds) {
    Dataset out{ds.vocab, {}, ds.split};
    for (const auto& s : ds.samples) {
        if (!s.gold.empty()) out.samples.push_back(s);
    }
    return out;
}

MetricsReport evaluate(const Dataset& annotated, PredictionPolicy policy,
                       const AnnotationConfig& annotation, StdKind std_kind) {
    annotation.validate();
    MetricsReport report;
    report.policy = policy;
    report.threshold = policy == PredictionPolicy::threshold ? annotation.threshold : 0.0;
    report.samples = annotated.samples.size();
    report.label_names = annotated.vocab.names();
    auto gold = gold_sets(annotated);
    auto predicted = policy == PredictionPolicy::oracle_k ? oracle_k_predictions(annotated)
                                                          : threshold_predictions(annotated, annotation);
    report.sample = sample_metrics(gold, predicted);
    report.per_label = per_label_metrics(gold, predicted, annotated.vocab.size(), std_kind);
    return report;
}

void to_json(nlohmann::json& j, const MetricsReport& report) {
    auto triple = [](const PrfTriple& t) {
        return nlohmann::json{{"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
    };
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t l = 0; l < report.per_label.rows.size(); ++l) {
        const auto& r = report.per_label.rows[l];
        auto row = triple(r.scores);
        row["label"] = l < report.label_names.size() ? report.label_names[l] : std::to_string(l);
        row["tp"] = r.tp;
        row["fp"] = r.fp;
        row["fn"] = r.fn;
        rows.push_back(std::move(row));
    }
    j = nlohmann::json{
        {"policy", to_string(report.policy)},
        {"threshold", report.threshold},
        {"samples", report.samples},
        {"sample_level", triple(report.sample)},
        {"per_label", std::move(rows)},
        {"macro_average", triple(report.per_label.macro)},
        {"std", triple(report.per_label.std)},
        {"std_kind", report.per_label.std_kind == StdKind::population ? "population" : "sample"}};
}

std::string format_per_label_csv(const MetricsReport& report) {
    std::string out = "label,precision,recall,f1\n";
    auto line = [&](std::string_view name, const PrfTriple& t) {
        out += fmt::format("{},{:.4f},{:.4f},{:.4f}\n", csv::quote_if_needed(name), t.precision,
                           t.recall, t.f1);
    };
    for (std::size_t l = 0; l < report.per_label.rows.size(); ++l) {
        line(l < report.label_names.size() ? report.label_names[l] : std::to_string(l),
             report.per_label.rows[l].scores);
    }
    line("macro-average", report.per_label.macro);
    line("std", report.per_label.std);
    return out;
}

HitTable hit_table(const Dataset& annotated, std::size_t max_top) {
    std::map<std::size_t, HitRow> buckets;
    HitTable table;
    const std::size_t top_n = std::min(max_top, annotated.vocab.size());
    std::vector<std::size_t> top_hits(top_n, 0);
    std::size_t singles = 0;

    for (const auto& s : annotated.samples) {
        if (s.gold.empty()) continue;
        const auto& values = intensities_of(s);
        const std::size_t k = s.gold.size();
        auto& row = buckets[k];
        row.cardinality = k;
        row.samples += 1;
        row.labels += k;
        row.hits += intersection_size(s.gold, top_k(values, k));

        if (k == 1) {
            ++singles;
            auto order = rank_labels(values);
            auto rank = static_cast<std::size_t>(
                std::find(order.begin(), order.end(), s.gold.front()) - order.begin());
            for (std::size_t n = rank; n < top_n; ++n) ++top_hits[n];
        }
    }
    for (auto& [k, row] : buckets) {
        row.rate = ratio(row.hits, row.labels);
        table.total.samples += row.samples;
        table.total.labels += row.labels;
        table.total.hits += row.hits;
        table.buckets.push_back(row);
    }
    table.total.rate = ratio(table.total.hits, table.total.labels);
    for (std::size_t n = 0; n < top_n; ++n) {
        TopRow row;
        row.n = n + 1;
        row.samples = singles;
        row.hits = top_hits[n];
        row.added = n == 0 ? top_hits[0] : top_hits[n] - top_hits[n - 1];
        row.rate = ratio(row.hits, singles);
        table.top.push_back(row);
    }
    return table;
}

void to_json(nlohmann::json& j, const HitTable& table) {
    auto hit_row = [](const HitRow& r) {
        return nlohmann::json{{"cardinality", r.cardinality},
                              {"samples", r.samples},
                              {"labels", r.labels},
                              {"hits", r.hits},
                              {"hit_rate", r.rate}};
    };
    nlohmann::json buckets = nlohmann::json::array();
    for (const auto& r : table.buckets) buckets.push_back(hit_row(r));
    nlohmann::json top = nlohmann::json::array();
    for (const auto& r : table.top) {
        top.push_back({{"n", r.n},
                       {"samples", r.samples},
                       {"hits", r.hits},
                       {"added", r.added},
                       {"hit_rate", r.rate}});
    }
    j = nlohmann::json{{"buckets", std::move(buckets)}, {"total", hit_row(table.total)}, {"top", top}};
}

std::string format_hit_table_csv(const HitTable& table) {
    std::string out = "class,samples,labels,hits,hit_rate\n";
    for (const auto& r : table.buckets) {
        out += fmt::format("{} label{},{},{},{},{:.4f}\n", r.cardinality, r.cardinality == 1 ? "" : "s",
                           r.samples, r.labels, r.hits, r.rate);
    }
    out += fmt::format("Total,{},{},{},{:.4f}\n", table.total.samples, table.total.labels,
                       table.total.hits, table.total.rate);
    for (const auto& r : table.top) {
        out += fmt::format("Top{},{},{},{},{:.4f}\n", r.n, r.samples, r.samples, r.hits, r.rate);
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataError(fmt::format("pearson: series lengths differ ({} vs {})", x.size(), y.size()));
    }
    if (x.size() < 2) return 0.0;
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PearsonMatrix pearson_matrix(const std::vector<IntensityVector>& rows, std::vector<std::string> labels) {
    const std::size_t C = labels.size();
    const std::size_t m = rows.size();
    std::vector<std::vector<double>> columns(C, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].size() != C) {
            throw DataError(fmt::format("row {} has {} values, expected {}", i, rows[i].size(), C));
        }
        for (std::size_t j = 0; j < C; ++j) columns[j][i] = rows[i][j];
    }

    PearsonMatrix pm;
    pm.labels = std::move(labels);
    pm.values.assign(C * C, 0.0);
    pm.constant.assign(C, false);
    for (std::size_t j = 0; j < C; ++j) {
        const auto& col = columns[j];
        pm.constant[j] = m < 2 || std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
        if (pm.constant[j]) log::warn("label '{}' has constant intensities; its correlations are 0", pm.labels[j]);
    }
    for (std::size_t a = 0; a < C; ++a) {
        pm.values[a * C + a] = pm.constant[a] ? 0.0 : 1.0;
        for (std::size_t b = a + 1; b < C; ++b) {
            double r = (pm.constant[a] || pm.constant[b]) ? 0.0 : pearson(columns[a], columns[b]);
            pm.values[a * C + b] = r;
            pm.values[b * C + a] = r;
        }
    }
    return pm;
}

PearsonMatrix pearson_matrix(const Dataset& annotated) {
    std::vector<IntensityVector> rows;
    rows.reserve(annotated.samples.size());
    for (const auto& s : annotated.samples) rows.push_back(intensities_of(s));
    return pearson_matrix(rows, annotated.vocab.names());
}

}  // namespace eqn
