#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eqn/corpus.hpp"
#include "eqn/labelspace.hpp"

namespace eqn {

/// How predicted label sets are derived from annotated intensities.
///   oracle_k:  the top |T_i| labels of each sample.
///   threshold: every label whose thresholded intensity is non-zero.
enum class PredictionPolicy { oracle_k, threshold };

std::string_view to_string(PredictionPolicy policy);
PredictionPolicy parse_policy(std::string_view name);

enum class StdKind { population, sample };

struct PrfTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-sample precision, recall, and F1 averaged over samples.
/// Empty predictions against a non-empty gold set score 0; an empty
/// prediction for an empty gold set scores 1 on all three.
PrfTriple sample_metrics(std::span<const LabelSet> gold, std::span<const LabelSet> predicted);

struct LabelRow {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    PrfTriple scores;
};

struct PerLabelReport {
    std::vector<LabelRow> rows;
    PrfTriple macro;
    PrfTriple std;
    StdKind std_kind = StdKind::population;
};

/// Confusion counts per label; zero denominators give 0.
PerLabelReport per_label_metrics(std::span<const LabelSet> gold, std::span<const LabelSet> predicted,
                                 std::size_t label_count, StdKind std_kind = StdKind::population);

/// top_k(intensities, |gold|) per sample. Throws DataError for samples with
/// empty gold or missing intensities.
std::vector<LabelSet> oracle_k_predictions(const Dataset& annotated);

/// Labels whose value survives annotate_threshold with a non-zero intensity.
std::vector<LabelSet> threshold_predictions(const Dataset& annotated, const AnnotationConfig& cfg);

std::vector<LabelSet> gold_sets(const Dataset& ds);

/// Samples with a non-empty gold set, order preserved.
Dataset labeled_subset(const Dataset& ds);

struct MetricsReport {
    PredictionPolicy policy = PredictionPolicy::oracle_k;
    double threshold = 0.0;
    std::size_t samples = 0;
    PrfTriple sample;
    PerLabelReport per_label;
    std::vector<std::string> label_names;
};

MetricsReport evaluate(const Dataset& annotated, PredictionPolicy policy,
                       const AnnotationConfig& annotation, StdKind std_kind = StdKind::population);

void to_json(nlohmann::json& j, const MetricsReport& report);

/// Per-label rows plus macro-average and std rows, one label per line.
std::string format_per_label_csv(const MetricsReport& report);

struct HitRow {
    std::size_t cardinality = 0;  // 0 marks the totals row
    std::size_t samples = 0;
    std::size_t labels = 0;
    std::size_t hits = 0;
    double rate = 0.0;
};

struct TopRow {
    std::size_t n = 0;
    std::size_t samples = 0;
    std::size_t hits = 0;   // cumulative
    std::size_t added = 0;  // increment over Top(n-1)
    double rate = 0.0;
};

struct HitTable {
    std::vector<HitRow> buckets;  // ascending cardinality
    HitRow total;
    std::vector<TopRow> top;  // single-label samples only
};

/// Hits of oracle-k predictions grouped by gold cardinality, plus cumulative
/// Top-n hit counts for single-label samples (n = 1..min(max_top, C)).
/// Samples with an empty gold set are skipped.
HitTable hit_table(const Dataset& annotated, std::size_t max_top = 3);

void to_json(nlohmann::json& j, const HitTable& table);
std::string format_hit_table_csv(const HitTable& table);

struct PearsonMatrix {
    std::vector<std::string> labels;
    std::vector<double> values;  // size x size, row-major
    std::vector<bool> constant;  // columns with zero variance

    std::size_t size() const noexcept { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
};

/// Pearson r of two equally long series; 0 when either has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation between every pair of label intensity columns.
/// Constant columns correlate 0 with everything, themselves included.
PearsonMatrix pearson_matrix(const Dataset& annotated);
PearsonMatrix pearson_matrix(const std::vector<IntensityVector>& rows,
                             std::vector<std::string> labels);

std::string format_pearson_csv(const PearsonMatrix& pm);
PearsonMatrix parse_pearson_csv(std::string_view content);

/// Standalone SVG: one cell per pair, blue (-1) through white (0) to red (+1),
/// with the value printed in each cell.
std::string format_heatmap_svg(const PearsonMatrix& pm);

/// Writes `csv_path` and `svg_path`; throws DataError when either is unwritable.
void export_heatmap(const PearsonMatrix& pm, const std::string& csv_path,
                    const std::string& svg_path);

}  // namespace eqn
