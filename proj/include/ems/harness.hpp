#pragma once

// Ethical-competence techniques, the metric suite and the experiment matrix.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ems/dataset.hpp"
#include "ems/models.hpp"

namespace ems::harness {

enum class TechniqueKind { None, PenaltyWeights, OverrideHard, EmsLoss };

inline constexpr std::array<TechniqueKind, 4> kAllTechniques{TechniqueKind::None, TechniqueKind::PenaltyWeights,
                                                            TechniqueKind::OverrideHard, TechniqueKind::EmsLoss};

// Accepts baseline|none, penalty, override, ems.
TechniqueKind parse_technique(std::string_view name);
std::string_view technique_tag(TechniqueKind kind);

struct Technique {
    TechniqueKind kind = TechniqueKind::None;
    double kappa = 0.0;   // PenaltyWeights
    double theta = 1.0;   // EmsLoss
    double lambda = 0.0;  // EmsLoss

    static Technique none() { return {}; }
    static Technique penalty(double kappa) { return {TechniqueKind::PenaltyWeights, kappa, 1.0, 0.0}; }
    static Technique override_hard() { return {TechniqueKind::OverrideHard, 0.0, 1.0, 0.0}; }
    static Technique ems(double theta, double lambda) { return {TechniqueKind::EmsLoss, 0.0, theta, lambda}; }

    bool operator==(const Technique&) const = default;
};

// weight_i = 1 + kappa * shortfall_i.
std::vector<double> apply_penalty_weights(const data::AnnotatedDataset& data, double kappa);

struct Predictions {
    std::vector<double> proba;
    std::vector<int> labels;  // 1[proba >= 0.5]

    static Predictions from_proba(std::vector<double> proba);
};

// Hard labels become the moral labels; probabilities collapse to {0,1}.
Predictions apply_override(const Predictions& preds, const data::AnnotatedDataset& data);

struct MetricsRow {
    models::Family family = models::Family::LogisticRegression;
    Technique technique;
    std::optional<double> accuracy;
    std::optional<double> precision;  // absent without positive predictions
    std::optional<double> recall;     // absent without positive labels
    std::optional<double> f1;
    std::optional<double> roc_auc;  // absent unless both classes are present
    std::optional<double> moral_agreement;
    std::string error;  // non-empty when the cell failed

    bool operator==(const MetricsRow&) const = default;
};

// Area under the ROC curve from the rank statistic, ties at midranks.
std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> scores);

MetricsRow compute_metrics(std::span<const int> y_true, const Predictions& preds, std::span<const int> moral_labels);

// Row label in the style of the results tables.
std::string method_label(const MetricsRow& row);

struct FamilySettings {
    models::ModelSpec spec;
    models::TrainConfig train;
};

struct MatrixRequest {
    std::vector<models::Family> families{models::kAllFamilies.begin(), models::kAllFamilies.end()};
    std::vector<TechniqueKind> techniques{kAllTechniques.begin(), kAllTechniques.end()};
    double kappa = 5.0;
    std::vector<double> thetas{0.05, 0.08, 1.0};
    double ems_lambda = 1.0;
    double sweep_theta = 0.05;  // fixed theta for lambda sweeps
    std::map<models::Family, FamilySettings> settings;  // families not listed use defaults
    std::uint64_t seed = 42;

    // Throws ValidationError.
    void validate() const;
    FamilySettings settings_for(models::Family family) const;
};

struct ResultsTable {
    std::string dataset;
    std::string snapshot;  // config snapshot, written as comment lines
    std::uint64_t seed = 0;
    std::vector<MetricsRow> rows;
};

// Every model is trained on `train` and scored on `test` against the original
// labels. Failed cells keep their row with `error` set.
ResultsTable run_matrix(const std::string& dataset, const data::AnnotatedDataset& train,
                        const data::AnnotatedDataset& test, const MatrixRequest& request);

enum class SweepAxis { Theta, Lambda, Kappa };
SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

// theta: EMS rows at request.ems_lambda. lambda: EMS rows at request.sweep_theta.
// kappa: penalty rows for RandomForest if requested, else the first family.
ResultsTable sweep(const std::string& dataset, const data::AnnotatedDataset& train,
                   const data::AnnotatedDataset& test, SweepAxis axis, std::span<const double> grid,
                   const MatrixRequest& request);

// One training run plus evaluation, the unit both run_matrix and sweep use.
MetricsRow run_cell(models::Family family, const Technique& technique, const data::AnnotatedDataset& train,
                    const data::AnnotatedDataset& test, const MatrixRequest& request);

std::string results_csv(const ResultsTable& table);
// Aligned markdown table with percentages; absent metrics print as n/a.
std::string results_markdown(const ResultsTable& table);
// metric name -> two-column "value,<metric>" CSV along the sweep axis.
std::map<std::string, std::string> plot_csvs(const ResultsTable& table, SweepAxis axis);

}  // namespace ems::harness
