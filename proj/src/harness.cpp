#include "ems/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ems/error.hpp"
#include "ems/random.hpp"
#include "ems/risk.hpp"
#include "ems/text.hpp"

namespace ems::harness {

namespace {

std::string percent(const std::optional<double>& value) {
    if (!value) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *value);
    return buf;
}

std::string csv_number(const std::optional<double>& value) { return value ? format_number(*value) : ""; }

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ValidationError(std::string(what) + ": lengths differ");
}

void validate_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be > 0");
}

void validate_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
}

models::FittedModel train_cell(models::Family family, const Technique& technique, const data::AnnotatedDataset& train,
                               const MatrixRequest& request) {
    const FamilySettings settings = request.settings_for(family);
    models::TrainConfig cfg = settings.train;
    // One seed per family, shared by all its techniques, so technique effects
    // are not confounded with initialization.
    cfg.seed = derive_seed(request.seed, models::short_name(family));
    cfg.lambda = 0.0;
    std::vector<double> weights;
    switch (technique.kind) {
        case TechniqueKind::None:
        case TechniqueKind::OverrideHard:
            break;
        case TechniqueKind::PenaltyWeights:
            weights = apply_penalty_weights(train, technique.kappa);
            break;
        case TechniqueKind::EmsLoss:
            if (family != models::Family::NeuralNet) {
                throw ValidationError("the EMS technique only pairs with the neural net");
            }
            cfg.lambda = technique.lambda;
            cfg.theta = technique.theta;
            break;
    }
    return models::fit(settings.spec, train, models::Target::Original, weights, cfg);
}

MetricsRow failed_row(models::Family family, const Technique& technique, const std::string& message) {
    MetricsRow row;
    row.family = family;
    row.technique = technique;
    row.error = message.empty() ? "failed" : message;
    return row;
}

MetricsRow score(models::Family family, const Technique& technique, const Predictions& preds,
                 const data::AnnotatedDataset& test) {
    MetricsRow row = compute_metrics(test.label, preds, test.moral_label);
    row.family = family;
    row.technique = technique;
    return row;
}

}  // namespace

TechniqueKind parse_technique(std::string_view name) {
    if (name == "baseline" || name == "none") return TechniqueKind::None;
    if (name == "penalty") return TechniqueKind::PenaltyWeights;
    if (name == "override") return TechniqueKind::OverrideHard;
    if (name == "ems") return TechniqueKind::EmsLoss;
    throw ValidationError("unknown technique '" + std::string(name) + "'");
}

std::string_view technique_tag(TechniqueKind kind) {
    switch (kind) {
        case TechniqueKind::None: return "baseline";
        case TechniqueKind::PenaltyWeights: return "penalty";
        case TechniqueKind::OverrideHard: return "override";
        case TechniqueKind::EmsLoss: return "ems";
    }
    return "?";
}

std::vector<double> apply_penalty_weights(const data::AnnotatedDataset& data, double kappa) {
    validate_kappa(kappa);
    std::vector<double> weights(data.shortfall.size());
    std::transform(data.shortfall.begin(), data.shortfall.end(), weights.begin(),
                   [kappa](double s) { return 1.0 + kappa * s; });
    return weights;
}

Predictions Predictions::from_proba(std::vector<double> proba) {
    Predictions p;
    p.labels = models::hard_labels(proba);
    p.proba = std::move(proba);
    return p;
}

Predictions apply_override(const Predictions& preds, const data::AnnotatedDataset& data) {
    require_same_length(preds.labels.size(), data.rows(), "apply_override");
    Predictions out;
    out.labels = data.moral_label;
    out.proba.assign(out.labels.begin(), out.labels.end());
    return out;
}

std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> scores) {
    require_same_length(y_true.size(), scores.size(), "roc_auc");
    const std::size_t n = y_true.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    double positives = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (y_true[order[k]]) {
                positive_rank_sum += midrank;
                positives += 1.0;
            }
        }
        i = j;
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) return std::nullopt;
    return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

MetricsRow compute_metrics(std::span<const int> y_true, const Predictions& preds, std::span<const int> moral_labels) {
    require_same_length(y_true.size(), preds.labels.size(), "compute_metrics");
    require_same_length(y_true.size(), preds.proba.size(), "compute_metrics");
    require_same_length(y_true.size(), moral_labels.size(), "compute_metrics");
    if (y_true.empty()) throw ValidationError("compute_metrics on an empty sample");
    double tp = 0, fp = 0, tn = 0, fn = 0, agree = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw ValidationError("y_true must be binary");
        const int p = preds.labels[i];
        if (p && y_true[i]) ++tp;
        else if (p) ++fp;
        else if (y_true[i]) ++fn;
        else ++tn;
        agree += p == moral_labels[i];
    }
    const double n = static_cast<double>(y_true.size());
    MetricsRow row;
    row.accuracy = (tp + tn) / n;
    if (tp + fp > 0) row.precision = tp / (tp + fp);
    if (tp + fn > 0) row.recall = tp / (tp + fn);
    if (row.precision && row.recall) row.f1 = 2 * tp / (2 * tp + fp + fn);
    row.roc_auc = roc_auc(y_true, preds.proba);
    row.moral_agreement = agree / n;
    return row;
}

std::string method_label(const MetricsRow& row) {
    const std::string family(models::display_name(row.family));
    const Technique& t = row.technique;
    switch (t.kind) {
        case TechniqueKind::None: return family + ", baseline";
        case TechniqueKind::PenaltyWeights: return family + ", penalty weights (kappa=" + format_number(t.kappa) + ")";
        case TechniqueKind::OverrideHard: return family + ", hard override";
        case TechniqueKind::EmsLoss:
            return "Expected Moral Shortfall (theta=" + format_number(t.theta) + ", lambda=" + format_number(t.lambda) +
                   ")";
    }
    return family;
}

void MatrixRequest::validate() const {
    if (families.empty()) throw ValidationError("no model families requested");
    if (techniques.empty()) throw ValidationError("no techniques requested");
    validate_kappa(kappa);
    validate_lambda(ems_lambda);
    risk::validate_theta(sweep_theta);
    for (double theta : thetas) risk::validate_theta(theta);
    for (const auto& [family, s] : settings) {
        s.spec.validate();
        s.train.validate();
    }
}

FamilySettings MatrixRequest::settings_for(models::Family family) const {
    if (auto it = settings.find(family); it != settings.end()) return it->second;
    return FamilySettings{models::ModelSpec::defaults(family), models::TrainConfig::defaults(family)};
}

MetricsRow run_cell(models::Family family, const Technique& technique, const data::AnnotatedDataset& train,
                    const data::AnnotatedDataset& test, const MatrixRequest& request) {
    try {
        const auto model = train_cell(family, technique, train, request);
        auto preds = Predictions::from_proba(models::predict_proba(model, test.features));
        if (technique.kind == TechniqueKind::OverrideHard) preds = apply_override(preds, test);
        return score(family, technique, preds, test);
    } catch (const std::exception& e) {
        return failed_row(family, technique, e.what());
    }
}

ResultsTable run_matrix(const std::string& dataset, const data::AnnotatedDataset& train,
                        const data::AnnotatedDataset& test, const MatrixRequest& request) {
    request.validate();
    ResultsTable table;
    table.dataset = dataset;
    table.seed = request.seed;
    auto wants = [&](TechniqueKind kind) {
        return std::find(request.techniques.begin(), request.techniques.end(), kind) != request.techniques.end();
    };
    bool has_network = false;
    for (models::Family family : request.families) {
        has_network = has_network || family == models::Family::NeuralNet;
        // The override row reuses the baseline model's predictions.
        std::optional<Predictions> baseline;
        std::string baseline_error;
        if (wants(TechniqueKind::None) || wants(TechniqueKind::OverrideHard)) {
            try {
                const auto model = train_cell(family, Technique::none(), train, request);
                baseline = Predictions::from_proba(models::predict_proba(model, test.features));
            } catch (const std::exception& e) {
                baseline_error = e.what();
            }
        }
        if (wants(TechniqueKind::None)) {
            table.rows.push_back(baseline ? score(family, Technique::none(), *baseline, test)
                                          : failed_row(family, Technique::none(), baseline_error));
        }
        if (wants(TechniqueKind::PenaltyWeights)) {
            table.rows.push_back(run_cell(family, Technique::penalty(request.kappa), train, test, request));
        }
        if (wants(TechniqueKind::OverrideHard)) {
            const Technique t = Technique::override_hard();
            table.rows.push_back(baseline ? score(family, t, apply_override(*baseline, test), test)
                                          : failed_row(family, t, "baseline model failed: " + baseline_error));
        }
    }
    if (has_network && wants(TechniqueKind::EmsLoss)) {
        for (double theta : request.thetas) {
            table.rows.push_back(run_cell(models::Family::NeuralNet, Technique::ems(theta, request.ems_lambda), train,
                                          test, request));
        }
    }
    return table;
}

SweepAxis parse_axis(std::string_view name) {
    if (name == "theta") return SweepAxis::Theta;
    if (name == "lambda") return SweepAxis::Lambda;
    if (name == "kappa") return SweepAxis::Kappa;
    throw ValidationError("unknown sweep axis '" + std::string(name) + "'");
}

std::string_view axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Theta: return "theta";
        case SweepAxis::Lambda: return "lambda";
        case SweepAxis::Kappa: return "kappa";
    }
    return "?";
}

ResultsTable sweep(const std::string& dataset, const data::AnnotatedDataset& train,
                   const data::AnnotatedDataset& test, SweepAxis axis, std::span<const double> grid,
                   const MatrixRequest& request) {
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    for (double v : grid) {
        switch (axis) {
            case SweepAxis::Theta: risk::validate_theta(v); break;
            case SweepAxis::Lambda: validate_lambda(v); break;
            case SweepAxis::Kappa: validate_kappa(v); break;
        }
    }
    request.validate();
    ResultsTable table;
    table.dataset = dataset;
    table.seed = request.seed;
    models::Family penalty_family = request.families.front();
    if (std::find(request.families.begin(), request.families.end(), models::Family::RandomForest) !=
        request.families.end()) {
        penalty_family = models::Family::RandomForest;
    }
    for (double v : grid) {
        switch (axis) {
            case SweepAxis::Theta:
                table.rows.push_back(
                    run_cell(models::Family::NeuralNet, Technique::ems(v, request.ems_lambda), train, test, request));
                break;
            case SweepAxis::Lambda:
                table.rows.push_back(
                    run_cell(models::Family::NeuralNet, Technique::ems(request.sweep_theta, v), train, test, request));
                break;
            case SweepAxis::Kappa:
                table.rows.push_back(run_cell(penalty_family, Technique::penalty(v), train, test, request));
                break;
        }
    }
    return table;
}

std::string results_csv(const ResultsTable& table) {
    std::ostringstream out;
    std::istringstream snapshot(table.snapshot);
    for (std::string line; std::getline(snapshot, line);) out << "# " << line << '\n';
    out << "dataset,method,family,technique,theta,lambda,kappa,accuracy,precision,recall,f1,roc_auc,"
           "moral_agreement,error\n";
    for (const auto& row : table.rows) {
        const Technique& t = row.technique;
        const bool ems = t.kind == TechniqueKind::EmsLoss;
        out << csv_escape(table.dataset) << ',' << csv_escape(method_label(row)) << ','
            << models::short_name(row.family) << ',' << technique_tag(t.kind) << ','
            << (ems ? format_number(t.theta) : "") << ',' << (ems ? format_number(t.lambda) : "") << ','
            << (t.kind == TechniqueKind::PenaltyWeights ? format_number(t.kappa) : "") << ','
            << csv_number(row.accuracy) << ',' << csv_number(row.precision) << ',' << csv_number(row.recall) << ','
            << csv_number(row.f1) << ',' << csv_number(row.roc_auc) << ',' << csv_number(row.moral_agreement) << ','
            << csv_escape(row.error) << '\n';
    }
    return out.str();
}

std::string results_markdown(const ResultsTable& table) {
    const std::vector<std::string> header{"Method", "Accuracy", "Precision", "Recall", "F1", "ROC_AUC",
                                          "Moral agreement"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : table.rows) {
        std::string label = method_label(row);
        if (!row.error.empty()) label += " [failed: " + row.error + "]";
        cells.push_back({label, percent(row.accuracy), percent(row.precision), percent(row.recall), percent(row.f1),
                         percent(row.roc_auc), percent(row.moral_agreement)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
    }
    auto emit = [&](std::ostringstream& out, const std::vector<std::string>& r) {
        out << '|';
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << ' ' << r[c] << std::string(width[c] - r[c].size(), ' ') << " |";
        }
        out << '\n';
    };
    std::ostringstream out;
    out << "Dataset: " << table.dataset << " (seed " << table.seed << ")\n\n";
    emit(out, header);
    out << '|';
    for (std::size_t c = 0; c < header.size(); ++c) out << std::string(width[c] + 2, '-') << '|';
    out << '\n';
    for (const auto& r : cells) emit(out, r);
    return out.str();
}

std::map<std::string, std::string> plot_csvs(const ResultsTable& table, SweepAxis axis) {
    using Getter = std::optional<double> MetricsRow::*;
    const std::vector<std::pair<std::string, Getter>> metrics{
        {"accuracy", &MetricsRow::accuracy}, {"precision", &MetricsRow::precision},
        {"recall", &MetricsRow::recall},     {"f1", &MetricsRow::f1},
        {"roc_auc", &MetricsRow::roc_auc},   {"moral_agreement", &MetricsRow::moral_agreement}};
    std::map<std::string, std::string> out;
    for (const auto& [name, field] : metrics) {
        std::ostringstream csv;
        csv << axis_name(axis) << ',' << name << '\n';
        for (const auto& row : table.rows) {
            const Technique& t = row.technique;
            const double x = axis == SweepAxis::Theta ? t.theta : axis == SweepAxis::Lambda ? t.lambda : t.kappa;
            csv << format_number(x) << ',' << csv_number(row.*field) << '\n';
        }
        out[name] = csv.str();
    }
    return out;
}

}  // namespace ems::harness
