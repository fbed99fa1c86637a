// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Data comes from the synthetic configs in configs/, since the original CSVs
// are not redistributable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "checks.hpp"
#include "ems/config.hpp"
#include "ems/dataset.hpp"
#include "ems/harness.hpp"
#include "ems/synthetic.hpp"

using namespace ems;
using harness::MetricsRow;
using harness::Technique;
using harness::TechniqueKind;
using models::Family;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

void note(const std::string& text) {
    std::printf("    %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

struct Experiment {
    std::string name;
    config::RunConfig cfg;
    data::AnnotatedDataset train, test;
};

Experiment load(const std::string& schema) {
    Experiment e;
    e.name = schema;
    e.cfg = config::load_config(std::string(EMS_CONFIG_DIR) + "/" + schema + "_synthetic.ini");
    const auto loaded = config::load_dataset(e.cfg);
    std::tie(e.train, e.test) = data::split(loaded.dataset, e.cfg.mapping.split_fraction, e.cfg.mapping.seed);
    return e;
}

constexpr int kSeeds = 5;
constexpr double kConvergenceLambda = 300.0;

struct SeedAverage {
    double accuracy = 0;
    double moral = 0;
    bool failed = false;
};

SeedAverage average_over_seeds(const Experiment& e, const Technique& t) {
    SeedAverage avg;
    for (int s = 0; s < kSeeds; ++s) {
        auto request = e.cfg.matrix;
        request.seed = e.cfg.matrix.seed + static_cast<std::uint64_t>(s);
        const MetricsRow row = harness::run_cell(Family::NeuralNet, t, e.train, e.test, request);
        if (!row.error.empty() || !row.accuracy || !row.moral_agreement) {
            avg.failed = true;
            note(e.name + ": cell failed: " + row.error);
            continue;
        }
        avg.accuracy += *row.accuracy / kSeeds;
        avg.moral += *row.moral_agreement / kSeeds;
    }
    return avg;
}

bool override_rows_identical(const harness::ResultsTable& table, std::string& detail) {
    std::vector<MetricsRow> rows;
    for (const auto& r : table.rows) {
        if (r.technique.kind == TechniqueKind::OverrideHard) rows.push_back(r);
    }
    if (rows.size() != models::kAllFamilies.size()) {
        detail = fmt("%zu override rows", rows.size());
        return false;
    }
    bool ok = true;
    for (auto r : rows) {
        ok = ok && r.error.empty() && r.moral_agreement == 1.0;
        r.family = rows.front().family;
        ok = ok && r == rows.front();
    }
    detail = fmt("accuracy %.4f, moral agreement %.4f", rows.front().accuracy.value_or(NAN),
                 rows.front().moral_agreement.value_or(NAN));
    return ok;
}

// Same row taxonomy as the published tables: baseline, penalty and override
// per family, then one EMS row per theta, all with the full metric columns.
bool taxonomy_matches(const harness::ResultsTable& table, const harness::MatrixRequest& request,
                      std::string& detail) {
    const std::size_t expected = 3 * models::kAllFamilies.size() + request.thetas.size();
    if (table.rows.size() != expected) {
        detail = fmt("%zu rows, expected %zu", table.rows.size(), expected);
        return false;
    }
    const TechniqueKind order[3] = {TechniqueKind::None, TechniqueKind::PenaltyWeights, TechniqueKind::OverrideHard};
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const bool ems_row = i >= 3 * models::kAllFamilies.size();
        const bool kind_ok = ems_row ? row.technique.kind == TechniqueKind::EmsLoss &&
                                           row.technique.theta == request.thetas[i - 15]
                                     : row.technique.kind == order[i % 3] &&
                                           row.family == models::kAllFamilies[i / 3];
        if (!kind_ok || !row.error.empty() || !row.accuracy || !row.moral_agreement) {
            detail = "row " + std::to_string(i) + " (" + harness::method_label(row) + ") " + row.error;
            return false;
        }
    }
    const auto md = harness::results_markdown(table);
    const auto header_start = md.find("\n|");
    const std::string header =
        header_start == std::string::npos ? "" : md.substr(header_start + 1, md.find('\n', header_start + 1) - header_start - 1);
    for (const char* column : {"Method", "Accuracy", "Precision", "Recall", "F1", "ROC_AUC", "Moral agreement"}) {
        if (header.find(column) == std::string::npos) {
            detail = std::string("missing column ") + column;
            return false;
        }
    }
    detail = fmt("%zu rows", table.rows.size());
    return true;
}

}  // namespace

int main() {
    // 1. Risk-kernel oracle suite.
    {
        const auto start = Clock::now();
        const auto r = checks::risk_kernel_suite(500, 2024);
        const double t = seconds_since(start);
        report(1, r.worst() <= 1e-9 && r.monotone_violations == 0 && t < 5.0,
               fmt("worst identity error %.2e, monotonicity violations %d, %.2f s", r.worst(), r.monotone_violations, t));
    }

    // 2. Composite-loss gradient check.
    {
        const auto start = Clock::now();
        const auto r = checks::gradient_check(17);
        const double t = seconds_since(start);
        report(2, r.tie_free && r.max_relative_error <= 1e-4 && t < 10.0,
               fmt("%zu parameters, max relative error %.2e, %.2f s", r.parameters, r.max_relative_error, t));
    }

    // Shared data for the remaining criteria.
    std::vector<Experiment> experiments;
    std::vector<harness::ResultsTable> tables;
    std::vector<double> compare_seconds;
    for (const char* schema : {"admissions", "loans"}) experiments.push_back(load(schema));
    for (const auto& e : experiments) {
        const auto start = Clock::now();
        tables.push_back(harness::run_matrix(e.name, e.train, e.test, e.cfg.matrix));
        compare_seconds.push_back(seconds_since(start));
    }

    // 3. Override invariance across families.
    {
        bool pass = true;
        std::string detail;
        for (std::size_t i = 0; i < experiments.size(); ++i) {
            std::string d;
            pass = override_rows_identical(tables[i], d) && pass;
            detail += experiments[i].name + ": " + d + "; ";
        }
        report(3, pass, detail);
    }

    // 4. theta = 1 converges towards the override row.
    std::vector<SeedAverage> converged;
    {
        bool pass = true;
        std::string detail;
        for (std::size_t i = 0; i < experiments.size(); ++i) {
            const auto& e = experiments[i];
            const auto avg = average_over_seeds(e, Technique::ems(1.0, kConvergenceLambda));
            converged.push_back(avg);
            double override_accuracy = NAN;
            for (const auto& r : tables[i].rows) {
                if (r.technique.kind == TechniqueKind::OverrideHard) override_accuracy = r.accuracy.value_or(NAN);
            }
            const double gap = 100.0 * std::abs(avg.accuracy - override_accuracy);
            pass = pass && !avg.failed && avg.moral >= 0.95 && gap <= 5.0;
            detail += fmt("%s: moral %.4f, accuracy %.4f vs override %.4f (%.2f points); ", e.name.c_str(), avg.moral,
                          avg.accuracy, override_accuracy, gap);
        }
        report(4, pass, fmt("lambda=%g, %d seeds. ", kConvergenceLambda, kSeeds) + detail);
    }

    // 5. Small theta keeps baseline accuracy.
    {
        bool pass = true;
        std::string detail;
        std::vector<std::string> same_lambda;
        for (std::size_t i = 0; i < experiments.size(); ++i) {
            const auto& e = experiments[i];
            const auto baseline = average_over_seeds(e, Technique::none());
            const auto small = average_over_seeds(e, Technique::ems(0.05, 1.0));
            const auto full = average_over_seeds(e, Technique::ems(1.0, 1.0));
            const double drop = 100.0 * (baseline.accuracy - small.accuracy);
            pass = pass && !baseline.failed && !small.failed && drop <= 5.0 &&
                   small.accuracy >= converged[i].accuracy;
            detail += fmt("%s: theta=0.05 %.4f vs lambda=0 %.4f (%.2f points), vs theta=1 at lambda=%g %.4f; ",
                          e.name.c_str(), small.accuracy, baseline.accuracy, drop, kConvergenceLambda,
                          converged[i].accuracy);
            same_lambda.push_back(fmt("%s: theta=0.05 %.4f, theta=1 %.4f (%s)", e.name.c_str(), small.accuracy,
                                      full.accuracy, small.accuracy >= full.accuracy ? "holds" : "does not hold"));
        }
        report(5, pass, fmt("lambda=1, %d seeds. ", kSeeds) + detail);
        note("same-lambda ordering at lambda=1, informational:");
        for (const auto& s : same_lambda) note(s);
    }

    // 6. Metric oracles.
    {
        const auto r = checks::metrics_oracle_suite(100, 77);
        report(6, r.mismatches == 0 && r.auc_presence_mismatches == 0 && r.auc_error <= 1e-12,
               fmt("%d confusion mismatches over 256 pattern pairs, worst AUC error %.2e", r.mismatches, r.auc_error));
    }

    // 7. Mapper determinism and bounds on the full datasets.
    {
        bool pass = true;
        std::string detail;
        for (const auto& e : experiments) {
            const std::string bytes = e.cfg.schema == data::Schema::Admissions
                                          ? synthetic::admissions_csv(*e.cfg.synthetic_seed)
                                          : synthetic::loans_csv(*e.cfg.synthetic_seed);
            const auto start = Clock::now();
            const auto first = data::annotate(data::parse_csv(bytes, e.cfg.schema), e.cfg.mapping);
            const double t = seconds_since(start);
            const auto second = data::annotate(data::parse_csv(bytes, e.cfg.schema), e.cfg.mapping);
            bool ok = data::annotated_csv(first) == data::annotated_csv(second);
            for (std::size_t i = 0; i < first.rows(); ++i) {
                ok = ok && std::isfinite(first.ej[i]) && std::isfinite(first.tau_plus[i]) &&
                     std::isfinite(first.shortfall[i]);
                const auto& c = first.contexts[i];
                for (double v : {c.severity, c.utility, c.duration, c.intention, c.upheld, c.violated}) {
                    ok = ok && v >= 0.0 && v <= 1.0;
                }
            }
            pass = pass && ok && t < 30.0;
            detail += fmt("%s: %zu rows, %.2f s; ", e.name.c_str(), first.rows(), t);
        }
        report(7, pass, detail);
    }

    // 8. End-to-end compare.
    {
        bool pass = true;
        double total = 0;
        std::string detail;
        for (std::size_t i = 0; i < experiments.size(); ++i) {
            std::string d;
            pass = taxonomy_matches(tables[i], experiments[i].cfg.matrix, d) && pass;
            total += compare_seconds[i];
            detail += fmt("%s: %s, %.1f s; ", experiments[i].name.c_str(), d.c_str(), compare_seconds[i]);
        }
        pass = pass && total < 15 * 60;
        report(8, pass, detail);
    }

    std::printf("%s\n", failures == 0 ? "all criteria passed" : (std::to_string(failures) + " criteria failed").c_str());
    return failures == 0 ? 0 : 1;
}
