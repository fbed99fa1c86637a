#pragma once

// Tabular ingestion and moral annotation for the two supported schemas:
// graduate admissions and loan approval.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ems/core_ethics.hpp"
#include "ems/matrix.hpp"

namespace ems::data {

enum class Schema { Admissions, Loans };

Schema parse_schema(std::string_view name);
std::string_view to_string(Schema schema);

struct ColumnSpec {
    std::string_view name;
    bool categorical = false;
};

// Every required column, target last.
std::span<const ColumnSpec> schema_columns(Schema schema);
std::string_view target_column(Schema schema);

struct Column {
    std::string name;
    bool categorical = false;
    std::vector<std::string> text;  // cells as read
    std::vector<double> values;     // parsed numbers; empty for categoricals
};

struct RawTable {
    Schema schema = Schema::Admissions;
    std::vector<Column> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().text.size(); }
    const Column& column(std::string_view name) const;
    RawTable select_rows(std::span<const std::size_t> indices) const;
};

// Header row required; extra columns are ignored, missing ones raise SchemaError.
// Empty or unparseable numeric cells raise DataError with the 1-based data row.
RawTable parse_csv(std::string_view text, Schema schema);
RawTable load_csv(const std::filesystem::path& path, Schema schema);

struct ColumnStats {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::string> categories;  // code order for categorical columns
};

struct NormalizedTable {
    RawTable table;  // feature columns min-max scaled to [0,1]; target untouched
    std::vector<ColumnStats> stats;
};

// Numeric columns min-max scaled, categoricals coded by sorted category then
// scaled, constant columns mapped to 0.
NormalizedTable normalize(const RawTable& table);

std::map<std::string, double> default_intent_scores();
std::map<std::string, double> default_grade_scale();

struct MappingConfig {
    ethics::NormativeWeights weights = ethics::NormativeWeights::preset("principlism");
    ethics::SignProfile signs;
    double tau_default = 0.05;
    double pass_mark = 0.6;
    double penalty_high = 2.0;
    double penalty_low = 1.0;
    std::map<std::string, double> intent_scores = default_intent_scores();
    double income_split = 0.5;  // income quantile separating low from high earners
    std::map<std::string, double> grade_scale = default_grade_scale();
    double admit_cutoff = 0.5;      // admissions: label = chance of admit >= cutoff
    double oversample_floor = 0.0;  // minority share to reach by oversampling; 0 disables
    std::uint64_t seed = 42;
    double split_fraction = 0.2;

    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Normalized applicant row; admit_chance stays on its raw probability scale.
struct AdmissionsRow {
    double gre = 0.0;
    double toefl = 0.0;
    double university_rating = 0.0;
    double sop = 0.0;
    double lor = 0.0;
    double cgpa = 0.0;
    double research = 0.0;
    double admit_chance = 0.0;
};

ethics::ContextVector map_admissions(const AdmissionsRow& row, const MappingConfig& cfg);

// Raw (unnormalized) loan row.
struct LoanRow {
    double person_income = 0.0;
    double loan_amount = 0.0;
    double emp_length_years = 0.0;
    double cred_hist_years = 0.0;
    std::string_view intent;
    std::string_view grade;
    bool defaulter = false;
};

// Dataset-wide quantities the loan mapping needs.
struct LoanPopulation {
    double max_loan_amount = 1.0;
    double income_split_value = 0.0;  // incomes strictly above count as high
};

struct MappingDiagnostics {
    std::size_t saturated_income = 0;  // rows with person_income <= 0
};

ethics::ContextVector map_loans(const LoanRow& row, const LoanPopulation& population,
                                const MappingConfig& cfg, MappingDiagnostics& diagnostics);

struct AnnotatedDataset {
    Schema schema = Schema::Admissions;
    RawTable raw;
    FeatureMatrix features;
    std::vector<ColumnStats> stats;
    std::vector<ethics::ContextVector> contexts;
    std::vector<double> ej;
    std::vector<double> tau_plus;
    std::vector<double> shortfall;  // max(tau_plus - ej, 0)
    std::vector<int> label;         // original target
    std::vector<int> moral_label;
    MappingDiagnostics diagnostics;

    std::size_t rows() const { return label.size(); }
    AnnotatedDataset subset(std::span<const std::size_t> indices) const;
};

// Original binary target of a raw table.
std::vector<int> target_labels(const RawTable& table, const MappingConfig& cfg);

AnnotatedDataset annotate(const RawTable& table, const MappingConfig& cfg);

// Appends uniformly drawn minority rows until the minority share reaches
// `floor`. Original rows keep their positions at the front.
RawTable oversample_minority(const RawTable& table, std::span<const int> labels, double floor,
                             std::uint64_t seed);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified by label, both index lists ascending.
SplitIndices split_indices(std::span<const int> labels, double test_fraction, std::uint64_t seed);

std::pair<AnnotatedDataset, AnnotatedDataset> split(const AnnotatedDataset& data, double test_fraction,
                                                    std::uint64_t seed);

// Original columns plus the six context terms, ej, tau_plus, shortfall, moral_label.
std::string annotated_csv(const AnnotatedDataset& data);
// Feature columns with moral_label as the target; intermediate columns dropped.
std::string moral_csv(const AnnotatedDataset& data);

}  // namespace ems::data
