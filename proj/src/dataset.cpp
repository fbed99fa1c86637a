#include "ems/dataset.hpp"

#include <boost/tokenizer.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ems/error.hpp"
#include "ems/random.hpp"
#include "ems/risk.hpp"
#include "ems/text.hpp"

namespace ems::data {

namespace {

constexpr std::array<ColumnSpec, 8> kAdmissionsColumns{{
    {"GRE Score", false},
    {"TOEFL Score", false},
    {"University Rating", false},
    {"SOP", false},
    {"LOR", false},
    {"CGPA", false},
    {"Research", false},
    {"Chance of Admit", false},
}};

constexpr std::array<ColumnSpec, 12> kLoanColumns{{
    {"person_age", false},
    {"person_income", false},
    {"person_home_ownership", true},
    {"person_emp_length", false},
    {"loan_intent", true},
    {"loan_grade", true},
    {"loan_amnt", false},
    {"loan_int_rate", false},
    {"loan_percent_income", false},
    {"cb_person_default_on_file", true},
    {"cb_person_cred_hist_length", false},
    {"loan_status", false},
}};

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    Tokenizer tokens(line);
    for (const auto& token : tokens) cells.push_back(token);
    return cells;
}

double mean_of(std::initializer_list<double> values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double clamp_unit(double value) { return std::clamp(value, 0.0, 1.0); }

void require_in_unit(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        throw ValidationError(std::string(name) + " must be a normalized value in [0,1]");
    }
}

double lookup_score(const std::map<std::string, double>& scores, std::string_view key, const char* what) {
    const auto it = scores.find(std::string(key));
    if (it == scores.end()) {
        throw ValidationError(std::string("no ") + what + " score configured for '" + std::string(key) + "'");
    }
    return it->second;
}

bool is_target(Schema schema, std::string_view name) { return name == target_column(schema); }

const std::vector<double>& numeric(const RawTable& table, std::string_view name) {
    return table.column(name).values;
}

}  // namespace

Schema parse_schema(std::string_view name) {
    if (name == "admissions") return Schema::Admissions;
    if (name == "loans") return Schema::Loans;
    throw ValidationError("unknown schema '" + std::string(name) + "' (expected admissions or loans)");
}

std::string_view to_string(Schema schema) {
    return schema == Schema::Admissions ? "admissions" : "loans";
}

std::span<const ColumnSpec> schema_columns(Schema schema) {
    if (schema == Schema::Admissions) return kAdmissionsColumns;
    return kLoanColumns;
}

std::string_view target_column(Schema schema) { return schema_columns(schema).back().name; }

const Column& RawTable::column(std::string_view name) const {
    for (const auto& c : columns) {
        if (c.name == name) return c;
    }
    throw SchemaError("missing column '" + std::string(name) + "'");
}

RawTable RawTable::select_rows(std::span<const std::size_t> indices) const {
    RawTable out;
    out.schema = schema;
    out.columns.reserve(columns.size());
    for (const auto& c : columns) {
        Column picked{c.name, c.categorical, {}, {}};
        picked.text.reserve(indices.size());
        for (auto i : indices) picked.text.push_back(c.text[i]);
        if (!c.values.empty()) {
            picked.values.reserve(indices.size());
            for (auto i : indices) picked.values.push_back(c.values[i]);
        }
        out.columns.push_back(std::move(picked));
    }
    return out;
}

RawTable parse_csv(std::string_view text, Schema schema) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_csv_line(std::string(trim(line)));
            break;
        }
    }
    if (header.empty()) throw SchemaError("empty file: no header row");
    for (auto& h : header) h = std::string(trim(h));

    const auto specs = schema_columns(schema);
    std::vector<std::size_t> source_index;
    RawTable table;
    table.schema = schema;
    for (const auto& spec : specs) {
        const auto it = std::find(header.begin(), header.end(), spec.name);
        if (it == header.end()) throw SchemaError("missing column '" + std::string(spec.name) + "'");
        source_index.push_back(static_cast<std::size_t>(it - header.begin()));
        table.columns.push_back(Column{std::string(spec.name), spec.categorical, {}, {}});
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        ++row;
        std::vector<std::string> cells;
        try {
            cells = split_csv_line(std::string(trimmed));
        } catch (const boost::escaped_list_error& e) {
            throw DataError(row, std::string("malformed CSV line: ") + e.what());
        }
        if (cells.size() != header.size()) {
            throw DataError(row, "expected " + std::to_string(header.size()) + " cells, found " +
                                     std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < specs.size(); ++c) {
            auto& column = table.columns[c];
            const std::string cell(trim(cells[source_index[c]]));
            if (cell.empty()) throw DataError(row, "empty cell in column '" + column.name + "'");
            if (!column.categorical) {
                const auto value = parse_number(cell);
                if (!value) throw DataError(row, "unparseable number '" + cell + "' in column '" + column.name + "'");
                column.values.push_back(*value);
            }
            column.text.push_back(cell);
        }
    }
    if (row == 0) throw SchemaError("file has a header but no data rows");
    return table;
}

RawTable load_csv(const std::filesystem::path& path, Schema schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), schema);
}

NormalizedTable normalize(const RawTable& table) {
    NormalizedTable out{table, {}};
    for (auto& column : out.table.columns) {
        if (is_target(table.schema, column.name)) continue;
        ColumnStats stats{column.name, 0.0, 0.0, {}};
        if (column.categorical) {
            std::set<std::string> unique(column.text.begin(), column.text.end());
            stats.categories.assign(unique.begin(), unique.end());
            column.values.clear();
            column.values.reserve(column.text.size());
            for (const auto& cell : column.text) {
                const auto it = std::lower_bound(stats.categories.begin(), stats.categories.end(), cell);
                column.values.push_back(static_cast<double>(it - stats.categories.begin()));
            }
        }
        for (std::size_t r = 0; r < column.values.size(); ++r) {
            if (!std::isfinite(column.values[r])) {
                throw DataError(r + 1, "non-finite value in column '" + column.name + "'");
            }
        }
        const auto [lo, hi] = std::minmax_element(column.values.begin(), column.values.end());
        stats.min = *lo;
        stats.max = *hi;
        const double range = stats.max - stats.min;
        for (auto& v : column.values) v = range > 0.0 ? (v - stats.min) / range : 0.0;
        out.stats.push_back(std::move(stats));
    }
    return out;
}

std::map<std::string, double> default_intent_scores() {
    return {{"MEDICAL", 1.0},        {"EDUCATION", 0.9}, {"DEBTCONSOLIDATION", 0.6},
            {"VENTURE", 0.4},        {"HOMEIMPROVEMENT", 0.3}, {"PERSONAL", 0.2}};
}

std::map<std::string, double> default_grade_scale() {
    std::map<std::string, double> scale;
    const std::string grades = "ABCDEFG";
    for (std::size_t i = 0; i < grades.size(); ++i) {
        scale[std::string(1, grades[i])] = static_cast<double>(i) / 6.0;
    }
    return scale;
}

void MappingConfig::validate() const {
    weights.validate();
    signs.validate();
    auto check = [](bool ok, const char* field, const char* rule) {
        if (!ok) throw ValidationError(std::string(field) + " " + rule);
    };
    check(std::isfinite(tau_default) && tau_default >= 0.0, "tau_default", "must be >= 0");
    check(pass_mark > 0.0 && pass_mark < 1.0, "pass_mark", "must be in (0,1)");
    check(penalty_low > 0.0 && std::isfinite(penalty_low), "penalty_low", "must be > 0");
    check(penalty_high >= penalty_low && std::isfinite(penalty_high), "penalty_high", "must be >= penalty_low");
    check(income_split > 0.0 && income_split < 1.0, "income_split", "must be in (0,1)");
    check(admit_cutoff > 0.0 && admit_cutoff <= 1.0, "admit_cutoff", "must be in (0,1]");
    check(oversample_floor >= 0.0 && oversample_floor <= 0.5, "oversample_floor", "must be in [0,0.5]");
    check(split_fraction > 0.0 && split_fraction < 1.0, "split_fraction", "must be in (0,1)");
    check(!intent_scores.empty(), "intent_scores", "must not be empty");
    check(!grade_scale.empty(), "grade_scale", "must not be empty");
    for (const auto& [name, score] : intent_scores) {
        check(score >= 0.0 && score <= 1.0, "intent_scores", "values must be in [0,1]");
    }
    for (const auto& [name, score] : grade_scale) {
        check(score >= 0.0 && score <= 1.0, "grade_scale", "values must be in [0,1]");
    }
}

ethics::ContextVector map_admissions(const AdmissionsRow& row, const MappingConfig& cfg) {
    require_in_unit(row.gre, "gre");
    require_in_unit(row.toefl, "toefl");
    require_in_unit(row.university_rating, "university_rating");
    require_in_unit(row.sop, "sop");
    require_in_unit(row.lor, "lor");
    require_in_unit(row.cgpa, "cgpa");
    require_in_unit(row.research, "research");
    require_in_unit(row.admit_chance, "admit_chance");

    const double overall = mean_of({row.gre, row.cgpa, row.toefl});
    const bool passing = overall > cfg.pass_mark;
    const bool research = row.research >= 0.5;

    ethics::ContextVector ec;
    ec.severity = clamp_unit(mean_of({row.gre, row.cgpa}));
    ec.utility = clamp_unit(passing ? overall / cfg.penalty_low : overall / cfg.penalty_high);
    ec.duration = clamp_unit((research ? 1.0 : 0.5) * mean_of({row.university_rating, row.cgpa}));
    ec.intention = clamp_unit(mean_of({row.sop, row.research}));
    ec.upheld = clamp_unit(mean_of({row.gre, row.cgpa, row.sop, row.lor}));
    // Only "passing but rejected" asserts a violation; every other branch is 0.
    ec.violated = clamp_unit(passing && row.admit_chance < 0.5 ? overall : 0.0);
    return ec;
}

ethics::ContextVector map_loans(const LoanRow& row, const LoanPopulation& population,
                                const MappingConfig& cfg, MappingDiagnostics& diagnostics) {
    if (!std::isfinite(row.loan_amount) || row.loan_amount < 0.0) {
        throw ValidationError("loan amount must be >= 0");
    }
    if (!std::isfinite(row.person_income)) throw ValidationError("income must be finite");
    if (!(row.emp_length_years >= 0.0) || !(row.cred_hist_years >= 0.0)) {
        throw ValidationError("employment and credit history lengths must be >= 0");
    }
    if (!(population.max_loan_amount > 0.0)) throw ValidationError("max loan amount must be > 0");

    const double intent = lookup_score(cfg.intent_scores, row.intent, "loan intent");
    const double grade = lookup_score(cfg.grade_scale, row.grade, "loan grade");
    const bool high_income = row.person_income > population.income_split_value;

    ethics::ContextVector ec;
    if (row.person_income <= 0.0) {
        ++diagnostics.saturated_income;
        ec.severity = 1.0;
    } else {
        ec.severity = std::min(1.0, row.loan_amount / row.person_income);
    }
    ec.utility = clamp_unit(intent * row.loan_amount / population.max_loan_amount);
    ec.duration = std::min(1.0, 1.0 / (1.0 + row.emp_length_years) + 1.0 / (1.0 + row.cred_hist_years));
    ec.intention = intent;
    if (!row.defaulter) {
        ec.upheld = 1.0;
    } else {
        ec.upheld = high_income ? 0.5 : 0.0;
    }
    ec.violated = std::max(row.defaulter ? 1.0 : 0.0, grade);
    return ec;
}

AnnotatedDataset AnnotatedDataset::subset(std::span<const std::size_t> indices) const {
    AnnotatedDataset out;
    out.schema = schema;
    out.raw = raw.select_rows(indices);
    out.features = features.select_rows(indices);
    out.stats = stats;
    auto pick = [&](const auto& src, auto& dst) {
        dst.reserve(indices.size());
        for (auto i : indices) dst.push_back(src[i]);
    };
    pick(contexts, out.contexts);
    pick(ej, out.ej);
    pick(tau_plus, out.tau_plus);
    pick(shortfall, out.shortfall);
    pick(label, out.label);
    pick(moral_label, out.moral_label);
    return out;
}

std::vector<int> target_labels(const RawTable& table, const MappingConfig& cfg) {
    const auto& target = numeric(table, target_column(table.schema));
    std::vector<int> labels;
    labels.reserve(target.size());
    for (std::size_t r = 0; r < target.size(); ++r) {
        const double v = target[r];
        if (table.schema == Schema::Admissions) {
            if (v < 0.0 || v > 1.0) throw DataError(r + 1, "Chance of Admit must be in [0,1]");
            labels.push_back(v >= cfg.admit_cutoff ? 1 : 0);
        } else {
            if (v != 0.0 && v != 1.0) throw DataError(r + 1, "loan_status must be 0 or 1");
            labels.push_back(static_cast<int>(v));
        }
    }
    return labels;
}

AnnotatedDataset annotate(const RawTable& table, const MappingConfig& cfg) {
    cfg.validate();
    const std::size_t n = table.rows();
    if (n == 0) throw DataError("cannot annotate an empty table");

    AnnotatedDataset out;
    out.schema = table.schema;
    out.raw = table;
    out.label = target_labels(table, cfg);

    NormalizedTable normalized = normalize(table);
    out.stats = normalized.stats;
    std::vector<const Column*> feature_columns;
    for (const auto& column : normalized.table.columns) {
        if (!is_target(table.schema, column.name)) feature_columns.push_back(&column);
    }
    out.features = FeatureMatrix(n, feature_columns.size());
    for (std::size_t j = 0; j < feature_columns.size(); ++j) {
        out.features.names.push_back(feature_columns[j]->name);
        for (std::size_t i = 0; i < n; ++i) out.features.at(i, j) = feature_columns[j]->values[i];
    }

    out.contexts.reserve(n);
    if (table.schema == Schema::Admissions) {
        const auto& norm = normalized.table;
        const auto& gre = numeric(norm, "GRE Score");
        const auto& toefl = numeric(norm, "TOEFL Score");
        const auto& rating = numeric(norm, "University Rating");
        const auto& sop = numeric(norm, "SOP");
        const auto& lor = numeric(norm, "LOR");
        const auto& cgpa = numeric(norm, "CGPA");
        const auto& research = numeric(norm, "Research");
        const auto& chance = numeric(table, "Chance of Admit");
        for (std::size_t i = 0; i < n; ++i) {
            const AdmissionsRow row{gre[i], toefl[i], rating[i], sop[i], lor[i], cgpa[i], research[i], chance[i]};
            try {
                out.contexts.push_back(map_admissions(row, cfg));
            } catch (const ValidationError& e) {
                throw DataError(i + 1, e.what());
            }
        }
    } else {
        const auto& income = numeric(table, "person_income");
        const auto& amount = numeric(table, "loan_amnt");
        const auto& emp = numeric(table, "person_emp_length");
        const auto& cred = numeric(table, "cb_person_cred_hist_length");
        const auto& intent = table.column("loan_intent").text;
        const auto& grade = table.column("loan_grade").text;
        const auto& defaulted = table.column("cb_person_default_on_file").text;
        LoanPopulation population;
        population.max_loan_amount = *std::max_element(amount.begin(), amount.end());
        population.income_split_value = risk::lower_quantile(income, cfg.income_split);
        for (std::size_t i = 0; i < n; ++i) {
            if (defaulted[i] != "Y" && defaulted[i] != "N") {
                throw DataError(i + 1, "cb_person_default_on_file must be Y or N");
            }
            const LoanRow row{income[i], amount[i], emp[i], cred[i], intent[i], grade[i], defaulted[i] == "Y"};
            try {
                out.contexts.push_back(map_loans(row, population, cfg, out.diagnostics));
            } catch (const ValidationError& e) {
                throw DataError(i + 1, e.what());
            }
        }
    }

    out.ej.reserve(n);
    out.tau_plus.reserve(n);
    out.shortfall.reserve(n);
    out.moral_label.reserve(n);
    for (const auto& ec : out.contexts) {
        const double ej = ethics::ethical_judgment(cfg.weights, ec, cfg.signs);
        const auto thresholds = ethics::context_threshold(cfg.weights, ec, cfg.tau_default);
        out.ej.push_back(ej);
        out.tau_plus.push_back(thresholds.tau_plus());
        out.shortfall.push_back(std::max(thresholds.tau_plus() - ej, 0.0));
        out.moral_label.push_back(ethics::moral_label(ej, thresholds));
    }
    return out;
}

RawTable oversample_minority(const RawTable& table, std::span<const int> labels, double floor,
                             std::uint64_t seed) {
    if (labels.size() != table.rows()) throw ValidationError("label count does not match table rows");
    if (!(floor > 0.0 && floor <= 0.5)) throw ValidationError("oversample floor must be in (0, 0.5]");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0].push_back(i);
    if (by_class[0].empty() || by_class[1].empty()) {
        throw DataError("cannot oversample a single-class table");
    }
    const auto& minority = by_class[0].size() <= by_class[1].size() ? by_class[0] : by_class[1];
    const double n = static_cast<double>(labels.size());
    const double m = static_cast<double>(minority.size());
    if (m / n >= floor) return table;

    const auto extra = static_cast<std::size_t>(std::ceil((floor * n - m) / (1.0 - floor) - 1e-9));
    std::vector<std::size_t> rows(labels.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (std::size_t k = 0; k < extra; ++k) {
        rows.push_back(minority[counter_draw(seed, k) % minority.size()]);
    }
    return table.select_rows(rows);
}

SplitIndices split_indices(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValidationError("split fraction must be in (0,1)");
    }
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0].push_back(i);

    std::vector<char> in_test(labels.size(), 0);
    for (auto& members : by_class) {
        std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
        keyed.reserve(members.size());
        for (auto i : members) keyed.emplace_back(counter_draw(seed, i), i);
        std::sort(keyed.begin(), keyed.end());
        const auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        for (std::size_t k = 0; k < take; ++k) in_test[keyed[k].second] = 1;
    }
    SplitIndices out;
    for (std::size_t i = 0; i < labels.size(); ++i) (in_test[i] ? out.test : out.train).push_back(i);
    return out;
}

std::pair<AnnotatedDataset, AnnotatedDataset> split(const AnnotatedDataset& data, double test_fraction,
                                                    std::uint64_t seed) {
    const auto indices = split_indices(data.label, test_fraction, seed);
    return {data.subset(indices.train), data.subset(indices.test)};
}

std::string annotated_csv(const AnnotatedDataset& data) {
    std::string out;
    for (const auto& column : data.raw.columns) out += csv_escape(column.name) + ",";
    out += "c_severity,c_utility,c_duration,intention,pr_upheld,pr_violated,ej,tau_plus,shortfall,moral_label\n";
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (const auto& column : data.raw.columns) out += csv_escape(column.text[i]) + ",";
        for (double term : data.contexts[i].terms()) out += format_number(term) + ",";
        out += format_number(data.ej[i]) + "," + format_number(data.tau_plus[i]) + "," +
               format_number(data.shortfall[i]) + "," + std::to_string(data.moral_label[i]) + "\n";
    }
    return out;
}

std::string moral_csv(const AnnotatedDataset& data) {
    std::string out;
    std::vector<const Column*> features;
    for (const auto& column : data.raw.columns) {
        if (!is_target(data.schema, column.name)) features.push_back(&column);
    }
    for (const auto* column : features) out += csv_escape(column->name) + ",";
    out += "moral_label\n";
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (const auto* column : features) out += csv_escape(column->text[i]) + ",";
        out += std::to_string(data.moral_label[i]) + "\n";
    }
    return out;
}

}  // namespace ems::data
