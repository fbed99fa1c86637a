#include "ems/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string_view>
#include <vector>

#include "ems/error.hpp"
#include "ems/random.hpp"

namespace ems::synthetic {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double round_to(double value, double step) { return std::round(value / step) * step; }

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

template <std::size_t N>
std::size_t pick(std::mt19937_64& rng, const std::array<double, N>& cumulative) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t i = 0; i < N; ++i) {
        if (u < cumulative[i]) return i;
    }
    return N - 1;
}

}  // namespace

std::string admissions_csv(std::uint64_t seed, std::size_t rows, std::size_t base_rows) {
    if (base_rows == 0 || rows < base_rows) throw ValidationError("need 0 < base_rows <= rows");
    std::mt19937_64 rng(derive_seed(seed, "admissions"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<std::string> lines;
    std::vector<std::size_t> low_chance;
    lines.reserve(rows);
    for (std::size_t i = 0; i < base_rows; ++i) {
        const double ability = normal(rng);
        auto noisy = [&](double loading) {
            return loading * ability + std::sqrt(1.0 - loading * loading) * normal(rng);
        };
        const double z_gre = noisy(0.85);
        const double z_toefl = noisy(0.82);
        const double z_rating = noisy(0.68);
        const double z_sop = noisy(0.70);
        const double z_lor = noisy(0.62);
        const double z_cgpa = noisy(0.88);

        const double gre = std::clamp(std::round(316.5 + 11.3 * z_gre), 290.0, 340.0);
        const double toefl = std::clamp(std::round(107.2 + 6.1 * z_toefl), 92.0, 120.0);
        const double rating = std::clamp(std::round(3.11 + 1.14 * z_rating), 1.0, 5.0);
        const double sop = std::clamp(round_to(3.37 + 0.99 * z_sop, 0.5), 1.0, 5.0);
        const double lor = std::clamp(round_to(3.48 + 0.93 * z_lor, 0.5), 1.0, 5.0);
        const double cgpa = std::clamp(round_to(8.58 + 0.60 * z_cgpa, 0.01), 6.8, 9.92);
        const int research = uniform(rng) < sigmoid(0.25 + 1.3 * ability) ? 1 : 0;

        const double merit = 0.45 * z_cgpa + 0.30 * z_gre + 0.15 * z_toefl + 0.05 * z_lor + 0.05 * z_sop;
        const double chance = std::clamp(
            round_to(0.722 + 0.141 * (merit + 0.08 * (research - 0.5) + 0.35 * normal(rng)), 0.01), 0.34, 0.97);
        if (chance < 0.5) low_chance.push_back(lines.size());

        char line[160];
        std::snprintf(line, sizeof line, "%zu,%.0f,%.0f,%.0f,%.1f,%.1f,%.2f,%d,%.2f", i + 1, gre, toefl, rating,
                      sop, lor, cgpa, research, chance);
        lines.emplace_back(line);
    }
    if (low_chance.empty()) low_chance.push_back(0);
    for (std::size_t k = base_rows; k < rows; ++k) {
        const auto& source = lines[low_chance[counter_draw(seed, k) % low_chance.size()]];
        // Renumber the serial column so every augmented row is distinguishable.
        const auto comma = source.find(',');
        lines.push_back(std::to_string(k + 1) + source.substr(comma));
    }

    std::string out = "Serial No.,GRE Score,TOEFL Score,University Rating,SOP,LOR ,CGPA,Research,Chance of Admit \n";
    for (const auto& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

std::string loans_csv(std::uint64_t seed, std::size_t rows) {
    std::mt19937_64 rng(derive_seed(seed, "loans"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    constexpr std::array<std::string_view, 6> kIntents{"EDUCATION", "MEDICAL", "VENTURE",
                                                       "PERSONAL", "DEBTCONSOLIDATION", "HOMEIMPROVEMENT"};
    constexpr std::array<double, 6> kIntentCdf{0.198, 0.384, 0.559, 0.729, 0.889, 1.0};
    constexpr std::array<double, 7> kGradeCdf{0.33, 0.65, 0.85, 0.96, 0.99, 0.998, 1.0};
    constexpr std::array<double, 7> kGradeRate{7.3, 11.0, 13.5, 15.4, 17.0, 18.6, 20.2};
    constexpr std::array<double, 7> kGradeDefaultOnFile{0.0, 0.02, 0.45, 0.38, 0.38, 0.42, 0.45};
    constexpr std::string_view kGrades = "ABCDEFG";

    std::string out =
        "person_age,person_income,person_home_ownership,person_emp_length,loan_intent,loan_grade,loan_amnt,"
        "loan_int_rate,loan_status,loan_percent_income,cb_person_default_on_file,cb_person_cred_hist_length\n";
    out.reserve(rows * 80);
    for (std::size_t i = 0; i < rows; ++i) {
        const double age = std::clamp(std::round(20.0 + std::exp(1.8 + 0.6 * normal(rng))), 20.0, 80.0);
        const double log_income = 10.9 + 0.012 * (age - 27.0) + 0.55 * normal(rng);
        const double income = std::clamp(std::round(std::exp(log_income)), 4000.0, 2'000'000.0);
        const double income_z = (std::log(income) - 10.9) / 0.55;

        const double p_mortgage = sigmoid(-0.45 + 1.1 * income_z);
        const double u_home = uniform(rng);
        std::string_view home = "RENT";
        if (u_home < 0.007) {
            home = "OTHER";
        } else if (u_home < 0.087) {
            home = "OWN";
        } else if (uniform(rng) < p_mortgage) {
            home = "MORTGAGE";
        }

        const double emp = std::clamp(std::round(std::exp(1.25 + 0.85 * normal(rng)) - 1.0), 0.0,
                                      std::max(0.0, age - 16.0));
        const std::size_t intent = pick(rng, kIntentCdf);
        const std::size_t grade = pick(rng, kGradeCdf);
        const double rate = std::clamp(round_to(kGradeRate[grade] + 1.1 * normal(rng), 0.01), 5.42, 23.22);
        const double amount = std::clamp(
            round_to(std::exp(8.85 + 0.3 * income_z + 0.1 * static_cast<double>(grade) + 0.6 * normal(rng)), 25.0),
            500.0, 35000.0);
        const double percent = std::round(100.0 * amount / income) / 100.0;
        const bool default_on_file = uniform(rng) < kGradeDefaultOnFile[grade];
        const double cred = std::clamp(std::round(2.0 + 0.6 * (age - 20.0) + 2.0 * normal(rng)), 2.0, 30.0);

        const bool renting = home == "RENT" || home == "OTHER";
        const bool costly_intent = intent == 1 || intent == 4 || intent == 5;
        double logit = -3.4 + 7.0 * (amount / income - 0.17) + 1.0 * renting - 0.9 * (home == "OWN") +
                       0.55 * static_cast<double>(grade) + 0.45 * costly_intent - 0.35 * income_z +
                       0.2 * default_on_file;
        if (amount / income >= 0.31) logit += 2.6;
        if (grade >= 3 && renting) logit += 1.6;
        const int status = uniform(rng) < sigmoid(1.4 * logit) ? 1 : 0;

        out += std::to_string(static_cast<int>(age)) + "," + std::to_string(static_cast<long>(income)) + "," +
               std::string(home) + "," + std::to_string(static_cast<int>(emp)) + "," +
               std::string(kIntents[intent]) + "," + std::string(1, kGrades[grade]) + "," +
               std::to_string(static_cast<long>(amount)) + "," + fmt("%.2f", rate) + "," + std::to_string(status) +
               "," + fmt("%.2f", percent) + "," + (default_on_file ? "Y" : "N") + "," +
               std::to_string(static_cast<int>(cred)) + "\n";
    }
    return out;
}

}  // namespace ems::synthetic
