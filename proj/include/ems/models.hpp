#pragma once

// Five classifier families behind one fit / predict_proba contract. All of them
// accept per-sample weights; the neural net additionally trains against
// BCE + lambda * EMS when lambda > 0.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ems/dataset.hpp"
#include "ems/matrix.hpp"

namespace ems::models {

enum class Family { LogisticRegression, GaussianNaiveBayes, RandomForest, LinearSVM, NeuralNet };

inline constexpr std::array<Family, 5> kAllFamilies{Family::LogisticRegression, Family::GaussianNaiveBayes,
                                                    Family::RandomForest, Family::LinearSVM, Family::NeuralNet};

// Accepts short tags (lr, nb, rf, svm, nn) and the enum spellings.
Family parse_family(std::string_view name);
std::string_view short_name(Family family);
std::string_view display_name(Family family);

struct ModelSpec {
    Family family = Family::LogisticRegression;
    int trees = 100;
    int max_depth = 12;
    int min_samples_split = 2;
    std::vector<int> hidden_layers{32, 16};
    double momentum = 0.9;
    double variance_floor = 1e-9;

    static ModelSpec defaults(Family family);
    void validate() const;
};

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 0.01;
    int batch_size = 32;  // 0 means full batch
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double theta = 1.0;
    double l2 = 0.0;

    static TrainConfig defaults(Family family);
    void validate() const;
};

// Borrowed view over one training set. `weights` empty means uniform;
// `ej` / `tau_plus` are only read when lambda > 0.
struct TrainingData {
    const FeatureMatrix& x;
    std::span<const int> y;
    std::span<const double> weights = {};
    std::span<const double> ej = {};
    std::span<const double> tau_plus = {};
};

enum class Target { Original, Moral };

struct LogisticParams {
    std::vector<double> weights;
    double bias = 0.0;
};

struct NaiveBayesParams {
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> mean;
    std::array<std::vector<double>, 2> variance;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf: weighted share of class 1
};

struct ForestParams {
    std::vector<std::vector<TreeNode>> trees;
};

struct SvmParams {
    std::vector<double> weights;
    double bias = 0.0;
    double platt_slope = 1.0;
    double platt_intercept = 0.0;
};

struct MlpParams {
    std::vector<int> layer_sizes;
    std::vector<double> parameters;
};

using Parameters = std::variant<LogisticParams, NaiveBayesParams, ForestParams, SvmParams, MlpParams>;

struct FittedModel {
    ModelSpec spec;
    TrainConfig config;
    std::size_t input_dim = 0;
    Parameters params;
    std::vector<double> loss_trace;
};

FittedModel fit(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg);

FittedModel fit(const ModelSpec& spec, const data::AnnotatedDataset& train, Target target,
                std::span<const double> weights, const TrainConfig& cfg);

// Probabilities of class 1, each in [0,1].
std::vector<double> predict_proba(const FittedModel& model, const FeatureMatrix& rows);

std::vector<int> hard_labels(std::span<const double> probabilities);

// Versioned JSON text; doubles round-trip exactly.
std::string save_model(const FittedModel& model);
FittedModel load_model(std::string_view text);

inline constexpr double kProbabilityClamp = 1e-7;

double bce_loss(std::span<const int> y, std::span<const double> y_hat);

double composite_loss(std::span<const int> y, std::span<const double> y_hat, std::span<const double> ej,
                      std::span<const double> tau_plus, double lambda, double theta);

}  // namespace ems::models
