#include "ems/models.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ems/error.hpp"
#include "ems/neural_net.hpp"
#include "ems/random.hpp"
#include "ems/risk.hpp"
#include "forest.hpp"

namespace ems::models {

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sample_weight(const TrainingData& data, std::size_t i) {
    return data.weights.empty() ? 1.0 : data.weights[i];
}

std::array<double, 2> class_weight(const TrainingData& data) {
    std::array<double, 2> totals{};
    for (std::size_t i = 0; i < data.y.size(); ++i) totals[data.y[i] != 0] += sample_weight(data, i);
    return totals;
}

void require_two_classes(const TrainingData& data, Family family) {
    const auto totals = class_weight(data);
    if (totals[0] <= 0.0 || totals[1] <= 0.0) {
        throw TrainingError(std::string(display_name(family)) + " needs both classes in the training set");
    }
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw TrainingError(std::string("non-finite ") + what + " during training");
    }
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

LogisticParams fit_logistic(const TrainingData& data, const TrainConfig& cfg, std::vector<double>& trace) {
    const std::size_t n = data.x.rows;
    const std::size_t d = data.x.cols;
    LogisticParams params{std::vector<double>(d, 0.0), 0.0};
    auto order = iota_rows(n);
    std::mt19937_64 rng(derive_seed(cfg.seed, "shuffle"));
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(cfg.batch_size));
    std::vector<double> grad(d);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_bias = 0.0;
            double weight_sum = 0.0;
            double loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                const double w = sample_weight(data, i);
                const double z = dot(params.weights, data.x.row(i)) + params.bias;
                const double residual = nn::sigmoid(z) - data.y[i];
                const auto x = data.x.row(i);
                for (std::size_t j = 0; j < d; ++j) grad[j] += w * residual * x[j];
                grad_bias += w * residual;
                loss += w * (softplus(z) - data.y[i] * z);
                weight_sum += w;
            }
            if (!(weight_sum > 0.0)) continue;
            for (std::size_t j = 0; j < d; ++j) {
                params.weights[j] -= cfg.learning_rate * (grad[j] / weight_sum + cfg.l2 * params.weights[j]);
            }
            params.bias -= cfg.learning_rate * grad_bias / weight_sum;
            epoch_loss += loss / weight_sum * static_cast<double>(end - start);
        }
        require_finite(params.weights, "logistic weight");
        trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return params;
}

NaiveBayesParams fit_naive_bayes(const ModelSpec& spec, const TrainingData& data) {
    require_two_classes(data, spec.family);
    const std::size_t d = data.x.cols;
    const auto totals = class_weight(data);
    NaiveBayesParams params;
    for (int c = 0; c < 2; ++c) {
        params.log_prior[c] = std::log(totals[c] / (totals[0] + totals[1]));
        params.mean[c].assign(d, 0.0);
        params.variance[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < data.x.rows; ++i) {
        const int c = data.y[i] != 0;
        const double w = sample_weight(data, i);
        const auto x = data.x.row(i);
        for (std::size_t j = 0; j < d; ++j) params.mean[c][j] += w * x[j];
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& m : params.mean[c]) m /= totals[c];
    }
    for (std::size_t i = 0; i < data.x.rows; ++i) {
        const int c = data.y[i] != 0;
        const double w = sample_weight(data, i);
        const auto x = data.x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - params.mean[c][j];
            params.variance[c][j] += w * diff * diff;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (auto& v : params.variance[c]) v = std::max(v / totals[c], spec.variance_floor);
    }
    return params;
}

double naive_bayes_proba(const NaiveBayesParams& params, std::span<const double> x) {
    std::array<double, 2> joint{};
    for (int c = 0; c < 2; ++c) {
        double lj = params.log_prior[c];
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double var = params.variance[c][j];
            const double diff = x[j] - params.mean[c][j];
            lj -= 0.5 * (std::log(2.0 * M_PI * var) + diff * diff / var);
        }
        joint[c] = lj;
    }
    return nn::sigmoid(joint[1] - joint[0]);
}

// Platt's logistic link sigmoid(slope * margin + intercept), fitted by damped Newton
// on smoothed targets.
void fit_platt(SvmParams& params, std::span<const double> margins, const TrainingData& data) {
    const auto totals = class_weight(data);
    const double target_pos = (totals[1] + 1.0) / (totals[1] + 2.0);
    const double target_neg = 1.0 / (totals[0] + 2.0);
    const std::size_t n = margins.size();
    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = data.y[i] ? target_pos : target_neg;
            const double z = a * margins[i] + b;
            f += sample_weight(data, i) * (softplus(z) - t * z);
        }
        return f;
    };
    double a = 0.0;
    double b = std::log((totals[1] + 1.0) / (totals[0] + 1.0));
    double f = objective(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = data.y[i] ? target_pos : target_neg;
            const double w = sample_weight(data, i);
            const double p = nn::sigmoid(a * margins[i] + b);
            const double r = w * (p - t);
            const double h = w * p * (1.0 - p);
            ga += r * margins[i];
            gb += r;
            haa += h * margins[i] * margins[i];
            hab += h * margins[i];
            hbb += h;
        }
        if (std::abs(ga) < 1e-7 && std::abs(gb) < 1e-7) break;
        const double det = haa * hbb - hab * hab;
        const double da = -(hbb * ga - hab * gb) / det;
        const double db = -(-hab * ga + haa * gb) / det;
        double step = 1.0;
        bool improved = false;
        while (step >= 1e-10) {
            const double fa = objective(a + step * da, b + step * db);
            if (fa < f + 1e-4 * step * (ga * da + gb * db)) {
                a += step * da;
                b += step * db;
                f = fa;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    params.platt_slope = a;
    params.platt_intercept = b;
}

SvmParams fit_svm(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg, std::vector<double>& trace) {
    require_two_classes(data, spec.family);
    const std::size_t n = data.x.rows;
    const std::size_t d = data.x.cols;
    SvmParams params;
    params.weights.assign(d, 0.0);
    auto order = iota_rows(n);
    std::mt19937_64 rng(derive_seed(cfg.seed, "shuffle"));
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double hinge = 0.0;
        for (std::size_t i : order) {
            const double eta = cfg.learning_rate / (1.0 + cfg.l2 * cfg.learning_rate * static_cast<double>(step++));
            const double y = data.y[i] ? 1.0 : -1.0;
            const auto x = data.x.row(i);
            const double margin = y * (dot(params.weights, x) + params.bias);
            const double shrink = 1.0 - eta * cfg.l2;
            for (auto& w : params.weights) w *= shrink;
            if (margin < 1.0) {
                const double w_i = sample_weight(data, i);
                for (std::size_t j = 0; j < d; ++j) params.weights[j] += eta * w_i * y * x[j];
                params.bias += eta * w_i * y;
                hinge += w_i * (1.0 - margin);
            }
        }
        require_finite(params.weights, "SVM weight");
        trace.push_back(hinge / static_cast<double>(n));
    }
    std::vector<double> margins(n);
    for (std::size_t i = 0; i < n; ++i) margins[i] = dot(params.weights, data.x.row(i)) + params.bias;
    fit_platt(params, margins, data);
    return params;
}

MlpParams fit_network(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg,
                      std::vector<double>& trace) {
    std::vector<int> sizes{static_cast<int>(data.x.cols)};
    sizes.insert(sizes.end(), spec.hidden_layers.begin(), spec.hidden_layers.end());
    sizes.push_back(1);
    nn::Mlp net(sizes, derive_seed(cfg.seed, "init"));

    const std::size_t n = data.x.rows;
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(cfg.batch_size));
    auto order = iota_rows(n);
    std::mt19937_64 rng(derive_seed(cfg.seed, "shuffle"));
    const auto params = net.parameters();
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<double> grad;

    // Weight blocks get the L2 term; biases do not.
    std::vector<char> is_weight(params.size(), 0);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        std::fill(is_weight.begin() + static_cast<std::ptrdiff_t>(net.weight_offset(l)),
                  is_weight.begin() + static_cast<std::ptrdiff_t>(net.bias_offset(l)), 1);
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            const nn::Batch view{data.x, std::span<const std::size_t>(order).subspan(start, len), data.y,
                                 data.weights, data.ej, data.tau_plus};
            const auto loss = nn::loss_and_gradient(net, view, cfg.lambda, cfg.theta, &grad);
            // NaN outputs zero out the clamped BCE gradient, so the loss is checked too.
            if (!std::isfinite(loss.total)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
            }
            for (std::size_t k = 0; k < params.size(); ++k) {
                const double g = grad[k] + (is_weight[k] ? cfg.l2 * params[k] : 0.0);
                if (!std::isfinite(g)) {
                    throw TrainingError("non-finite gradient at epoch " + std::to_string(epoch) + ", parameter " +
                                        std::to_string(k));
                }
                velocity[k] = spec.momentum * velocity[k] - cfg.learning_rate * g;
                params[k] += velocity[k];
            }
            epoch_loss += loss.total;
            ++batches;
        }
        trace.push_back(epoch_loss / static_cast<double>(batches));
    }
    return MlpParams{sizes, std::vector<double>(params.begin(), params.end())};
}

void validate_training_data(const TrainingData& data, const TrainConfig& cfg, Family family) {
    const std::size_t n = data.x.rows;
    if (n == 0 || data.x.cols == 0) throw ValidationError("training set must be nonempty");
    if (data.y.size() != n) throw ValidationError("label count does not match feature rows");
    for (int y : data.y) {
        if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    }
    if (!data.weights.empty()) {
        if (data.weights.size() != n) throw ValidationError("weight count does not match feature rows");
        for (double w : data.weights) {
            if (!std::isfinite(w) || w < 0.0) throw ValidationError("sample weights must be finite and >= 0");
        }
    }
    if (cfg.lambda > 0.0) {
        if (family != Family::NeuralNet) throw ValidationError("the EMS loss term only applies to the neural net");
        if (data.ej.size() != n || data.tau_plus.size() != n) {
            throw ValidationError("EMS training needs ej and tau_plus for every row");
        }
    }
    require_finite(data.x.data, "feature value");
}

json trace_json(const std::vector<double>& values) { return json(values); }

}  // namespace

Family parse_family(std::string_view name) {
    if (name == "lr" || name == "logistic_regression" || name == "LogisticRegression") return Family::LogisticRegression;
    if (name == "nb" || name == "naive_bayes" || name == "GaussianNaiveBayes") return Family::GaussianNaiveBayes;
    if (name == "rf" || name == "random_forest" || name == "RandomForest") return Family::RandomForest;
    if (name == "svm" || name == "linear_svm" || name == "LinearSVM") return Family::LinearSVM;
    if (name == "nn" || name == "dnn" || name == "neural_net" || name == "NeuralNet") return Family::NeuralNet;
    throw ValidationError("unknown model family '" + std::string(name) + "'");
}

std::string_view short_name(Family family) {
    switch (family) {
        case Family::LogisticRegression: return "lr";
        case Family::GaussianNaiveBayes: return "nb";
        case Family::RandomForest: return "rf";
        case Family::LinearSVM: return "svm";
        case Family::NeuralNet: return "nn";
    }
    return "?";
}

std::string_view display_name(Family family) {
    switch (family) {
        case Family::LogisticRegression: return "Logistic Regression";
        case Family::GaussianNaiveBayes: return "Naive Bayes";
        case Family::RandomForest: return "Random Forest";
        case Family::LinearSVM: return "Support Vector Machine";
        case Family::NeuralNet: return "Deep Neural Network";
    }
    return "?";
}

ModelSpec ModelSpec::defaults(Family family) {
    ModelSpec spec;
    spec.family = family;
    return spec;
}

void ModelSpec::validate() const {
    if (trees < 1 || trees > 10000) throw ValidationError("trees must be in [1, 10000]");
    if (max_depth < 1 || max_depth > 64) throw ValidationError("max_depth must be in [1, 64]");
    if (min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
    if (hidden_layers.empty()) throw ValidationError("hidden_layers must not be empty");
    for (int h : hidden_layers) {
        if (h < 1 || h > 4096) throw ValidationError("hidden layer widths must be in [1, 4096]");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
    if (!(variance_floor > 0.0)) throw ValidationError("variance_floor must be > 0");
}

TrainConfig TrainConfig::defaults(Family family) {
    TrainConfig cfg;
    switch (family) {
        case Family::LogisticRegression:
            cfg.epochs = 500;
            cfg.learning_rate = 0.5;
            cfg.batch_size = 0;
            cfg.l2 = 1e-4;
            break;
        case Family::LinearSVM:
            cfg.epochs = 20;
            cfg.learning_rate = 0.05;
            cfg.batch_size = 1;
            cfg.l2 = 1e-4;
            break;
        case Family::NeuralNet:
            cfg.epochs = 100;
            cfg.learning_rate = 0.01;
            cfg.batch_size = 32;
            cfg.l2 = 0.0;
            break;
        case Family::GaussianNaiveBayes:
        case Family::RandomForest:
            cfg.epochs = 1;
            cfg.learning_rate = 1.0;
            cfg.batch_size = 0;
            break;
    }
    return cfg;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
    if (batch_size < 0) throw ValidationError("batch_size must be >= 1, or 0 for full batch");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
    risk::validate_theta(theta);
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ValidationError("l2 must be >= 0");
}

FittedModel fit(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    validate_training_data(data, cfg, spec.family);

    FittedModel model;
    model.spec = spec;
    model.config = cfg;
    model.input_dim = data.x.cols;
    switch (spec.family) {
        case Family::LogisticRegression: model.params = fit_logistic(data, cfg, model.loss_trace); break;
        case Family::GaussianNaiveBayes: model.params = fit_naive_bayes(spec, data); break;
        case Family::RandomForest: model.params = detail::fit_forest(spec, data, cfg); break;
        case Family::LinearSVM: model.params = fit_svm(spec, data, cfg, model.loss_trace); break;
        case Family::NeuralNet: model.params = fit_network(spec, data, cfg, model.loss_trace); break;
    }
    return model;
}

FittedModel fit(const ModelSpec& spec, const data::AnnotatedDataset& train, Target target,
                std::span<const double> weights, const TrainConfig& cfg) {
    const auto& labels = target == Target::Original ? train.label : train.moral_label;
    return fit(spec, TrainingData{train.features, labels, weights, train.ej, train.tau_plus}, cfg);
}

std::vector<double> predict_proba(const FittedModel& model, const FeatureMatrix& rows) {
    if (rows.cols != model.input_dim) {
        throw ValidationError("feature arity " + std::to_string(rows.cols) + " does not match model input " +
                              std::to_string(model.input_dim));
    }
    std::vector<double> out(rows.rows);
    std::visit(
        [&](const auto& params) {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, MlpParams>) {
                const nn::Mlp net(params.layer_sizes, params.parameters);
                for (std::size_t i = 0; i < rows.rows; ++i) out[i] = net.predict(rows.row(i));
            } else {
                for (std::size_t i = 0; i < rows.rows; ++i) {
                    const auto x = rows.row(i);
                    if constexpr (std::is_same_v<P, LogisticParams>) {
                        out[i] = nn::sigmoid(dot(params.weights, x) + params.bias);
                    } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                        out[i] = naive_bayes_proba(params, x);
                    } else if constexpr (std::is_same_v<P, ForestParams>) {
                        out[i] = detail::forest_vote(params, x);
                    } else if constexpr (std::is_same_v<P, SvmParams>) {
                        const double margin = dot(params.weights, x) + params.bias;
                        out[i] = nn::sigmoid(params.platt_slope * margin + params.platt_intercept);
                    }
                }
            }
        },
        model.params);
    for (auto& p : out) p = std::clamp(p, 0.0, 1.0);
    return out;
}

std::vector<int> hard_labels(std::span<const double> probabilities) {
    std::vector<int> labels(probabilities.size());
    std::transform(probabilities.begin(), probabilities.end(), labels.begin(),
                   [](double p) { return p >= 0.5 ? 1 : 0; });
    return labels;
}

double bce_loss(std::span<const int> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw ValidationError("label and prediction lengths differ");
    if (y.empty()) throw ValidationError("bce_loss of an empty sample");
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
        const double p = std::clamp(y_hat[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        total -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return total / static_cast<double>(y.size());
}

double composite_loss(std::span<const int> y, std::span<const double> y_hat, std::span<const double> ej,
                      std::span<const double> tau_plus, double lambda, double theta) {
    const double bce = bce_loss(y, y_hat);
    if (ej.size() != y.size() || tau_plus.size() != y.size()) {
        throw ValidationError("composite loss inputs must have equal lengths");
    }
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    if (lambda == 0.0) return bce;
    std::vector<double> risks(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) risks[i] = risk::moral_risk(y_hat[i], ej[i], tau_plus[i]);
    return bce + lambda * risk::expected_moral_shortfall(risks, theta);
}

std::string save_model(const FittedModel& model) {
    json doc;
    doc["format"] = "ems-model";
    doc["version"] = kModelFormatVersion;
    doc["family"] = short_name(model.spec.family);
    doc["spec"] = {{"trees", model.spec.trees},
                   {"max_depth", model.spec.max_depth},
                   {"min_samples_split", model.spec.min_samples_split},
                   {"hidden_layers", model.spec.hidden_layers},
                   {"momentum", model.spec.momentum},
                   {"variance_floor", model.spec.variance_floor}};
    doc["train"] = {{"epochs", model.config.epochs},
                    {"learning_rate", model.config.learning_rate},
                    {"batch_size", model.config.batch_size},
                    {"seed", model.config.seed},
                    {"lambda", model.config.lambda},
                    {"theta", model.config.theta},
                    {"l2", model.config.l2}};
    doc["input_dim"] = model.input_dim;
    json& p = doc["parameters"];
    std::visit(
        [&](const auto& params) {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, LogisticParams>) {
                p = {{"weights", params.weights}, {"bias", params.bias}};
            } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                p = {{"log_prior", params.log_prior}, {"mean", params.mean}, {"variance", params.variance}};
            } else if constexpr (std::is_same_v<P, ForestParams>) {
                json trees = json::array();
                for (const auto& tree : params.trees) {
                    json nodes = json::array();
                    for (const auto& n : tree) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
                    trees.push_back(std::move(nodes));
                }
                p = {{"trees", std::move(trees)}};
            } else if constexpr (std::is_same_v<P, SvmParams>) {
                p = {{"weights", params.weights},
                     {"bias", params.bias},
                     {"platt_slope", params.platt_slope},
                     {"platt_intercept", params.platt_intercept}};
            } else {
                p = {{"layer_sizes", params.layer_sizes}, {"parameters", params.parameters}};
            }
        },
        model.params);
    doc["loss_trace"] = trace_json(model.loss_trace);
    return doc.dump(1) + "\n";
}

FittedModel load_model(std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "ems-model") throw ValidationError("not an ems-model document");
        if (doc.at("version").get<int>() != kModelFormatVersion) {
            throw ValidationError("unsupported model format version " + doc.at("version").dump());
        }
        FittedModel model;
        model.spec.family = parse_family(doc.at("family").get<std::string>());
        const json& spec = doc.at("spec");
        model.spec.trees = spec.at("trees");
        model.spec.max_depth = spec.at("max_depth");
        model.spec.min_samples_split = spec.at("min_samples_split");
        model.spec.hidden_layers = spec.at("hidden_layers").get<std::vector<int>>();
        model.spec.momentum = spec.at("momentum");
        model.spec.variance_floor = spec.at("variance_floor");
        const json& train = doc.at("train");
        model.config.epochs = train.at("epochs");
        model.config.learning_rate = train.at("learning_rate");
        model.config.batch_size = train.at("batch_size");
        model.config.seed = train.at("seed").get<std::uint64_t>();
        model.config.lambda = train.at("lambda");
        model.config.theta = train.at("theta");
        model.config.l2 = train.at("l2");
        model.input_dim = doc.at("input_dim");
        model.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
        const json& p = doc.at("parameters");
        switch (model.spec.family) {
            case Family::LogisticRegression:
                model.params = LogisticParams{p.at("weights").get<std::vector<double>>(), p.at("bias")};
                break;
            case Family::GaussianNaiveBayes: {
                NaiveBayesParams nb;
                nb.log_prior = p.at("log_prior").get<std::array<double, 2>>();
                nb.mean = p.at("mean").get<std::array<std::vector<double>, 2>>();
                nb.variance = p.at("variance").get<std::array<std::vector<double>, 2>>();
                model.params = std::move(nb);
                break;
            }
            case Family::RandomForest: {
                ForestParams forest;
                for (const auto& tree : p.at("trees")) {
                    std::vector<TreeNode> nodes;
                    for (const auto& n : tree) nodes.push_back({n.at(0), n.at(1), n.at(2), n.at(3), n.at(4)});
                    forest.trees.push_back(std::move(nodes));
                }
                model.params = std::move(forest);
                break;
            }
            case Family::LinearSVM:
                model.params = SvmParams{p.at("weights").get<std::vector<double>>(), p.at("bias"), p.at("platt_slope"),
                                         p.at("platt_intercept")};
                break;
            case Family::NeuralNet:
                model.params = MlpParams{p.at("layer_sizes").get<std::vector<int>>(),
                                         p.at("parameters").get<std::vector<double>>()};
                break;
        }
        return model;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace ems::models
