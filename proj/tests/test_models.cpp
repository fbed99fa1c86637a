#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "checks.hpp"
#include "ems/dataset.hpp"
#include "ems/error.hpp"
#include "ems/models.hpp"
#include "ems/risk.hpp"
#include "ems/synthetic.hpp"

using namespace ems;
using namespace ems::models;

namespace {

struct Toy {
    FeatureMatrix x;
    std::vector<int> y;
    std::vector<double> ej, tau;
};

// Two Gaussian blobs in the plane; `gap` pushes the class means apart.
Toy blobs(std::size_t n, double gap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Toy t{FeatureMatrix(n, 2), std::vector<int>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        t.y[i] = label;
        t.x.at(i, 0) = (label ? gap : -gap) + noise(rng);
        t.x.at(i, 1) = (label ? gap : -gap) + noise(rng);
        t.ej[i] = unit(rng) - 0.5;
        t.tau[i] = 0.1;
    }
    return t;
}

TrainConfig quick(Family family) {
    auto cfg = TrainConfig::defaults(family);
    if (family == Family::NeuralNet) cfg.epochs = 20;
    cfg.seed = 11;
    return cfg;
}

ModelSpec small_spec(Family family) {
    auto spec = ModelSpec::defaults(family);
    spec.trees = 15;
    return spec;
}

const data::AnnotatedDataset& admissions() {
    static const auto d = data::annotate(data::parse_csv(synthetic::admissions_csv(7), data::Schema::Admissions),
                                         data::MappingConfig{});
    return d;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("bce examples") {
    CHECK(bce_loss(std::vector<int>{1}, std::vector<double>{0.5}) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(bce_loss(std::vector<int>{1, 0}, std::vector<double>{1.0, 0.0}) <= 1e-6);
    CHECK(bce_loss(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(std::isfinite(bce_loss(std::vector<int>{1}, std::vector<double>{0.0})));
    CHECK_THROWS_AS(bce_loss(std::vector<int>{1, 0}, std::vector<double>{0.5}), ValidationError);
}

TEST_CASE("composite loss examples") {
    const std::vector<int> y{1, 0, 1};
    const std::vector<double> p{0.7, 0.2, 0.4}, ej{0.3, -0.1, 0.05}, tau{0.1, 0.1, 0.1};
    CHECK(composite_loss(y, p, ej, tau, 0.0, 0.5) == bce_loss(y, p));
    // Every prediction agrees with its moral side, so every risk is zero.
    const std::vector<double> aligned_p{1.0, 0.0, 1.0}, aligned_ej{0.1, 0.1, 0.1};
    CHECK(composite_loss(y, aligned_p, aligned_ej, tau, 3.0, 0.5) == doctest::Approx(bce_loss(y, aligned_p)));
    CHECK(composite_loss(std::vector<int>{1}, std::vector<double>{0.5}, std::vector<double>{-0.1},
                         std::vector<double>{0.1}, 1.0, 1.0) == doctest::Approx(0.793147).epsilon(1e-6));
    CHECK_THROWS_AS(composite_loss(y, p, ej, tau, 1.0, 0.0), ValidationError);
}

TEST_CASE("logistic regression separates a separable toy set") {
    const auto t = blobs(20, 1.5, 3);
    const auto m = fit(ModelSpec::defaults(Family::LogisticRegression), TrainingData{t.x, t.y}, quick(Family::LogisticRegression));
    CHECK(hard_labels(predict_proba(m, t.x)) == t.y);
    CHECK(m.loss_trace.size() == 500);
    CHECK(m.loss_trace.back() < m.loss_trace.front());
}

TEST_CASE("every family is deterministic and learns the blobs") {
    const auto t = blobs(120, 1.0, 4);
    for (auto family : kAllFamilies) {
        CAPTURE(short_name(family));
        const auto spec = small_spec(family);
        const auto a = fit(spec, TrainingData{t.x, t.y}, quick(family));
        const auto b = fit(spec, TrainingData{t.x, t.y}, quick(family));
        const auto pa = predict_proba(a, t.x);
        CHECK(pa == predict_proba(b, t.x));
        CHECK(save_model(a) == save_model(b));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            CHECK(pa[i] >= 0.0);
            CHECK(pa[i] <= 1.0);
            correct += (pa[i] >= 0.5) == (t.y[i] == 1);
        }
        CHECK(correct >= 110);
        FeatureMatrix wrong(2, 3);
        CHECK_THROWS_AS(predict_proba(a, wrong), ValidationError);
    }
}

TEST_CASE("neural net with lambda zero follows the plain trajectory") {
    const auto t = blobs(64, 0.5, 5);
    auto cfg = quick(Family::NeuralNet);
    const auto plain = fit(ModelSpec::defaults(Family::NeuralNet), TrainingData{t.x, t.y}, cfg);
    cfg.theta = 0.05;  // unused when lambda is zero
    const auto zero = fit(ModelSpec::defaults(Family::NeuralNet), TrainingData{t.x, t.y, {}, t.ej, t.tau}, cfg);
    CHECK(std::get<MlpParams>(plain.params).parameters == std::get<MlpParams>(zero.params).parameters);
    CHECK(plain.loss_trace == zero.loss_trace);
}

TEST_CASE("trivial predictions") {
    // Naive Bayes on mirror-image classes predicts 0.5 at the midpoint.
    FeatureMatrix x(4, 1);
    x.data = {-2, -1, 1, 2};
    const std::vector<int> y{0, 0, 1, 1};
    const auto nb = fit(ModelSpec::defaults(Family::GaussianNaiveBayes), TrainingData{x, y},
                        TrainConfig::defaults(Family::GaussianNaiveBayes));
    FeatureMatrix mid(1, 1);
    CHECK(predict_proba(nb, mid)[0] == doctest::Approx(0.5).epsilon(1e-12));

    // A forest trained on a feature that decides the label votes unanimously.
    const auto t = blobs(60, 3.0, 6);
    const auto rf = fit(small_spec(Family::RandomForest), TrainingData{t.x, t.y}, quick(Family::RandomForest));
    for (double p : predict_proba(rf, t.x)) CHECK((p == 0.0 || p == 1.0));

    FittedModel zero;
    zero.spec = ModelSpec::defaults(Family::LogisticRegression);
    zero.input_dim = 2;
    zero.params = LogisticParams{{0.0, 0.0}, 0.0};
    for (double p : predict_proba(zero, t.x)) CHECK(p == 0.5);

    CHECK(hard_labels(std::vector<double>{0.5, 0.4999, 1.0, 0.0}) == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("training errors") {
    const auto t = blobs(10, 1.0, 7);
    const std::vector<int> ones(10, 1);
    CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::GaussianNaiveBayes), TrainingData{t.x, ones},
                        TrainConfig::defaults(Family::GaussianNaiveBayes)),
                    TrainingError);
    CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::LinearSVM), TrainingData{t.x, ones},
                        TrainConfig::defaults(Family::LinearSVM)),
                    TrainingError);
    const std::vector<double> negative(10, -1.0);
    CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::LogisticRegression), TrainingData{t.x, t.y, negative},
                        TrainConfig::defaults(Family::LogisticRegression)),
                    ValidationError);
    auto ems_cfg = TrainConfig::defaults(Family::LogisticRegression);
    ems_cfg.lambda = 1.0;
    CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::LogisticRegression), TrainingData{t.x, t.y, {}, t.ej, t.tau}, ems_cfg),
                    ValidationError);
    auto blowup = TrainConfig::defaults(Family::NeuralNet);
    blowup.learning_rate = 1e200;
    blowup.epochs = 50;
    CHECK_THROWS_AS(fit(ModelSpec::defaults(Family::NeuralNet), TrainingData{t.x, t.y}, blowup), TrainingError);
}

TEST_CASE("property: composite loss gradient matches central differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (double theta : {0.25, 0.5, 1.0}) {
            const auto r = checks::gradient_check(seed, 1.0, theta);
            CAPTURE(seed);
            CAPTURE(theta);
            REQUIRE(r.tie_free);
            CHECK(r.parameters == 7 * 32 + 32 + 32 * 16 + 16 + 16 + 1);
            CHECK(r.max_relative_error <= 1e-4);
        }
    }
}

TEST_CASE("property: training moral risk does not grow with lambda") {
    const auto& d = admissions();
    const std::vector<double> lambdas{0.0, 0.5, 1.0, 5.0};
    constexpr int seeds = 10;
    for (double theta : {0.05, 1.0}) {
        std::vector<double> mean_risk(lambdas.size(), 0.0);
        for (int s = 0; s < seeds; ++s) {
            for (std::size_t k = 0; k < lambdas.size(); ++k) {
                auto cfg = TrainConfig::defaults(Family::NeuralNet);
                cfg.epochs = 30;
                cfg.seed = static_cast<std::uint64_t>(100 + s);
                cfg.lambda = lambdas[k];
                cfg.theta = theta;
                const auto m = fit(ModelSpec::defaults(Family::NeuralNet), d, Target::Original, {}, cfg);
                const auto p = predict_proba(m, d.features);
                double total = 0;
                for (std::size_t i = 0; i < p.size(); ++i) total += risk::moral_risk(p[i], d.ej[i], d.tau_plus[i]);
                mean_risk[k] += total / static_cast<double>(p.size()) / seeds;
            }
        }
        for (std::size_t k = 1; k < lambdas.size(); ++k) {
            CAPTURE(theta);
            CAPTURE(lambdas[k]);
            CHECK(mean_risk[k] <= mean_risk[k - 1]);
        }
    }
}

TEST_CASE("property: a duplicated row equals a doubled weight") {
    const auto t = blobs(30, 0.6, 8);
    FeatureMatrix dup(31, 2);
    std::copy(t.x.data.begin(), t.x.data.end(), dup.data.begin());
    dup.at(30, 0) = t.x.at(4, 0);
    dup.at(30, 1) = t.x.at(4, 1);
    auto dup_y = t.y;
    dup_y.push_back(t.y[4]);
    std::vector<double> doubled(30, 1.0);
    doubled[4] = 2.0;

    auto flat = [](const FittedModel& m) {
        return std::visit(
            [](const auto& p) -> std::vector<double> {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, LogisticParams>) {
                    auto v = p.weights;
                    v.push_back(p.bias);
                    return v;
                } else if constexpr (std::is_same_v<P, NaiveBayesParams>) {
                    std::vector<double> v{p.log_prior[0], p.log_prior[1]};
                    for (int c = 0; c < 2; ++c) {
                        v.insert(v.end(), p.mean[c].begin(), p.mean[c].end());
                        v.insert(v.end(), p.variance[c].begin(), p.variance[c].end());
                    }
                    return v;
                } else if constexpr (std::is_same_v<P, MlpParams>) {
                    return p.parameters;
                } else {
                    return {};
                }
            },
            m.params);
    };
    for (auto family : {Family::LogisticRegression, Family::GaussianNaiveBayes, Family::NeuralNet}) {
        CAPTURE(short_name(family));
        auto cfg = quick(family);
        cfg.batch_size = 0;
        const auto spec = ModelSpec::defaults(family);
        const auto a = flat(fit(spec, TrainingData{dup, dup_y}, cfg));
        const auto b = flat(fit(spec, TrainingData{t.x, t.y, doubled}, cfg));
        REQUIRE(a.size() == b.size());
        REQUIRE(!a.empty());
        double worst = 0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("save and load round-trip exactly") {
    const auto t = blobs(50, 0.8, 9);
    for (auto family : kAllFamilies) {
        CAPTURE(short_name(family));
        const auto m = fit(small_spec(family), TrainingData{t.x, t.y}, quick(family));
        const auto text = save_model(m);
        const auto back = load_model(text);
        CHECK(save_model(back) == text);
        CHECK(predict_proba(back, t.x) == predict_proba(m, t.x));
        CHECK(back.loss_trace == m.loss_trace);
    }
    CHECK_THROWS_AS(load_model("{not json"), ValidationError);
    CHECK_THROWS_AS(load_model(R"({"format":"something-else","version":1})"), ValidationError);
    CHECK_THROWS_AS(load_model(R"({"format":"ems-model","version":99})"), ValidationError);
}

TEST_CASE("family names and config validation") {
    for (auto family : kAllFamilies) CHECK(parse_family(short_name(family)) == family);
    CHECK(parse_family("dnn") == Family::NeuralNet);
    CHECK(display_name(Family::NeuralNet) == "Deep Neural Network");
    CHECK_THROWS_AS(parse_family("xgboost"), ValidationError);
    auto cfg = TrainConfig::defaults(Family::NeuralNet);
    cfg.theta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = TrainConfig::defaults(Family::NeuralNet);
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    auto spec = ModelSpec::defaults(Family::RandomForest);
    spec.trees = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

}  // TEST_SUITE
