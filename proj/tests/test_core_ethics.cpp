#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ems/core_ethics.hpp"
#include "ems/error.hpp"
#include "oracles.hpp"

using namespace ems;
using namespace ems::ethics;

namespace {

ContextVector random_context(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

NormativeWeights random_weights(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = u(rng), b = u(rng) * (1.0 - a);
    return NormativeWeights::make(a, b, 1.0 - a - b);
}

void check_terms(const TermArray& got, const TermArray& want) {
    for (std::size_t i = 0; i < kContextTerms; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("core_ethics") {

TEST_CASE("weighted terms follow the fixed order and weight groups") {
    const SignProfile g;
    check_terms(weighted_terms({1, 0, 0}, {0.5, 0.8, 0.2, 0, 0, 0}, g), {-0.5, 0.8, -0.2, 0, 0, 0});
    check_terms(weighted_terms({0, 0, 1}, {0, 0, 0, 0, 0.6, 0.1}, g), {0, 0, 0, 0, 0.6, -0.1});
    check_terms(weighted_terms(NormativeWeights::preset("uniform"), {}, g), {0, 0, 0, 0, 0, 0});
    check_terms(weighted_terms({0.5, 0.25, 0.25}, {0.2, 0.6, 0.4, 0.8, 0.8, 0.8}, g),
                {-0.1, 0.3, -0.2, 0.2, 0.2, -0.2});
}

TEST_CASE("ethical judgment sums the signed terms") {
    const SignProfile g;
    CHECK(ethical_judgment({1, 0, 0}, {0.5, 0.8, 0.2, 0, 0, 0}, g) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(ethical_judgment({0, 0, 1}, {0, 0, 0, 0, 0.6, 0.1}, g) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ethical_judgment(NormativeWeights::preset("uniform"), {}, g) == 0.0);
    CHECK(ethical_judgment({0.3, 0.6, 0.1}, {0.7, 0.35, 0.4, 0.9, 0.55, 0.0}, g) ==
          doctest::Approx(0.37000000000000005).epsilon(1e-12));
}

TEST_CASE("context threshold uses the sample deviation of unsigned terms") {
    const auto t = context_threshold({0.5, 0.25, 0.25}, {0.2, 0.6, 0.4, 0.8, 0.8, 0.8}, 0.05);
    CHECK(t.tau_adjust == doctest::Approx(0.06324555320336758).epsilon(1e-12));
    CHECK(t.tau_plus() == doctest::Approx(0.11324555320336759).epsilon(1e-12));
    CHECK(t.tau_minus() == -t.tau_plus());

    const auto flat = context_threshold(NormativeWeights::preset("uniform"), {0.3, 0.3, 0.3, 0.3, 0.3, 0.3}, 0.07);
    CHECK(flat.tau_adjust == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(flat.tau_plus() == doctest::Approx(0.07));

    const auto zero = context_threshold(NormativeWeights::preset("uniform"), {}, 0.0);
    CHECK(zero.tau_plus() == 0.0);
    CHECK(zero.tau_minus() == 0.0);

    const auto p = context_threshold({0.3, 0.6, 0.1}, {0.7, 0.35, 0.4, 0.9, 0.55, 0.0}, 0.05);
    CHECK(p.tau_plus() == doctest::Approx(0.2435630818794397).epsilon(1e-12));
    CHECK_THROWS_AS(context_threshold({0.3, 0.6, 0.1}, {}, -0.1), ValidationError);
}

TEST_CASE("verdicts and labels") {
    const ThresholdPair t{0.1, 0.0};
    CHECK(moral_verdict(0.5, t) == MoralVerdict::MorallyRight);
    CHECK(moral_verdict(-0.5, t) == MoralVerdict::MorallyWrong);
    CHECK(moral_verdict(0.05, t) == MoralVerdict::MorallyGrey);
    CHECK(moral_verdict(0.1, t) == MoralVerdict::MorallyGrey);
    CHECK(moral_verdict(-0.1, t) == MoralVerdict::MorallyGrey);
    CHECK(moral_label(0.5, t) == 1);
    CHECK(moral_label(0.05, t) == 0);
    CHECK(moral_label(0.1, t) == 1);
    CHECK(moral_label(-0.5, t) == 0);
    CHECK(to_string(MoralVerdict::MorallyGrey) == "morally_grey");
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(NormativeWeights::make(0.5, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(NormativeWeights::make(1.2, -0.1, -0.1), ValidationError);
    CHECK_NOTHROW(NormativeWeights::make(0.8, 0.1, 0.1));
    CHECK_THROWS_AS(NormativeWeights::preset("stoic"), ValidationError);
    const auto c = NormativeWeights::preset("consequentialist");
    CHECK(c.alpha == 0.8);
    CHECK(c.beta == 0.1);
    const auto p = NormativeWeights::preset("principlism");
    CHECK(p.beta == 0.6);
    CHECK_THROWS_AS(ethical_judgment(p, {1.5, 0, 0, 0, 0, 0}, {}), ValidationError);
    CHECK_THROWS_AS(ethical_judgment(p, {NAN, 0, 0, 0, 0, 0}, {}), ValidationError);
    SignProfile bad;
    bad.utility = 0;
    CHECK_THROWS_AS(ethical_judgment(p, {}, bad), ValidationError);
    CHECK_THROWS_AS(moral_label(NAN, {}), ValidationError);
}

TEST_CASE("property: judgment matches the direct formula and is bounded") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto w = random_weights(rng);
        const auto ec = random_context(rng);
        const double ej = ethical_judgment(w, ec, {});
        CHECK(ej == doctest::Approx(oracle::judgment(w, ec, {})).epsilon(1e-12));
        CHECK(std::abs(ej) <= 3.0 * w.alpha + w.beta + 2.0 * w.gamma + 1e-12);
        const auto t = context_threshold(w, ec, 0.05);
        CHECK(t.tau_adjust == doctest::Approx(oracle::threshold_adjust(w, ec)).epsilon(1e-12));
    }
}

TEST_CASE("property: linearity in the context vector") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto w = random_weights(rng);
        const auto a = random_context(rng);
        const auto b = random_context(rng);
        const double s = u(rng);
        const ContextVector mix{s * a.severity + (1 - s) * b.severity, s * a.utility + (1 - s) * b.utility,
                                s * a.duration + (1 - s) * b.duration, s * a.intention + (1 - s) * b.intention,
                                s * a.upheld + (1 - s) * b.upheld,     s * a.violated + (1 - s) * b.violated};
        CHECK(ethical_judgment(w, mix, {}) ==
              doctest::Approx(s * ethical_judgment(w, a, {}) + (1 - s) * ethical_judgment(w, b, {})).epsilon(1e-12));
    }
}

TEST_CASE("property: flipping every sign negates the judgment exactly") {
    std::mt19937_64 rng(13);
    const SignProfile g;
    const SignProfile flipped{-g.severity, -g.utility, -g.duration, -g.intention, -g.upheld, -g.violated};
    for (int trial = 0; trial < 200; ++trial) {
        const auto w = random_weights(rng);
        const auto ec = random_context(rng);
        CHECK(ethical_judgment(w, ec, flipped) == -ethical_judgment(w, ec, g));
    }
}

TEST_CASE("property: threshold is invariant under permutation of the terms") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        TermArray values;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& v : values) v = u(rng);
        const double base = sample_stddev(values);
        for (int k = 0; k < 10; ++k) {
            std::shuffle(values.begin(), values.end(), rng);
            CHECK(sample_stddev(values) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: right verdict implies label 1, wrong and grey imply 0 off the boundary") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const ThresholdPair t{std::abs(u(rng)) * 0.3, std::abs(u(rng)) * 0.2};
        const double ej = u(rng);
        if (ej == t.tau_plus()) continue;  // boundary convention tested separately
        const auto v = moral_verdict(ej, t);
        CHECK(moral_label(ej, t) == (v == MoralVerdict::MorallyRight ? 1 : 0));
    }
}

}  // TEST_SUITE
