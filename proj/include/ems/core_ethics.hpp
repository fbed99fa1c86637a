#pragma once

// Normative-ethics calculus for a single action: a philosophy weighting over
// consequentialism / deontology / virtue ethics, a six-term context vector,
// the signed weighted-sum judgment, and the context-sensitive grey zone.

#include <array>
#include <cstddef>
#include <string_view>

namespace ems::ethics {

inline constexpr std::size_t kContextTerms = 6;
using TermArray = std::array<double, kContextTerms>;

struct NormativeWeights {
    double alpha = 1.0 / 3.0;  // consequentialism
    double beta = 1.0 / 3.0;   // deontology
    double gamma = 1.0 / 3.0;  // virtue ethics

    // Throws ValidationError unless each component is in [0,1] and they sum to 1 (tol 1e-9).
    void validate() const;

    static NormativeWeights make(double alpha, double beta, double gamma);
    // "consequentialist" (0.8,0.1,0.1), "principlism" (0.3,0.6,0.1), "uniform".
    static NormativeWeights preset(std::string_view name);
};

// Term order is fixed throughout the library:
// severity, utility, duration, intention, upheld, violated.
struct ContextVector {
    double severity = 0.0;
    double utility = 0.0;
    double duration = 0.0;
    double intention = 0.0;
    double upheld = 0.0;
    double violated = 0.0;

    TermArray terms() const { return {severity, utility, duration, intention, upheld, violated}; }
    // All six terms finite and in [0,1].
    void validate() const;
    bool operator==(const ContextVector&) const = default;
};

struct SignProfile {
    int severity = -1;
    int utility = +1;
    int duration = -1;
    int intention = +1;
    int upheld = +1;
    int violated = -1;

    std::array<int, kContextTerms> signs() const {
        return {severity, utility, duration, intention, upheld, violated};
    }
    void validate() const;
};

struct ThresholdPair {
    double tau_default = 0.0;
    double tau_adjust = 0.0;

    double tau_plus() const { return tau_default + tau_adjust; }
    double tau_minus() const { return -tau_plus(); }
};

enum class MoralVerdict { MorallyRight, MorallyGrey, MorallyWrong };

std::string_view to_string(MoralVerdict verdict);

// Per-term products g_i * w_i * ec_i in the fixed term order. Consequence terms
// take alpha, intention takes beta, the principle terms take gamma.
TermArray weighted_terms(const NormativeWeights& w, const ContextVector& ec, const SignProfile& g);

double ethical_judgment(const NormativeWeights& w, const ContextVector& ec, const SignProfile& g);

// tau_adjust is the sample standard deviation (n - 1 denominator) of the six
// unsigned products w_i * ec_i of this one action.
ThresholdPair context_threshold(const NormativeWeights& w, const ContextVector& ec, double tau_default);

// Right above tau_plus, Wrong below tau_minus, Grey on and between the boundaries.
MoralVerdict moral_verdict(double ej, const ThresholdPair& thresholds);

// 1 iff ej >= tau_plus; the grey zone collapses to 0.
int moral_label(double ej, const ThresholdPair& thresholds);

double sample_stddev(const TermArray& values);

}  // namespace ems::ethics
