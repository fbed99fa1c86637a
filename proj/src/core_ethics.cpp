#include "ems/core_ethics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ems/error.hpp"

namespace ems::ethics {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

void require_unit(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
        throw ValidationError(std::string(name) + " must be finite and in [0,1], got " +
                              std::to_string(value));
    }
}

void require_sign(int value, const char* name) {
    if (value != -1 && value != 1) {
        throw ValidationError(std::string("sign ") + name + " must be -1 or +1");
    }
}

TermArray unsigned_terms(const NormativeWeights& w, const ContextVector& ec) {
    return {w.alpha * ec.severity, w.alpha * ec.utility, w.alpha * ec.duration,
            w.beta * ec.intention, w.gamma * ec.upheld,  w.gamma * ec.violated};
}

}  // namespace

void NormativeWeights::validate() const {
    require_unit(alpha, "alpha");
    require_unit(beta, "beta");
    require_unit(gamma, "gamma");
    const double sum = alpha + beta + gamma;
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        throw ValidationError("alpha + beta + gamma must equal 1, got " + std::to_string(sum));
    }
}

NormativeWeights NormativeWeights::make(double alpha, double beta, double gamma) {
    NormativeWeights w{alpha, beta, gamma};
    w.validate();
    return w;
}

NormativeWeights NormativeWeights::preset(std::string_view name) {
    if (name == "consequentialist") return {0.8, 0.1, 0.1};
    if (name == "principlism") return {0.3, 0.6, 0.1};
    if (name == "uniform") return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    throw ValidationError("unknown philosophy preset '" + std::string(name) + "'");
}

void ContextVector::validate() const {
    require_unit(severity, "c_severity");
    require_unit(utility, "c_utility");
    require_unit(duration, "c_duration");
    require_unit(intention, "intention");
    require_unit(upheld, "pr_upheld");
    require_unit(violated, "pr_violated");
}

void SignProfile::validate() const {
    require_sign(severity, "severity");
    require_sign(utility, "utility");
    require_sign(duration, "duration");
    require_sign(intention, "intention");
    require_sign(upheld, "upheld");
    require_sign(violated, "violated");
}

std::string_view to_string(MoralVerdict verdict) {
    switch (verdict) {
        case MoralVerdict::MorallyRight: return "morally_right";
        case MoralVerdict::MorallyGrey: return "morally_grey";
        case MoralVerdict::MorallyWrong: return "morally_wrong";
    }
    return "unknown";
}

TermArray weighted_terms(const NormativeWeights& w, const ContextVector& ec, const SignProfile& g) {
    w.validate();
    ec.validate();
    g.validate();
    TermArray terms = unsigned_terms(w, ec);
    const auto signs = g.signs();
    for (std::size_t i = 0; i < kContextTerms; ++i) terms[i] *= signs[i];
    return terms;
}

double ethical_judgment(const NormativeWeights& w, const ContextVector& ec, const SignProfile& g) {
    const TermArray terms = weighted_terms(w, ec, g);
    return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double sample_stddev(const TermArray& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

ThresholdPair context_threshold(const NormativeWeights& w, const ContextVector& ec, double tau_default) {
    if (!std::isfinite(tau_default) || tau_default < 0.0) {
        throw ValidationError("tau_default must be finite and >= 0");
    }
    w.validate();
    ec.validate();
    return {tau_default, sample_stddev(unsigned_terms(w, ec))};
}

MoralVerdict moral_verdict(double ej, const ThresholdPair& thresholds) {
    if (!std::isfinite(ej)) throw ValidationError("ethical judgment must be finite");
    if (ej > thresholds.tau_plus()) return MoralVerdict::MorallyRight;
    if (ej < thresholds.tau_minus()) return MoralVerdict::MorallyWrong;
    return MoralVerdict::MorallyGrey;
}

int moral_label(double ej, const ThresholdPair& thresholds) {
    if (!std::isfinite(ej)) throw ValidationError("ethical judgment must be finite");
    return ej >= thresholds.tau_plus() ? 1 : 0;
}

}  // namespace ems::ethics
