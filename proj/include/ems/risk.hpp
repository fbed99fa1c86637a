#pragma once

// Empirical tail-risk measures. `theta` is always the tail FRACTION in (0, 1]:
// theta = 0.05 looks at the worst 5% of cases, theta = 1 at all of them.

#include <span>
#include <vector>

namespace ems::risk {

// Throws ValidationError unless 0 < theta <= 1.
void validate_theta(double theta);

// ceil(theta * n)-th smallest value (type-1 order statistic, no interpolation).
double lower_quantile(std::span<const double> x, double theta);

// Expected Shortfall of the lower tail of x, returned as a positive loss:
// -(1/theta) * (E[X 1{X <= x_theta}] + x_theta * (theta - P[X <= x_theta])).
double expected_shortfall(std::span<const double> x, double theta);

// Rockafellar-Uryasev objective t + (1/theta) * mean(max(loss_i - t, 0)).
double ru_functional(std::span<const double> losses, double theta, double t);

struct CvarResult {
    double value = 0.0;   // min over t of ru_functional
    double t_star = 0.0;  // smallest minimizer, the (1-theta) order statistic
};

// Upper-tail conditional value-at-risk, solved exactly by sorting.
CvarResult cvar(std::span<const double> losses, double theta);

// d cvar / d loss_i. Losses strictly above t_star get 1/(theta n); a single
// loss sitting exactly on t_star receives the leftover boundary mass; tied
// boundary losses receive zero.
std::vector<double> cvar_gradient(std::span<const double> losses, double theta);

// Moral risk of predicting approval probability y_hat for an action whose
// judgment is ej against threshold tau_plus:
// y_hat * max(tau_plus - ej, 0) + (1 - y_hat) * max(ej - tau_plus, 0).
double moral_risk(double y_hat, double ej, double tau_plus);

// d moral_risk / d y_hat (= tau_plus - ej).
inline double moral_risk_slope(double ej, double tau_plus) { return tau_plus - ej; }

// CVaR of nonnegative per-sample moral risks.
double expected_moral_shortfall(std::span<const double> risks, double theta);

}  // namespace ems::risk
