#include "ems/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ems/error.hpp"

namespace ems::risk {

namespace {

void validate_sample(std::span<const double> x) {
    if (x.empty()) throw ValidationError("sample must contain at least one value");
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("sample values must be finite");
    }
}

// theta * n with products that land within rounding of an integer snapped onto it,
// so theta = 0.05, n = 20 means exactly one tail element.
double tail_count(double theta, std::size_t n) {
    const double k = theta * static_cast<double>(n);
    const double nearest = std::round(k);
    return std::abs(k - nearest) <= 1e-9 * std::max(1.0, k) ? nearest : k;
}

std::vector<double> sorted_copy(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    return s;
}

// Index of the (1 - theta) order statistic in ascending order: n - floor(theta n) - 1, clamped at 0.
std::size_t t_star_index(double theta, std::size_t n) {
    const auto tail = static_cast<std::size_t>(std::floor(tail_count(theta, n)));
    return tail >= n ? 0 : n - tail - 1;
}

}  // namespace

void validate_theta(double theta) {
    if (!std::isfinite(theta) || theta <= 0.0 || theta > 1.0) {
        throw ValidationError("theta must be in (0, 1], got " + std::to_string(theta));
    }
}

double lower_quantile(std::span<const double> x, double theta) {
    validate_sample(x);
    validate_theta(theta);
    const auto s = sorted_copy(x);
    const auto rank = static_cast<std::size_t>(std::ceil(tail_count(theta, s.size())));
    return s[std::clamp<std::size_t>(rank, 1, s.size()) - 1];
}

double expected_shortfall(std::span<const double> x, double theta) {
    const double x_theta = lower_quantile(x, theta);
    const double n = static_cast<double>(x.size());
    double tail_sum = 0.0;
    std::size_t tail_n = 0;
    for (double v : x) {
        if (v <= x_theta) {
            tail_sum += v;
            ++tail_n;
        }
    }
    const double tail_mean = tail_sum / n;
    const double p_tail = static_cast<double>(tail_n) / n;
    return -(tail_mean + x_theta * (theta - p_tail)) / theta;
}

double ru_functional(std::span<const double> losses, double theta, double t) {
    validate_sample(losses);
    validate_theta(theta);
    if (!std::isfinite(t)) throw ValidationError("t must be finite");
    double excess = 0.0;
    for (double v : losses) excess += std::max(v - t, 0.0);
    return t + excess / (theta * static_cast<double>(losses.size()));
}

CvarResult cvar(std::span<const double> losses, double theta) {
    validate_sample(losses);
    validate_theta(theta);
    const auto s = sorted_copy(losses);
    const double t_star = s[t_star_index(theta, s.size())];
    return {ru_functional(losses, theta, t_star), t_star};
}

std::vector<double> cvar_gradient(std::span<const double> losses, double theta) {
    const CvarResult result = cvar(losses, theta);
    const double scale = 1.0 / (theta * static_cast<double>(losses.size()));
    std::vector<double> grad(losses.size(), 0.0);
    std::size_t above = 0;
    std::size_t on_boundary = 0;
    std::size_t boundary_index = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses[i] > result.t_star) {
            grad[i] = scale;
            ++above;
        } else if (losses[i] == result.t_star) {
            ++on_boundary;
            boundary_index = i;
        }
    }
    if (on_boundary == 1) {
        grad[boundary_index] = std::max(0.0, 1.0 - static_cast<double>(above) * scale);
    }
    return grad;
}

double moral_risk(double y_hat, double ej, double tau_plus) {
    if (!std::isfinite(y_hat) || y_hat < 0.0 || y_hat > 1.0) {
        throw ValidationError("prediction must be a probability in [0,1]");
    }
    if (!std::isfinite(ej) || !std::isfinite(tau_plus)) {
        throw ValidationError("ethical judgment and threshold must be finite");
    }
    return y_hat * std::max(tau_plus - ej, 0.0) + (1.0 - y_hat) * std::max(ej - tau_plus, 0.0);
}

double expected_moral_shortfall(std::span<const double> risks, double theta) {
    for (double r : risks) {
        if (r < 0.0) throw ValidationError("moral risks must be nonnegative");
    }
    return cvar(risks, theta).value;
}

}  // namespace ems::risk
