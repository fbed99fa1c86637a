#include "ems/neural_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ems/error.hpp"
#include "ems/models.hpp"
#include "ems/risk.hpp"

namespace ems::models::nn {

namespace {

std::vector<std::size_t> layer_offsets(const std::vector<int>& sizes) {
    if (sizes.size() < 2 || sizes.back() != 1) {
        throw ValidationError("network needs an input layer and a single output unit");
    }
    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        if (sizes[l] <= 0 || sizes[l + 1] <= 0) throw ValidationError("layer sizes must be positive");
        offsets.push_back(offset);
        offset += static_cast<std::size_t>(sizes[l + 1]) * static_cast<std::size_t>(sizes[l] + 1);
    }
    offsets.push_back(offset);  // total parameter count
    return offsets;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)), offsets_(layer_offsets(sizes_)) {
    params_.assign(offsets_.back(), 0.0);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l]));
        std::uniform_real_distribution<double> init(-limit, limit);
        const std::size_t count = static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l]);
        for (std::size_t k = 0; k < count; ++k) params_[offsets_[l] + k] = init(rng);
    }
}

Mlp::Mlp(std::vector<int> layer_sizes, std::vector<double> parameters)
    : sizes_(std::move(layer_sizes)), params_(std::move(parameters)), offsets_(layer_offsets(sizes_)) {
    if (params_.size() != offsets_.back()) {
        throw ValidationError("parameter vector does not match layer sizes");
    }
}

std::size_t Mlp::bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * static_cast<std::size_t>(sizes_[layer]);
}

double Mlp::logit(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(sizes_.front())) throw ValidationError("input arity mismatch");
    std::vector<double> current(x.begin(), x.end());
    std::vector<double> next;
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in = static_cast<std::size_t>(sizes_[l]);
        const auto out = static_cast<std::size_t>(sizes_[l + 1]);
        const double* w = params_.data() + offsets_[l];
        const double* b = params_.data() + bias_offset(l);
        next.assign(out, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            double z = b[o];
            for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * current[i];
            next[o] = (l + 1 < layers) ? std::max(z, 0.0) : z;
        }
        current.swap(next);
    }
    return current.front();
}

double Mlp::predict(std::span<const double> x) const { return sigmoid(logit(x)); }

LossValue loss_and_gradient(const Mlp& net, const Batch& batch, double lambda, double theta,
                            std::vector<double>* grad) {
    const auto& sizes = net.layer_sizes();
    const std::size_t layers = sizes.size() - 1;
    const std::size_t n = batch.rows.size();
    if (n == 0) throw ValidationError("empty batch");
    const bool use_ems = lambda > 0.0;

    // Forward pass, keeping every layer's pre-activations for backprop.
    std::vector<std::vector<double>> pre(n);
    std::vector<double> y_hat(n);
    std::vector<double> z_out(n);
    const auto params = net.parameters();
    for (std::size_t s = 0; s < n; ++s) {
        const auto x = batch.x.row(batch.rows[s]);
        std::vector<double>& cache = pre[s];
        std::vector<double> current(x.begin(), x.end());
        for (std::size_t l = 0; l < layers; ++l) {
            const auto in = static_cast<std::size_t>(sizes[l]);
            const auto out = static_cast<std::size_t>(sizes[l + 1]);
            const double* w = params.data() + net.weight_offset(l);
            const double* b = params.data() + net.bias_offset(l);
            std::vector<double> next(out);
            for (std::size_t o = 0; o < out; ++o) {
                double z = b[o];
                for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * current[i];
                cache.push_back(z);
                next[o] = (l + 1 < layers) ? std::max(z, 0.0) : z;
            }
            current.swap(next);
        }
        z_out[s] = current.front();
        y_hat[s] = sigmoid(z_out[s]);
    }

    double weight_sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) weight_sum += batch.weights.empty() ? 1.0 : batch.weights[batch.rows[s]];
    if (!(weight_sum > 0.0)) throw TrainingError("batch has zero total sample weight");

    LossValue loss;
    std::vector<double> dz(n, 0.0);  // dLoss / d output logit
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t r = batch.rows[s];
        const double w = (batch.weights.empty() ? 1.0 : batch.weights[r]) / weight_sum;
        const double p = std::clamp(y_hat[s], kProbabilityClamp, 1.0 - kProbabilityClamp);
        const int y = batch.y[r];
        loss.bce -= w * (y ? std::log(p) : std::log(1.0 - p));
        if (p == y_hat[s]) dz[s] = w * (y_hat[s] - static_cast<double>(y));
    }
    if (use_ems) {
        std::vector<double> risks(n);
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t r = batch.rows[s];
            risks[s] = risk::moral_risk(y_hat[s], batch.ej[r], batch.tau_plus[r]);
        }
        loss.ems = risk::expected_moral_shortfall(risks, theta);
        const auto tail_weights = risk::cvar_gradient(risks, theta);
        for (std::size_t s = 0; s < n; ++s) {
            if (tail_weights[s] == 0.0) continue;
            const std::size_t r = batch.rows[s];
            dz[s] += lambda * tail_weights[s] * risk::moral_risk_slope(batch.ej[r], batch.tau_plus[r]) * y_hat[s] *
                     (1.0 - y_hat[s]);
        }
    }
    loss.total = loss.bce + lambda * loss.ems;
    if (!grad) return loss;

    grad->assign(params.size(), 0.0);
    std::vector<double> delta;
    std::vector<double> prev_delta;
    for (std::size_t s = 0; s < n; ++s) {
        if (dz[s] == 0.0) continue;
        const auto x = batch.x.row(batch.rows[s]);
        const std::vector<double>& cache = pre[s];
        // Start index of each layer's pre-activations inside the cache.
        std::vector<std::size_t> start(layers + 1, 0);
        for (std::size_t l = 0; l < layers; ++l) start[l + 1] = start[l] + static_cast<std::size_t>(sizes[l + 1]);

        delta.assign(1, dz[s]);
        for (std::size_t l = layers; l-- > 0;) {
            const auto in = static_cast<std::size_t>(sizes[l]);
            const auto out = static_cast<std::size_t>(sizes[l + 1]);
            double* gw = grad->data() + net.weight_offset(l);
            double* gb = grad->data() + net.bias_offset(l);
            const double* w = params.data() + net.weight_offset(l);
            auto input = [&](std::size_t i) {
                return l == 0 ? x[i] : std::max(cache[start[l - 1] + i], 0.0);
            };
            for (std::size_t o = 0; o < out; ++o) {
                if (delta[o] == 0.0) continue;
                gb[o] += delta[o];
                for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * input(i);
            }
            if (l == 0) break;
            prev_delta.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                if (delta[o] == 0.0) continue;
                for (std::size_t i = 0; i < in; ++i) prev_delta[i] += w[o * in + i] * delta[o];
            }
            for (std::size_t i = 0; i < in; ++i) {
                if (cache[start[l - 1] + i] <= 0.0) prev_delta[i] = 0.0;
            }
            delta.swap(prev_delta);
        }
    }
    return loss;
}

}  // namespace ems::models::nn
