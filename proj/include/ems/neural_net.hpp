#pragma once

// Fully connected ReLU network with a logistic output unit, trained on
// weighted BCE plus lambda times the per-batch CVaR of moral risks.

#include <cstdint>
#include <span>
#include <vector>

#include "ems/matrix.hpp"

namespace ems::models::nn {

class Mlp {
public:
    // He-uniform weights, zero biases.
    Mlp(std::vector<int> layer_sizes, std::uint64_t seed);
    Mlp(std::vector<int> layer_sizes, std::vector<double> parameters);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // Output-unit logit for one input row.
    double logit(std::span<const double> x) const;
    double predict(std::span<const double> x) const;

    // Offsets of each layer's weight block (out x in, row-major) and bias block.
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const;

private:
    std::vector<int> sizes_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

struct Batch {
    const FeatureMatrix& x;
    std::span<const std::size_t> rows;
    std::span<const int> y;              // indexed by row id
    std::span<const double> weights;     // empty = uniform
    std::span<const double> ej;          // needed when lambda > 0
    std::span<const double> tau_plus;
};

struct LossValue {
    double bce = 0.0;
    double ems = 0.0;
    double total = 0.0;
};

// Composite loss of the batch. When `grad` is non-null it is resized to the
// parameter count and filled with the exact gradient (CVaR subgradient at ties).
LossValue loss_and_gradient(const Mlp& net, const Batch& batch, double lambda, double theta,
                            std::vector<double>* grad);

double sigmoid(double z);

}  // namespace ems::models::nn
