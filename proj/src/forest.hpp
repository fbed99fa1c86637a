#pragma once

#include <span>

#include "ems/models.hpp"

namespace ems::models::detail {

// Gini trees on weighted bootstrap samples, sqrt(d) candidate features per split.
ForestParams fit_forest(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg);

// Fraction of trees voting for class 1.
double forest_vote(const ForestParams& forest, std::span<const double> x);

}  // namespace ems::models::detail
