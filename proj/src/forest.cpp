#include "forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ems/random.hpp"

namespace ems::models::detail {

namespace {

struct Sample {
    std::size_t row;
    double weight;  // bootstrap multiplicity times sample weight
};

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // sum over children of (w0^2 + w1^2) / W; larger is purer
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingData& data, const ModelSpec& spec, std::mt19937_64& rng)
        : data_(data), spec_(spec), rng_(rng) {
        const auto d = static_cast<int>(data.x.cols);
        features_per_split_ = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
        feature_order_.resize(data.x.cols);
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
    }

    std::vector<TreeNode> build(std::vector<Sample> samples) {
        nodes_.clear();
        grow(samples, 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<Sample>& samples, int depth) {
        double w0 = 0.0;
        double w1 = 0.0;
        for (const auto& s : samples) (data_.y[s.row] ? w1 : w0) += s.weight;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{-1, 0.0, -1, -1, w1 / (w0 + w1)});

        const bool pure = w0 == 0.0 || w1 == 0.0;
        if (pure || depth >= spec_.max_depth || samples.size() < static_cast<std::size_t>(spec_.min_samples_split)) {
            return id;
        }
        const SplitChoice best = find_split(samples, w0, w1);
        if (best.feature < 0) return id;

        std::vector<Sample> left;
        std::vector<Sample> right;
        for (const auto& s : samples) {
            (data_.x.at(s.row, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(s);
        }
        samples.clear();
        samples.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        nodes_[id].feature = best.feature;
        nodes_[id].threshold = best.threshold;
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    SplitChoice find_split(const std::vector<Sample>& samples, double w0, double w1) {
        const double parent_score = (w0 * w0 + w1 * w1) / (w0 + w1);
        SplitChoice best;
        best.score = parent_score;
        std::shuffle(feature_order_.begin(), feature_order_.end(), rng_);
        int examined = 0;
        std::vector<std::pair<double, std::size_t>> column(samples.size());
        for (int feature : feature_order_) {
            if (examined >= features_per_split_) break;
            for (std::size_t k = 0; k < samples.size(); ++k) {
                column[k] = {data_.x.at(samples[k].row, static_cast<std::size_t>(feature)), k};
            }
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;  // constant here; try another
            ++examined;

            double left0 = 0.0;
            double left1 = 0.0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                const Sample& s = samples[column[k].second];
                (data_.y[s.row] ? left1 : left0) += s.weight;
                if (column[k].first == column[k + 1].first) continue;
                const double right0 = w0 - left0;
                const double right1 = w1 - left1;
                const double lw = left0 + left1;
                const double rw = right0 + right1;
                if (lw <= 0.0 || rw <= 0.0) continue;
                const double score = (left0 * left0 + left1 * left1) / lw + (right0 * right0 + right1 * right1) / rw;
                if (score > best.score + 1e-12) {
                    best.score = score;
                    best.feature = feature;
                    best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                }
            }
        }
        return best;
    }

    const TrainingData& data_;
    const ModelSpec& spec_;
    std::mt19937_64& rng_;
    int features_per_split_ = 1;
    std::vector<int> feature_order_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

ForestParams fit_forest(const ModelSpec& spec, const TrainingData& data, const TrainConfig& cfg) {
    const std::size_t n = data.x.rows;
    ForestParams forest;
    forest.trees.reserve(static_cast<std::size_t>(spec.trees));
    const bool weighted = !data.weights.empty();
    for (int t = 0; t < spec.trees; ++t) {
        std::mt19937_64 rng(counter_draw(cfg.seed, static_cast<std::uint64_t>(t)));
        std::vector<double> multiplicity(n, 0.0);
        if (weighted) {
            std::discrete_distribution<std::size_t> draw(data.weights.begin(), data.weights.end());
            for (std::size_t k = 0; k < n; ++k) multiplicity[draw(rng)] += 1.0;
        } else {
            std::uniform_int_distribution<std::size_t> draw(0, n - 1);
            for (std::size_t k = 0; k < n; ++k) multiplicity[draw(rng)] += 1.0;
        }
        std::vector<Sample> samples;
        for (std::size_t i = 0; i < n; ++i) {
            if (multiplicity[i] > 0.0) samples.push_back({i, multiplicity[i] * (weighted ? data.weights[i] : 1.0)});
        }
        TreeBuilder builder(data, spec, rng);
        forest.trees.push_back(builder.build(std::move(samples)));
    }
    return forest;
}

double forest_vote(const ForestParams& forest, std::span<const double> x) {
    double votes = 0.0;
    for (const auto& tree : forest.trees) {
        int node = 0;
        while (tree[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& n = tree[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        votes += tree[static_cast<std::size_t>(node)].value >= 0.5 ? 1.0 : 0.0;
    }
    return votes / static_cast<double>(forest.trees.size());
}

}  // namespace ems::models::detail
