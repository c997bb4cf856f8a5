#include "hpmr/forest.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hpmr::surrogate {

namespace {

struct Builder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const ForestConfig& cfg;
    std::mt19937_64& rng;
    std::vector<double>& importance;
    int max_features;

    template <class Tree>
    int grow(Tree& tree, std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
        const auto node = static_cast<int>(tree.size());
        tree.emplace_back();
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = y(static_cast<Eigen::Index>(idx[i]));
            sum += v;
            sq += v * v;
        }
        const double n = static_cast<double>(hi - lo);
        tree[node].value = sum / n;
        const double sse = sq - sum * sum / n;
        const auto min_leaf = static_cast<std::size_t>(std::max(cfg.min_samples_leaf, 1));
        if (depth >= cfg.max_depth || hi - lo < 2 * min_leaf || sse <= 1e-14 * n) return node;

        std::vector<int> feats(static_cast<std::size_t>(X.cols()));
        std::iota(feats.begin(), feats.end(), 0);
        std::shuffle(feats.begin(), feats.end(), rng);
        feats.resize(static_cast<std::size_t>(max_features));

        double best_gain = 0.0;
        int best_f = -1;
        double best_t = 0.0;
        std::vector<std::pair<double, double>> col(hi - lo);
        for (int f : feats) {
            for (std::size_t i = lo; i < hi; ++i)
                col[i - lo] = {X(static_cast<Eigen::Index>(idx[i]), f), y(static_cast<Eigen::Index>(idx[i]))};
            std::sort(col.begin(), col.end());
            double ls = 0.0, lq = 0.0;
            for (std::size_t k = 0; k + 1 < col.size(); ++k) {
                ls += col[k].second;
                lq += col[k].second * col[k].second;
                const std::size_t nl = k + 1, nr = col.size() - nl;
                if (nl < min_leaf || nr < min_leaf || col[k].first == col[k + 1].first) continue;
                const double rs = sum - ls, rq = sq - lq;
                const double child = (lq - ls * ls / static_cast<double>(nl)) + (rq - rs * rs / static_cast<double>(nr));
                const double gain = sse - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_t = 0.5 * (col[k].first + col[k + 1].first);
                }
            }
        }
        if (best_f < 0) return node;
        importance[static_cast<std::size_t>(best_f)] += best_gain;
        const auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                        idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t r) {
                                            return X(static_cast<Eigen::Index>(r), best_f) <= best_t;
                                        });
        const auto m = static_cast<std::size_t>(mid - idx.begin());
        tree[node].feature = best_f;
        tree[node].threshold = best_t;
        const int l = grow(tree, idx, lo, m, depth + 1);
        tree[node].left = l;
        const int r = grow(tree, idx, m, hi, depth + 1);
        tree[node].right = r;
        return node;
    }
};

}  // namespace

RandomForest RandomForest::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg) {
    if (X.rows() != y.size()) throw DomainError("forest inputs and targets differ in length");
    if (X.rows() < 10) throw DomainError("forest needs at least 10 rows");
    if (cfg.trees < 1) throw DomainError("forest needs at least one tree");
    const double mean = y.mean();
    if (!((y.array() - mean).square().sum() > 0.0)) throw DomainError("forest target has zero variance");
    RandomForest rf;
    rf.importance_.assign(static_cast<std::size_t>(X.cols()), 0.0);
    std::mt19937_64 rng(cfg.seed);
    const int max_features = std::clamp(static_cast<int>(std::lround(cfg.feature_fraction * static_cast<double>(X.cols()))),
                                        1, static_cast<int>(X.cols()));
    Builder b{X, y, cfg, rng, rf.importance_, max_features};
    const auto n = static_cast<std::size_t>(X.rows());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < cfg.trees; ++t) {
        std::vector<std::size_t> idx(n);
        for (auto& i : idx) i = pick(rng);
        Tree tree;
        b.grow(tree, idx, 0, n, 0);
        rf.trees_.push_back(std::move(tree));
    }
    const double total = std::accumulate(rf.importance_.begin(), rf.importance_.end(), 0.0);
    if (total > 0.0)
        for (auto& v : rf.importance_) v /= total;
    return rf;
}

double RandomForest::predict(const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (const auto& tree : trees_) {
        int k = 0;
        while (tree[static_cast<std::size_t>(k)].feature >= 0) {
            const auto& nd = tree[static_cast<std::size_t>(k)];
            k = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        acc += tree[static_cast<std::size_t>(k)].value;
    }
    return acc / static_cast<double>(trees_.size());
}

std::vector<std::size_t> RandomForest::ranking() const {
    std::vector<std::size_t> r(importance_.size());
    std::iota(r.begin(), r.end(), 0);
    std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) { return importance_[a] > importance_[b]; });
    return r;
}

}  // namespace hpmr::surrogate
