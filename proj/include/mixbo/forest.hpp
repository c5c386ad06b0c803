#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mixbo/core.hpp"
#include "mixbo/lvgp.hpp"  // Prediction
#include "mixbo/random.hpp"

namespace mixbo {

struct LeafNode {
    double value = 0.0;     // mean of in-node responses
    std::size_t count = 0;  // in-bag samples, with bootstrap multiplicity
};

struct SplitNode {
    std::size_t variable = 0;  // position in the domain
    bool numeric = true;
    std::size_t block_index = 0;  // index among numeric or categorical variables
    double threshold = 0.0;       // numeric: go left iff x <= threshold
    std::vector<bool> left_levels;  // categorical: go left iff level is in the set
    std::size_t left = 0;
    std::size_t right = 0;
};

using TreeNode = std::variant<LeafNode, SplitNode>;

// Flat tree; node 0 is the root.
class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }

    std::size_t depth() const { return nodes_.empty() ? 0 : depth_from(0); }

    std::size_t num_leaves() const {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return std::holds_alternative<LeafNode>(n); }));
    }

private:
    std::size_t depth_from(std::size_t i) const {
        if (const auto* s = std::get_if<SplitNode>(&nodes_[i]))
            return 1 + std::max(depth_from(s->left), depth_from(s->right));
        return 0;
    }

    std::vector<TreeNode> nodes_;
};

inline double tree_predict(const RegressionTree& tree, const MixedPoint& p) {
    const auto& nodes = tree.nodes();
    if (nodes.empty()) throw std::invalid_argument("tree_predict: empty tree");
    std::size_t i = 0;
    while (true) {
        const auto& node = nodes[i];
        if (const auto* leaf = std::get_if<LeafNode>(&node)) return leaf->value;
        const auto& s = std::get<SplitNode>(node);
        bool go_left = s.numeric ? p.numeric[s.block_index] <= s.threshold : s.left_levels[p.categorical[s.block_index]];
        i = go_left ? s.left : s.right;
    }
}

enum class ForestUncertainty {
    JackknifeBiasCorrected,  // mean of bias-corrected IJ and jackknife-after-bootstrap
    EnsembleVariance,        // plain variance of tree predictions
};

struct ForestConfig {
    std::size_t n_trees = 0;  // 0 selects max(#data, min_trees)
    std::size_t min_trees = 16;
    std::size_t max_depth = std::size_t{1} << 30;
    std::size_t min_leaf = 1;
    double feature_fraction = 1.0;
    std::size_t max_enumerated_levels = 12;
    std::size_t random_partitions = 32;
    ForestUncertainty uncertainty = ForestUncertainty::JackknifeBiasCorrected;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

// Uncorrected and corrected pieces of the variance estimate at one point.
struct ForestVarianceTerms {
    double ensemble = 0.0;  // (1/B) sum (t_b - tbar)^2
    double infinitesimal_jackknife = 0.0;
    double jackknife = 0.0;
    double raw = 0.0;  // bias-corrected combination, may be negative
};

namespace detail {

struct TreeBuilder {
    const Domain& domain;
    const Dataset& data;
    const ForestConfig& cfg;
    Rng& rng;
    std::vector<TreeNode> nodes;

    struct Sample {
        std::size_t index;
        double weight;
    };

    struct Candidate {
        double gain = 0.0;
        SplitNode split;
        bool found = false;
    };

    static double node_mean(const std::vector<Sample>& s, const Dataset& d, double& wsum) {
        double sy = 0.0;
        wsum = 0.0;
        for (const auto& e : s) {
            sy += e.weight * d.responses[e.index];
            wsum += e.weight;
        }
        return sy / wsum;
    }

    std::size_t build(const std::vector<Sample>& samples, std::size_t depth) {
        double w = 0.0;
        const double mean = node_mean(samples, data, w);
        double sse = 0.0;
        for (const auto& e : samples) {
            const double d = data.responses[e.index] - mean;
            sse += e.weight * d * d;
        }
        const std::size_t id = nodes.size();
        nodes.emplace_back(LeafNode{mean, static_cast<std::size_t>(w)});
        const double scale = std::max(1.0, mean * mean * w);
        if (depth >= cfg.max_depth || w < 2.0 * static_cast<double>(cfg.min_leaf) || sse <= 1e-14 * scale) return id;

        Candidate best = best_split(samples);
        if (!best.found || best.gain <= 1e-12 * std::max(sse, 1e-300)) return id;

        std::vector<Sample> left, right;
        for (const auto& e : samples) {
            const auto& p = data.points[e.index];
            bool go_left = best.split.numeric ? p.numeric[best.split.block_index] <= best.split.threshold
                                              : best.split.left_levels[p.categorical[best.split.block_index]];
            (go_left ? left : right).push_back(e);
        }
        SplitNode split = std::move(best.split);
        split.left = build(left, depth + 1);
        split.right = build(right, depth + 1);
        nodes[id] = std::move(split);
        return id;
    }

    Candidate best_split(const std::vector<Sample>& samples) {
        std::vector<std::size_t> features(domain.size());
        std::iota(features.begin(), features.end(), std::size_t{0});
        if (cfg.feature_fraction < 1.0) {
            auto m = static_cast<std::size_t>(std::ceil(cfg.feature_fraction * static_cast<double>(features.size())));
            m = std::clamp<std::size_t>(m, 1, features.size());
            shuffle(features, rng);
            features.resize(m);
            std::sort(features.begin(), features.end());
        }
        double wtot = 0.0, stot = 0.0;
        for (const auto& e : samples) {
            wtot += e.weight;
            stot += e.weight * data.responses[e.index];
        }
        const double base = stot * stot / wtot;

        Candidate best;
        std::size_t in = 0, ic = 0;
        std::vector<std::size_t> num_of(domain.size()), cat_of(domain.size());
        for (std::size_t v = 0; v < domain.size(); ++v) {
            if (domain.variables()[v].is_numeric())
                num_of[v] = in++;
            else
                cat_of[v] = ic++;
        }
        for (std::size_t v : features) {
            if (domain.variables()[v].is_numeric())
                numeric_split(samples, v, num_of[v], base, wtot, stot, best);
            else
                categorical_split(samples, v, cat_of[v], base, wtot, stot, best);
        }
        return best;
    }

    void numeric_split(const std::vector<Sample>& samples, std::size_t var, std::size_t k, double base, double wtot,
                       double stot, Candidate& best) const {
        std::vector<Sample> sorted = samples;
        std::stable_sort(sorted.begin(), sorted.end(), [&](const Sample& a, const Sample& b) {
            return data.points[a.index].numeric[k] < data.points[b.index].numeric[k];
        });
        const double min_leaf = static_cast<double>(cfg.min_leaf);
        double wl = 0.0, sl = 0.0;
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            wl += sorted[i].weight;
            sl += sorted[i].weight * data.responses[sorted[i].index];
            const double x0 = data.points[sorted[i].index].numeric[k];
            const double x1 = data.points[sorted[i + 1].index].numeric[k];
            if (!(x0 < x1)) continue;
            const double wr = wtot - wl;
            if (wl < min_leaf || wr < min_leaf) continue;
            const double sr = stot - sl;
            const double gain = sl * sl / wl + sr * sr / wr - base;
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.gain = gain;
                best.split = SplitNode{};
                best.split.variable = var;
                best.split.numeric = true;
                best.split.block_index = k;
                double mid = 0.5 * (x0 + x1);
                if (!(mid < x1)) mid = x0;
                best.split.threshold = mid;
            }
        }
    }

    void categorical_split(const std::vector<Sample>& samples, std::size_t var, std::size_t k, double base,
                           double wtot, double stot, Candidate& best) {
        const std::size_t J = domain.categorical(k).num_levels();
        std::vector<double> wl(J, 0.0), sl(J, 0.0);
        for (const auto& e : samples) {
            const std::size_t l = data.points[e.index].categorical[k];
            wl[l] += e.weight;
            sl[l] += e.weight * data.responses[e.index];
        }
        std::vector<std::size_t> present;
        for (std::size_t l = 0; l < J; ++l)
            if (wl[l] > 0.0) present.push_back(l);
        if (present.size() < 2) return;

        const double min_leaf = static_cast<double>(cfg.min_leaf);
        auto consider = [&](const std::vector<bool>& in_left) {
            double w = 0.0, s = 0.0;
            for (std::size_t l : present)
                if (in_left[l]) {
                    w += wl[l];
                    s += sl[l];
                }
            const double wr = wtot - w;
            if (w < min_leaf || wr < min_leaf) return;
            const double sr = stot - s;
            const double gain = s * s / w + sr * sr / wr - base;
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.gain = gain;
                best.split = SplitNode{};
                best.split.variable = var;
                best.split.numeric = false;
                best.split.block_index = k;
                // Levels absent from this node follow the heavier branch; ties go left.
                std::vector<bool> mask = in_left;
                const bool absent_left = w >= wr;
                for (std::size_t l = 0; l < J; ++l)
                    if (wl[l] == 0.0) mask[l] = absent_left;
                best.split.left_levels = std::move(mask);
            }
        };

        const std::size_t one_vs_rest = present.size() == 2 ? 1 : present.size();
        for (std::size_t i = 0; i < one_vs_rest; ++i) {
            std::vector<bool> in_left(J, false);
            in_left[present[i]] = true;
            consider(in_left);
        }
        if (present.size() > cfg.max_enumerated_levels) {
            for (std::size_t r = 0; r < cfg.random_partitions; ++r) {
                std::vector<bool> in_left(J, false);
                std::size_t count = 0;
                for (std::size_t l : present) {
                    in_left[l] = (rng() >> 63) != 0;
                    count += in_left[l];
                }
                if (count == 0 || count == present.size()) continue;
                consider(in_left);
            }
        }
    }
};

}  // namespace detail

class ForestModel {
public:
    const std::vector<RegressionTree>& trees() const { return trees_; }
    // inbag()(i, b): multiplicity of training point i in tree b's bootstrap
    const Eigen::MatrixXd& inbag() const { return inbag_; }
    const ForestConfig& config() const { return cfg_; }
    const Dataset& data() const { return data_; }
    const Domain& domain() const { return domain_; }
    std::size_t num_trees() const { return trees_.size(); }

    std::vector<double> tree_predictions(const MixedPoint& p) const {
        std::vector<double> t(trees_.size());
        for (std::size_t b = 0; b < trees_.size(); ++b) t[b] = tree_predict(trees_[b], p);
        return t;
    }

    ForestVarianceTerms variance_terms(const MixedPoint& p) const {
        return terms_from(tree_predictions(p));
    }

    Prediction predict(const MixedPoint& p) const { return finish(tree_predictions(p)); }

    std::vector<Prediction> predict_batch(const std::vector<MixedPoint>& pts) const {
        std::vector<Prediction> out;
        out.reserve(pts.size());
        const auto B = static_cast<Eigen::Index>(trees_.size());
        const auto m = static_cast<Eigen::Index>(pts.size());
        Eigen::MatrixXd T(B, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index b = 0; b < B; ++b)
                T(b, j) = tree_predict(trees_[static_cast<std::size_t>(b)], pts[static_cast<std::size_t>(j)]);
        const Eigen::RowVectorXd means = T.colwise().mean();
        const Eigen::MatrixXd Tc = T.rowwise() - means;
        const Eigen::RowVectorXd ens = Tc.colwise().squaredNorm() / static_cast<double>(B);
        if (cfg_.uncertainty == ForestUncertainty::EnsembleVariance) {
            for (Eigen::Index j = 0; j < m; ++j) out.push_back({means[j], floor_variance(ens[j], ens[j])});
            return out;
        }
        const Eigen::MatrixXd cov = centered_inbag_ * Tc / static_cast<double>(B);  // n x m
        const Eigen::MatrixXd oob_means = oob_weights_ * T;                         // n x m
        const double n = static_cast<double>(data_.size());
        for (Eigen::Index j = 0; j < m; ++j) {
            double vj = 0.0;
            for (Eigen::Index i = 0; i < oob_weights_.rows(); ++i)
                if (has_oob_[static_cast<std::size_t>(i)]) {
                    const double d = oob_means(i, j) - means[j];
                    vj += d * d;
                }
            ForestVarianceTerms t;
            t.ensemble = ens[j];
            t.infinitesimal_jackknife = cov.col(j).squaredNorm();
            t.jackknife = (n - 1.0) / n * vj;
            t.raw = combine(t);
            out.push_back({means[j], floor_variance(t.raw, t.ensemble)});
        }
        return out;
    }

    // Mean over the trees whose bootstrap excluded training point i; NaN if none.
    double oob_predict(std::size_t i) const {
        double s = 0.0;
        std::size_t c = 0;
        for (std::size_t b = 0; b < trees_.size(); ++b)
            if (inbag_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) == 0.0) {
                s += tree_predict(trees_[b], data_.points[i]);
                ++c;
            }
        return c ? s / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN();
    }

    std::size_t max_depth() const {
        std::size_t d = 0;
        for (const auto& t : trees_) d = std::max(d, t.depth());
        return d;
    }

    nlohmann::json summary() const {
        std::vector<std::size_t> depths, leaves;
        for (const auto& t : trees_) {
            depths.push_back(t.depth());
            leaves.push_back(t.num_leaves());
        }
        return {{"model", "forest"}, {"trees", trees_.size()}, {"depths", depths}, {"leaves", leaves}};
    }

private:
    friend ForestModel fit_forest(const Dataset&, const Domain&, const ForestConfig&);

    ForestVarianceTerms terms_from(const std::vector<double>& t) const {
        const auto B = static_cast<double>(t.size());
        const double n = static_cast<double>(data_.size());
        const double mean = std::accumulate(t.begin(), t.end(), 0.0) / B;
        ForestVarianceTerms out;
        for (double v : t) out.ensemble += (v - mean) * (v - mean);
        out.ensemble /= B;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            double cov = 0.0, oob_sum = 0.0;
            std::size_t oob = 0;
            for (std::size_t b = 0; b < t.size(); ++b) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto bi = static_cast<Eigen::Index>(b);
                cov += centered_inbag_(ii, bi) * (t[b] - mean);
                if (inbag_(ii, bi) == 0.0) {
                    oob_sum += t[b];
                    ++oob;
                }
            }
            cov /= B;
            out.infinitesimal_jackknife += cov * cov;
            if (oob > 0) {
                const double d = oob_sum / static_cast<double>(oob) - mean;
                out.jackknife += d * d;
            }
        }
        out.jackknife *= (n - 1.0) / n;
        out.raw = combine(out);
        return out;
    }

    // Monte Carlo bias corrections: IJ - (n/B) v, J - (e-1)(n/B) v.
    double combine(const ForestVarianceTerms& t) const {
        const double n = static_cast<double>(data_.size());
        const double B = static_cast<double>(trees_.size());
        const double ij = t.infinitesimal_jackknife - n / B * t.ensemble;
        const double jk = t.jackknife - (std::numbers::e - 1.0) * n / B * t.ensemble;
        return 0.5 * (ij + jk);
    }

    double floor_variance(double raw, double ensemble) const {
        return std::max({raw, ensemble / static_cast<double>(trees_.size()), 1e-12});
    }

    Prediction finish(const std::vector<double>& t) const {
        const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
        const auto terms = terms_from(t);
        if (cfg_.uncertainty == ForestUncertainty::EnsembleVariance)
            return {mean, floor_variance(terms.ensemble, terms.ensemble)};
        return {mean, floor_variance(terms.raw, terms.ensemble)};
    }

    Domain domain_;
    Dataset data_;
    ForestConfig cfg_;
    std::vector<RegressionTree> trees_;
    Eigen::MatrixXd inbag_;           // n x B
    Eigen::MatrixXd centered_inbag_;  // inbag minus its row mean
    Eigen::MatrixXd oob_weights_;     // n x B, rows average the out-of-bag trees
    std::vector<bool> has_oob_;
};

inline std::size_t default_tree_count(std::size_t n_data, const ForestConfig& cfg) {
    return cfg.n_trees ? cfg.n_trees : std::max(n_data, cfg.min_trees);
}

inline ForestModel fit_forest(const Dataset& data, const Domain& domain, const ForestConfig& cfg = {}) {
    data.check();
    if (data.size() < 2) throw std::invalid_argument("fit_forest requires at least 2 data points");
    const std::size_t B = default_tree_count(data.size(), cfg);
    if (B < 2) throw std::invalid_argument("fit_forest requires at least 2 trees");
    const std::size_t n = data.size();

    ForestModel model;
    model.domain_ = domain;
    model.data_ = data;
    model.cfg_ = cfg;
    model.trees_.resize(B);
    model.inbag_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(B));

    auto grow = [&](std::size_t b) {
        Rng rng = make_rng(cfg.seed, b);
        std::vector<double> counts(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) counts[uniform_index(rng, n)] += 1.0;
        std::vector<detail::TreeBuilder::Sample> samples;
        for (std::size_t i = 0; i < n; ++i)
            if (counts[i] > 0.0) samples.push_back({i, counts[i]});
        detail::TreeBuilder builder{domain, data, cfg, rng, {}};
        builder.build(samples, 0);
        model.trees_[b] = RegressionTree(std::move(builder.nodes));
        for (std::size_t i = 0; i < n; ++i)
            model.inbag_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = counts[i];
    };

    if (cfg.threads > 1) {
        for (std::size_t begin = 0; begin < B; begin += cfg.threads) {
            std::vector<std::future<void>> futs;
            for (std::size_t b = begin; b < std::min(B, begin + cfg.threads); ++b)
                futs.push_back(std::async(std::launch::async, grow, b));
            for (auto& f : futs) f.get();
        }
    } else {
        for (std::size_t b = 0; b < B; ++b) grow(b);
    }

    model.centered_inbag_ = model.inbag_.colwise() - model.inbag_.rowwise().mean();
    model.oob_weights_ = Eigen::MatrixXd::Zero(model.inbag_.rows(), model.inbag_.cols());
    model.has_oob_.assign(n, false);
    for (Eigen::Index i = 0; i < model.inbag_.rows(); ++i) {
        double c = 0.0;
        for (Eigen::Index b = 0; b < model.inbag_.cols(); ++b)
            if (model.inbag_(i, b) == 0.0) c += 1.0;
        if (c == 0.0) continue;
        model.has_oob_[static_cast<std::size_t>(i)] = true;
        for (Eigen::Index b = 0; b < model.inbag_.cols(); ++b)
            if (model.inbag_(i, b) == 0.0) model.oob_weights_(i, b) = 1.0 / c;
    }
    return model;
}

inline Prediction forest_predict(const ForestModel& model, const MixedPoint& p) { return model.predict(p); }

}  // namespace mixbo
