#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mixbo/core.hpp"
#include "mixbo/doe.hpp"
#include "mixbo/optimize.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

// Latent coordinates of every categorical level: one J_i x q matrix per
// categorical variable. Level 0 sits at the origin and level 1 on the first
// axis; the optimizer only ever moves the remaining coordinates.
struct LatentMap {
    std::vector<Eigen::MatrixXd> coords;

    std::size_t latent_dim() const { return coords.empty() ? 0 : static_cast<std::size_t>(coords.front().cols()); }

    static LatentMap zeros(const Domain& domain, std::size_t q) {
        LatentMap m;
        for (std::size_t k = 0; k < domain.num_categorical(); ++k)
            m.coords.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(domain.categorical(k).num_levels()),
                                                     static_cast<Eigen::Index>(q)));
        return m;
    }

    // Squared latent distances between all level pairs of variable k.
    Eigen::MatrixXd squared_distances(std::size_t k) const {
        const auto& z = coords[k];
        const Eigen::Index J = z.rows();
        Eigen::MatrixXd d(J, J);
        for (Eigen::Index a = 0; a < J; ++a)
            for (Eigen::Index b = 0; b < J; ++b) d(a, b) = (z.row(a) - z.row(b)).squaredNorm();
        return d;
    }
};

struct LvgpHyperparams {
    double log_sigma2 = 0.0;
    Eigen::VectorXd log_omega;
    LatentMap latent;
    double log_nugget = std::log(1e-6);
    double nugget_floor = 1e-8;  // relative to sigma^2

    double sigma2() const { return std::exp(log_sigma2); }
    double omega(std::size_t k) const { return std::exp(log_omega[static_cast<Eigen::Index>(k)]); }
    // The floor term keeps the covariance invertible for any log_nugget.
    double nugget() const { return std::exp(log_nugget) + nugget_floor * sigma2(); }
};

namespace detail {

// Numeric coordinates scaled to [0,1] and categorical indices of a point set.
struct EncodedInputs {
    Eigen::MatrixXd unit;  // n x p
    std::vector<std::vector<std::size_t>> levels;  // n x c

    static EncodedInputs from(const Domain& domain, const std::vector<MixedPoint>& pts) {
        EncodedInputs e;
        const auto n = static_cast<Eigen::Index>(pts.size());
        e.unit.resize(n, static_cast<Eigen::Index>(domain.num_numeric()));
        e.levels.resize(pts.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& p = pts[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < domain.num_numeric(); ++k)
                e.unit(i, static_cast<Eigen::Index>(k)) = domain.to_unit(k, p.numeric[k]);
            e.levels[static_cast<std::size_t>(i)] = p.categorical;
        }
        return e;
    }
};

inline double correlation_exponent(const LvgpHyperparams& h, const std::vector<Eigen::MatrixXd>& level_dist,
                                   const double* u1, const double* u2, std::size_t p,
                                   const std::vector<std::size_t>& t1, const std::vector<std::size_t>& t2) {
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const double d = u1[k] - u2[k];
        s += std::exp(h.log_omega[static_cast<Eigen::Index>(k)]) * d * d;
    }
    for (std::size_t k = 0; k < t1.size(); ++k)
        s += level_dist[k](static_cast<Eigen::Index>(t1[k]), static_cast<Eigen::Index>(t2[k]));
    return s;
}

inline std::vector<Eigen::MatrixXd> all_level_distances(const LatentMap& m) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(m.coords.size());
    for (std::size_t k = 0; k < m.coords.size(); ++k) out.push_back(m.squared_distances(k));
    return out;
}

// Signal covariance K (without nugget) between encoded training inputs.
inline Eigen::MatrixXd signal_covariance(const LvgpHyperparams& h, const EncodedInputs& x) {
    const auto n = x.unit.rows();
    const auto p = static_cast<std::size_t>(x.unit.cols());
    const auto dist = all_level_distances(h.latent);
    const double s2 = h.sigma2();
    // Row-major copy so each point's coordinates are contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> u = x.unit;
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = s2;
        for (Eigen::Index j = 0; j < i; ++j) {
            double e = correlation_exponent(h, dist, u.row(i).data(), u.row(j).data(), p,
                                            x.levels[static_cast<std::size_t>(i)],
                                            x.levels[static_cast<std::size_t>(j)]);
            K(i, j) = K(j, i) = s2 * std::exp(-e);
        }
    }
    return K;
}

}  // namespace detail

// sigma^2 exp{-sum_i w_i (x_i - x_i')^2 - sum_i ||z(t_i) - z(t_i')||^2},
// numeric coordinates standardized to [0,1] by the domain bounds.
inline double lvgp_kernel(const MixedPoint& a, const MixedPoint& b, const LvgpHyperparams& h, const Domain& domain) {
    double s = 0.0;
    for (std::size_t k = 0; k < domain.num_numeric(); ++k) {
        const double d = domain.to_unit(k, a.numeric[k]) - domain.to_unit(k, b.numeric[k]);
        s += h.omega(k) * d * d;
    }
    for (std::size_t k = 0; k < domain.num_categorical(); ++k) {
        const auto& z = h.latent.coords[k];
        s += (z.row(static_cast<Eigen::Index>(a.categorical[k])) - z.row(static_cast<Eigen::Index>(b.categorical[k])))
                 .squaredNorm();
    }
    return h.sigma2() * std::exp(-s);
}

struct LikelihoodResult {
    double value = std::numeric_limits<double>::infinity();
    bool ok = false;
};

namespace detail {

struct StandardizedData {
    EncodedInputs inputs;
    Eigen::VectorXd y;
    double mean = 0.0;
    double scale = 1.0;

    static StandardizedData from(const Domain& domain, const Dataset& data) {
        StandardizedData s;
        s.inputs = EncodedInputs::from(domain, data.points);
        const auto n = static_cast<Eigen::Index>(data.size());
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = data.responses[static_cast<std::size_t>(i)];
        s.mean = y.mean();
        const double var = (y.array() - s.mean).square().sum() / static_cast<double>(n);
        s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
        s.y = (y.array() - s.mean) / s.scale;
        return s;
    }
};

// Negative log likelihood with the constant mean profiled out by generalized
// least squares. When `grad` is given, fills the gradient with respect to the
// free parameters in the layout described by ParamLayout.
struct NllPieces {
    double value = std::numeric_limits<double>::infinity();
    double mu = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd alpha;
    Eigen::MatrixXd K;
    bool ok = false;
};

inline NllPieces nll_pieces(const LvgpHyperparams& h, const EncodedInputs& x, const Eigen::VectorXd& y) {
    NllPieces out;
    const auto n = y.size();
    out.K = signal_covariance(h, x);
    Eigen::MatrixXd C = out.K;
    C.diagonal().array() += h.nugget();
    out.llt.compute(C);
    if (out.llt.info() != Eigen::Success) return out;
    const Eigen::MatrixXd& L = out.llt.matrixLLT();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = L(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) return out;
        logdet += 2.0 * std::log(d);
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd ci1 = out.llt.solve(ones);
    const Eigen::VectorXd ciy = out.llt.solve(y);
    out.mu = ones.dot(ciy) / ones.dot(ci1);
    const Eigen::VectorXd r = y.array() - out.mu;
    out.alpha = out.llt.solve(r);
    out.value = 0.5 * logdet + 0.5 * r.dot(out.alpha) + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    out.ok = std::isfinite(out.value);
    return out;
}

}  // namespace detail

inline LikelihoodResult neg_log_likelihood(const LvgpHyperparams& h, const Dataset& data, const Domain& domain) {
    data.check();
    if (data.size() < 2) throw std::invalid_argument("neg_log_likelihood requires at least 2 data points");
    auto s = detail::StandardizedData::from(domain, data);
    auto pieces = detail::nll_pieces(h, s.inputs, s.y);
    return {pieces.ok ? pieces.value : std::numeric_limits<double>::infinity(), pieces.ok};
}

struct Interval {
    double lo;
    double hi;
};

struct LvgpConfig {
    std::size_t latent_dim = 2;
    std::size_t n_starts = 8;
    std::uint64_t seed = 0;
    double nugget_floor = 1e-8;
    Interval log_omega{-6.0, 6.0};
    Interval log_sigma2{-4.0, 4.0};
    Interval latent{-3.0, 3.0};
    Interval log_nugget{std::log(1e-8), std::log(1e-2)};
    LbfgsOptions optimizer{};
    std::size_t threads = 1;
};

// Flat parameter vector: [log sigma2, log omega (p), free latent coords, log nugget].
// Level l of each categorical contributes its first min(l, q) coordinates.
class LvgpParamLayout {
public:
    LvgpParamLayout(const Domain& domain, std::size_t q) : p_(domain.num_numeric()), q_(q) {
        std::size_t offset = 1 + p_;
        for (std::size_t k = 0; k < domain.num_categorical(); ++k) {
            const std::size_t J = domain.categorical(k).num_levels();
            levels_.push_back(J);
            offsets_.push_back(offset);
            for (std::size_t l = 0; l < J; ++l) offset += std::min(l, q_);
        }
        size_ = offset + 1;
    }

    std::size_t size() const { return size_; }
    std::size_t nugget_index() const { return size_ - 1; }
    std::size_t latent_begin() const { return 1 + p_; }

    LvgpHyperparams unpack(const Eigen::VectorXd& v, double nugget_floor) const {
        LvgpHyperparams h;
        h.nugget_floor = nugget_floor;
        h.log_sigma2 = v[0];
        h.log_omega = v.segment(1, static_cast<Eigen::Index>(p_));
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(levels_[k]), static_cast<Eigen::Index>(q_));
            std::size_t idx = offsets_[k];
            for (std::size_t l = 0; l < levels_[k]; ++l)
                for (std::size_t d = 0; d < std::min(l, q_); ++d)
                    z(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d)) = v[static_cast<Eigen::Index>(idx++)];
            h.latent.coords.push_back(std::move(z));
        }
        h.log_nugget = v[static_cast<Eigen::Index>(nugget_index())];
        return h;
    }

    void bounds(const LvgpConfig& cfg, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
        lo.resize(static_cast<Eigen::Index>(size_));
        hi.resize(static_cast<Eigen::Index>(size_));
        lo[0] = cfg.log_sigma2.lo;
        hi[0] = cfg.log_sigma2.hi;
        for (std::size_t k = 0; k < p_; ++k) {
            lo[static_cast<Eigen::Index>(1 + k)] = cfg.log_omega.lo;
            hi[static_cast<Eigen::Index>(1 + k)] = cfg.log_omega.hi;
        }
        for (std::size_t i = latent_begin(); i < nugget_index(); ++i) {
            lo[static_cast<Eigen::Index>(i)] = cfg.latent.lo;
            hi[static_cast<Eigen::Index>(i)] = cfg.latent.hi;
        }
        lo[static_cast<Eigen::Index>(nugget_index())] = cfg.log_nugget.lo;
        hi[static_cast<Eigen::Index>(nugget_index())] = cfg.log_nugget.hi;
    }

    // Objective and gradient over the flat vector.
    double evaluate(const Eigen::VectorXd& v, double nugget_floor, const detail::EncodedInputs& x,
                    const Eigen::VectorXd& y, Eigen::VectorXd* grad) const {
        const LvgpHyperparams h = unpack(v, nugget_floor);
        auto pc = detail::nll_pieces(h, x, y);
        if (!pc.ok) return std::numeric_limits<double>::infinity();
        if (!grad) return pc.value;

        const auto n = y.size();
        // W = C^-1 - alpha alpha^T ; dNLL/dtheta = 1/2 tr(W dC/dtheta)
        Eigen::MatrixXd W = pc.llt.solve(Eigen::MatrixXd::Identity(n, n));
        W.noalias() -= pc.alpha * pc.alpha.transpose();
        const Eigen::MatrixXd E = W.cwiseProduct(pc.K);
        const double trW = W.trace();
        const double s2 = h.sigma2();

        grad->setZero(static_cast<Eigen::Index>(size_));
        (*grad)[0] = 0.5 * (E.sum() + nugget_floor * s2 * trW);
        (*grad)[static_cast<Eigen::Index>(nugget_index())] = 0.5 * std::exp(h.log_nugget) * trW;

        for (std::size_t k = 0; k < p_; ++k) {
            const auto col = x.unit.col(static_cast<Eigen::Index>(k));
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < j; ++i) {
                    const double d = col[i] - col[j];
                    acc += E(i, j) * d * d;
                }
            (*grad)[static_cast<Eigen::Index>(1 + k)] = -h.omega(k) * acc;  // factor 2 (symmetry) x 1/2
        }

        for (std::size_t k = 0; k < levels_.size(); ++k) {
            const auto J = static_cast<Eigen::Index>(levels_[k]);
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(J, J);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto a = static_cast<Eigen::Index>(x.levels[static_cast<std::size_t>(i)][k]);
                for (Eigen::Index j = 0; j < n; ++j)
                    S(a, static_cast<Eigen::Index>(x.levels[static_cast<std::size_t>(j)][k])) += E(i, j);
            }
            const auto& z = h.latent.coords[k];
            std::size_t idx = offsets_[k];
            for (std::size_t l = 0; l < levels_[k]; ++l)
                for (std::size_t d = 0; d < std::min(l, q_); ++d) {
                    double acc = 0.0;
                    const auto li = static_cast<Eigen::Index>(l);
                    const auto di = static_cast<Eigen::Index>(d);
                    for (Eigen::Index b = 0; b < J; ++b) acc += S(li, b) * (z(li, di) - z(b, di));
                    (*grad)[static_cast<Eigen::Index>(idx++)] = -2.0 * acc;
                }
        }
        return pc.value;
    }

private:
    std::size_t p_;
    std::size_t q_;
    std::vector<std::size_t> levels_;
    std::vector<std::size_t> offsets_;
    std::size_t size_ = 0;
};

class LikelihoodOptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LvgpModel {
public:
    // Builds the posterior for fixed hyperparameters.
    static LvgpModel from_hyperparams(const Domain& domain, const Dataset& data, LvgpHyperparams h) {
        data.check();
        if (data.size() < 2) throw std::invalid_argument("LVGP requires at least 2 data points");
        LvgpModel m;
        m.domain_ = domain;
        m.data_ = data;
        m.std_ = detail::StandardizedData::from(domain, data);
        m.h_ = std::move(h);
        auto pc = detail::nll_pieces(m.h_, m.std_.inputs, m.std_.y);
        if (!pc.ok) throw LikelihoodOptimizationError("covariance matrix is not positive definite");
        m.nll_ = pc.value;
        m.mu_ = pc.mu;
        m.alpha_ = std::move(pc.alpha);
        m.llt_ = std::move(pc.llt);
        m.level_dist_ = detail::all_level_distances(m.h_.latent);
        m.unit_rows_ = m.std_.inputs.unit;
        return m;
    }

    const Domain& domain() const { return domain_; }
    const Dataset& data() const { return data_; }
    const LvgpHyperparams& hyperparams() const { return h_; }
    double neg_log_likelihood() const { return nll_; }
    // Constant mean in standardized units.
    double mean_standardized() const { return mu_; }
    double response_mean() const { return std_.mean; }
    double response_scale() const { return std_.scale; }

    Prediction predict(const MixedPoint& p) const {
        const auto n = alpha_.size();
        const auto np = static_cast<std::size_t>(unit_rows_.cols());
        std::vector<double> u(np);
        for (std::size_t k = 0; k < np; ++k) u[k] = domain_.to_unit(k, p.numeric[k]);
        const double s2 = h_.sigma2();
        Eigen::VectorXd kv(n);
        for (Eigen::Index i = 0; i < n; ++i)
            kv[i] = s2 * std::exp(-detail::correlation_exponent(h_, level_dist_, u.data(), unit_rows_.row(i).data(), np,
                                                               p.categorical,
                                                               std_.inputs.levels[static_cast<std::size_t>(i)]));
        const double mean_std = mu_ + kv.dot(alpha_);
        llt_.matrixL().solveInPlace(kv);
        const double var_std = std::max(0.0, s2 + h_.nugget() - kv.squaredNorm());
        return {std_.mean + std_.scale * mean_std, var_std * std_.scale * std_.scale};
    }

    std::vector<Prediction> predict_batch(const std::vector<MixedPoint>& pts) const {
        const auto n = alpha_.size();
        const auto m = static_cast<Eigen::Index>(pts.size());
        const auto np = static_cast<std::size_t>(unit_rows_.cols());
        const double s2 = h_.sigma2();
        Eigen::MatrixXd Ks(n, m);
        std::vector<double> u(np);
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& p = pts[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < np; ++k) u[k] = domain_.to_unit(k, p.numeric[k]);
            for (Eigen::Index i = 0; i < n; ++i)
                Ks(i, j) = s2 * std::exp(-detail::correlation_exponent(h_, level_dist_, u.data(),
                                                                      unit_rows_.row(i).data(), np, p.categorical,
                                                                      std_.inputs.levels[static_cast<std::size_t>(i)]));
        }
        const Eigen::VectorXd means = (Ks.transpose() * alpha_).array() + mu_;
        llt_.matrixL().solveInPlace(Ks);
        const Eigen::RowVectorXd reduction = Ks.colwise().squaredNorm();
        std::vector<Prediction> out(pts.size());
        const double prior = s2 + h_.nugget();
        for (Eigen::Index j = 0; j < m; ++j) {
            const double var_std = std::max(0.0, prior - reduction[j]);
            out[static_cast<std::size_t>(j)] = {std_.mean + std_.scale * means[j], var_std * std_.scale * std_.scale};
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["model"] = "lvgp";
        j["domain"] = mixbo::to_json(domain_);
        j["log_sigma2"] = h_.log_sigma2;
        j["log_omega"] = std::vector<double>(h_.log_omega.data(), h_.log_omega.data() + h_.log_omega.size());
        j["log_nugget"] = h_.log_nugget;
        j["nugget_floor"] = h_.nugget_floor;
        auto latent = nlohmann::json::array();
        for (const auto& z : h_.latent.coords) {
            auto rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                std::vector<double> row(static_cast<std::size_t>(z.cols()));
                for (Eigen::Index c = 0; c < z.cols(); ++c) row[static_cast<std::size_t>(c)] = z(r, c);
                rows.push_back(row);
            }
            latent.push_back(std::move(rows));
        }
        j["latent"] = std::move(latent);
        j["constant_mean"] = mu_;
        j["response_mean"] = std_.mean;
        j["response_scale"] = std_.scale;
        j["neg_log_likelihood"] = nll_;
        return j;
    }

private:
    LvgpModel() = default;

    Domain domain_;
    Dataset data_;
    detail::StandardizedData std_;
    LvgpHyperparams h_;
    double nll_ = 0.0;
    double mu_ = 0.0;
    Eigen::VectorXd alpha_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    std::vector<Eigen::MatrixXd> level_dist_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> unit_rows_;
};

struct LvgpFitReport {
    std::vector<OptimizeResult> starts;  // indexed by start
    std::size_t best_start = 0;
};

// Multi-start maximum likelihood. Starts are a seeded (randomly shifted)
// Sobol sequence over the parameter box; the lowest NLL wins, ties to the
// earliest start.
inline LvgpModel fit_lvgp(const Dataset& data, const Domain& domain, const LvgpConfig& cfg = {},
                          LvgpFitReport* report = nullptr) {
    data.check();
    if (data.size() < 2) throw std::invalid_argument("fit_lvgp requires at least 2 data points");
    if (cfg.n_starts == 0) throw std::invalid_argument("fit_lvgp requires at least one start");
    const LvgpParamLayout layout(domain, cfg.latent_dim);
    const auto s = detail::StandardizedData::from(domain, data);
    Eigen::VectorXd lo, hi;
    layout.bounds(cfg, lo, hi);
    const auto dim = static_cast<Eigen::Index>(layout.size());

    std::vector<Eigen::VectorXd> starts;
    Rng shift_rng = make_rng(cfg.seed, 0x1f6a);
    std::vector<double> shift(layout.size());
    for (auto& v : shift) v = uniform01(shift_rng);
    if (layout.size() <= detail::kSobolMaxDim) {
        SobolSequence seq(layout.size());
        for (std::size_t i = 0; i < cfg.n_starts; ++i) {
            auto u = seq.point(i + 1);
            Eigen::VectorXd x(dim);
            for (Eigen::Index d = 0; d < dim; ++d) {
                double w = u[static_cast<std::size_t>(d)] + shift[static_cast<std::size_t>(d)];
                w -= std::floor(w);
                x[d] = lo[d] + w * (hi[d] - lo[d]);
            }
            starts.push_back(std::move(x));
        }
    } else {
        for (std::size_t i = 0; i < cfg.n_starts; ++i) {
            Rng rng = make_rng(cfg.seed, 0x5eed0000 + i);
            Eigen::VectorXd x(dim);
            for (Eigen::Index d = 0; d < dim; ++d) x[d] = lo[d] + uniform01(rng) * (hi[d] - lo[d]);
            starts.push_back(std::move(x));
        }
    }

    auto run_start = [&](std::size_t i) {
        auto objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
            return layout.evaluate(v, cfg.nugget_floor, s.inputs, s.y, &g);
        };
        return minimize_box(objective, starts[i], lo, hi, cfg.optimizer);
    };

    std::vector<OptimizeResult> results(cfg.n_starts);
    if (cfg.threads > 1) {
        for (std::size_t begin = 0; begin < cfg.n_starts; begin += cfg.threads) {
            std::vector<std::future<OptimizeResult>> futs;
            const std::size_t end = std::min(cfg.n_starts, begin + cfg.threads);
            for (std::size_t i = begin; i < end; ++i) futs.push_back(std::async(std::launch::async, run_start, i));
            for (std::size_t i = begin; i < end; ++i) results[i] = futs[i - begin].get();
        }
    } else {
        for (std::size_t i = 0; i < cfg.n_starts; ++i) results[i] = run_start(i);
    }

    std::size_t best = cfg.n_starts;
    for (std::size_t i = 0; i < cfg.n_starts; ++i) {
        if (!std::isfinite(results[i].value)) continue;
        if (best == cfg.n_starts || results[i].value < results[best].value) best = i;
    }
    if (best == cfg.n_starts) throw LikelihoodOptimizationError("likelihood optimization failed");
    if (report) {
        report->starts = results;
        report->best_start = best;
    }
    return LvgpModel::from_hyperparams(domain, data, layout.unpack(results[best].x, cfg.nugget_floor));
}

}  // namespace mixbo
