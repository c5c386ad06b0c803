#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mixbo/core.hpp"
#include "mixbo/doe.hpp"
#include "mixbo/lvgp.hpp"  // Prediction
#include "mixbo/random.hpp"

namespace mixbo {

template <typename S>
concept Surrogate = requires(const S& s, const MixedPoint& p) {
    { s.predict(p) } -> std::convertible_to<Prediction>;
};

template <typename S>
concept BatchSurrogate = Surrogate<S> && requires(const S& s, const std::vector<MixedPoint>& pts) {
    { s.predict_batch(pts) } -> std::convertible_to<std::vector<Prediction>>;
};

template <Surrogate S>
std::vector<Prediction> predict_all(const S& s, const std::vector<MixedPoint>& pts) {
    if constexpr (BatchSurrogate<S>) {
        return s.predict_batch(pts);
    } else {
        std::vector<Prediction> out;
        out.reserve(pts.size());
        for (const auto& p : pts) out.push_back(s.predict(p));
        return out;
    }
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E[max(0, y_min - Y)], Y ~ N(mean, sd^2); sd = 0 takes the limit max(0, y_min - mean).
inline double expected_improvement(double mean, double sd, double y_min) {
    if (!(sd >= 0.0)) throw std::invalid_argument("expected_improvement: sd must be non-negative");
    const double delta = y_min - mean;
    if (sd == 0.0) return std::max(0.0, delta);
    const double z = delta / sd;
    return std::max(0.0, sd * normal_pdf(z) + delta * normal_cdf(z));
}

struct Proposal {
    MixedPoint point;
    double ei = 0.0;
    double predicted_mean = 0.0;
    double predicted_sd = 0.0;
};

struct AcquisitionConfig {
    std::size_t max_enumerated_combinations = 4096;
    std::size_t sampled_combinations = 4096;
    std::size_t sobol_candidates = 1024;
    std::size_t refine_top = 4;
    std::size_t max_refine_evaluations = 400;
    double min_refine_step = 1e-7;
    double duplicate_tolerance = 1e-9;  // in unit numeric coordinates
    double tie_tolerance = 1e-12;
};

namespace detail {

// Already-sampled points grouped by categorical combination.
class SampledIndex {
public:
    SampledIndex(const Domain& domain, const std::vector<MixedPoint>& sampled, double tol)
        : domain_(domain), tol_(tol) {
        for (const auto& p : sampled) by_combo_[p.categorical].push_back(unit(p));
    }

    bool contains(const MixedPoint& p) const {
        auto it = by_combo_.find(p.categorical);
        if (it == by_combo_.end()) return false;
        const auto u = unit(p);
        for (const auto& q : it->second) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < u.size(); ++k) d2 += (u[k] - q[k]) * (u[k] - q[k]);
            if (std::sqrt(d2) < tol_) return true;
        }
        return false;
    }

private:
    std::vector<double> unit(const MixedPoint& p) const {
        std::vector<double> u(p.numeric.size());
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = domain_.to_unit(k, p.numeric[k]);
        return u;
    }

    const Domain& domain_;
    double tol_;
    std::map<std::vector<std::size_t>, std::vector<std::vector<double>>> by_combo_;
};

// Keeps the best `capacity` proposals ordered by EI (descending), ties within
// `tol` broken by the smaller point.
class TopProposals {
public:
    TopProposals(std::size_t capacity, double tol) : capacity_(capacity), tol_(tol) {}

    bool better(const Proposal& a, const Proposal& b) const {
        if (a.ei > b.ei + tol_) return true;
        if (b.ei > a.ei + tol_) return false;
        return a.point < b.point;
    }

    void offer(const Proposal& p) {
        if (items_.size() == capacity_ && !better(p, items_.back())) return;
        auto pos = std::find_if(items_.begin(), items_.end(), [&](const Proposal& q) { return better(p, q); });
        items_.insert(pos, p);
        if (items_.size() > capacity_) items_.pop_back();
    }

    const std::vector<Proposal>& items() const { return items_; }

private:
    std::size_t capacity_;
    double tol_;
    std::vector<Proposal> items_;
};

inline std::vector<std::vector<std::size_t>> categorical_combinations(const Domain& domain, const AcquisitionConfig& cfg,
                                                                      Rng& rng) {
    std::vector<std::vector<std::size_t>> combos;
    const std::size_t c = domain.num_categorical();
    const std::size_t total = domain.num_combinations();
    if (total <= cfg.max_enumerated_combinations) {
        std::vector<std::size_t> cur(c, 0);
        for (std::size_t i = 0; i < total; ++i) {
            combos.push_back(cur);
            for (std::size_t k = c; k-- > 0;) {
                if (++cur[k] < domain.categorical(k).num_levels()) break;
                cur[k] = 0;
            }
        }
    } else {
        for (std::size_t i = 0; i < cfg.sampled_combinations; ++i) {
            std::vector<std::size_t> cur(c);
            for (std::size_t k = 0; k < c; ++k) cur[k] = uniform_index(rng, domain.categorical(k).num_levels());
            combos.push_back(std::move(cur));
        }
        std::sort(combos.begin(), combos.end());
        combos.erase(std::unique(combos.begin(), combos.end()), combos.end());
    }
    return combos;
}

}  // namespace detail

// Maximizes EI over the domain. With `finite_candidates`, only those points
// (minus the sampled ones) are considered.
template <Surrogate S>
Proposal propose(const S& surrogate, const Domain& domain, double y_min, const AcquisitionConfig& cfg,
                 std::uint64_t seed, const std::vector<MixedPoint>& sampled = {},
                 const std::vector<MixedPoint>* finite_candidates = nullptr) {
    const detail::SampledIndex seen(domain, sampled, cfg.duplicate_tolerance);
    detail::TopProposals top(std::max<std::size_t>(cfg.refine_top, 1), cfg.tie_tolerance);
    std::optional<Proposal> widest;  // fallback when everything is a duplicate

    auto score = [&](const std::vector<MixedPoint>& pts) {
        const auto preds = predict_all(surrogate, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double sd = std::sqrt(std::max(0.0, preds[i].variance));
            Proposal prop{pts[i], expected_improvement(preds[i].mean, sd, y_min), preds[i].mean, sd};
            if (!widest || sd > widest->predicted_sd || (sd == widest->predicted_sd && prop.point < widest->point))
                widest = prop;
            if (!seen.contains(pts[i])) top.offer(prop);
        }
    };

    if (finite_candidates) {
        constexpr std::size_t kChunk = 4096;
        for (std::size_t begin = 0; begin < finite_candidates->size(); begin += kChunk) {
            const auto end = std::min(finite_candidates->size(), begin + kChunk);
            score(std::vector<MixedPoint>(finite_candidates->begin() + static_cast<std::ptrdiff_t>(begin),
                                          finite_candidates->begin() + static_cast<std::ptrdiff_t>(end)));
        }
    } else {
        Rng rng = make_rng(seed, 0xac9);
        const auto combos = detail::categorical_combinations(domain, cfg, rng);
        const std::size_t p = domain.num_numeric();
        std::vector<std::vector<double>> numeric;
        if (p > 0) {
            std::vector<double> shift(p);
            for (auto& s : shift) s = uniform01(rng);
            numeric = sobol_sequence(p, cfg.sobol_candidates);
            for (auto& u : numeric)
                for (std::size_t k = 0; k < p; ++k) {
                    double w = u[k] + shift[k];
                    w -= std::floor(w);
                    u[k] = domain.from_unit(k, w);
                }
        } else {
            numeric.emplace_back();
        }
        std::vector<MixedPoint> batch;
        batch.reserve(numeric.size());
        for (const auto& combo : combos) {
            batch.clear();
            for (const auto& x : numeric) batch.push_back(MixedPoint{x, combo});
            score(batch);
        }
    }

    if (!widest) throw std::invalid_argument("propose: the candidate set is empty");
    if (top.items().empty()) return *widest;

    // Coordinate pattern search on the numeric block of the leading candidates.
    std::vector<Proposal> refined = top.items();
    const std::size_t p = domain.num_numeric();
    if (!finite_candidates && p > 0) {
        const double h0 = 0.5 * std::pow(static_cast<double>(std::max<std::size_t>(cfg.sobol_candidates, 1)),
                                          -1.0 / static_cast<double>(p));
        for (auto& cand : refined) {
            double step = h0;
            std::size_t evals = 0;
            while (step >= cfg.min_refine_step && evals < cfg.max_refine_evaluations) {
                bool improved = false;
                for (std::size_t k = 0; k < p && evals < cfg.max_refine_evaluations; ++k) {
                    for (double dir : {-1.0, 1.0}) {
                        MixedPoint trial = cand.point;
                        const double u = std::clamp(domain.to_unit(k, trial.numeric[k]) + dir * step, 0.0, 1.0);
                        trial.numeric[k] = domain.from_unit(k, u);
                        if (trial == cand.point || seen.contains(trial)) continue;
                        const auto pred = surrogate.predict(trial);
                        ++evals;
                        const double sd = std::sqrt(std::max(0.0, pred.variance));
                        const double ei = expected_improvement(pred.mean, sd, y_min);
                        if (ei > cand.ei + cfg.tie_tolerance) {
                            cand = Proposal{std::move(trial), ei, pred.mean, sd};
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }
        }
    }
    detail::TopProposals best(1, cfg.tie_tolerance);
    for (const auto& c : refined) best.offer(c);
    return best.items().front();
}

}  // namespace mixbo
