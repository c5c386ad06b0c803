#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixbo/acquisition.hpp"
#include "mixbo/benchmarks.hpp"
#include "mixbo/core.hpp"
#include "mixbo/doe.hpp"
#include "mixbo/forest.hpp"
#include "mixbo/lvgp.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

enum class SurrogateKind { Lvgp, Forest };

inline std::string to_string(SurrogateKind k) { return k == SurrogateKind::Lvgp ? "lvgp" : "forest"; }

inline SurrogateKind parse_surrogate(const std::string& s) {
    if (s == "lvgp") return SurrogateKind::Lvgp;
    if (s == "forest") return SurrogateKind::Forest;
    throw std::invalid_argument("unknown surrogate '" + s + "' (expected lvgp or forest)");
}

struct BoConfig {
    SurrogateKind surrogate = SurrogateKind::Lvgp;
    std::size_t n_initial = 10;
    std::size_t max_iterations = 50;
    std::uint64_t seed = 0;
    AcquisitionConfig acquisition{};
    LvgpConfig lvgp{};
    ForestConfig forest{};
    std::string objective;

    void validate(const ObjectiveSpec& spec) const {
        if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
        if (n_initial < 2) throw std::invalid_argument("n_initial must be >= 2");
        if (spec.is_lookup()) {
            if (n_initial > spec.table->points.size())
                throw std::invalid_argument("n_initial exceeds the number of table rows");
        } else {
            for (std::size_t k = 0; k < spec.domain.num_categorical(); ++k)
                if (n_initial < spec.domain.categorical(k).num_levels())
                    throw std::invalid_argument("n_initial must be at least the level count of '" +
                                                spec.domain.categorical(k).name() + "'");
        }
    }
};

inline nlohmann::json to_json(const BoConfig& c) {
    return {{"objective", c.objective},
            {"surrogate", to_string(c.surrogate)},
            {"n_initial", c.n_initial},
            {"max_iterations", c.max_iterations},
            {"seed", c.seed},
            {"acquisition",
             {{"max_enumerated_combinations", c.acquisition.max_enumerated_combinations},
              {"sampled_combinations", c.acquisition.sampled_combinations},
              {"sobol_candidates", c.acquisition.sobol_candidates},
              {"refine_top", c.acquisition.refine_top}}}};
}

struct IterationRecord {
    std::size_t iteration = 0;  // 0 for the initial design
    MixedPoint point;
    double response = 0.0;
    double best_so_far = 0.0;
    bool initial = false;
    // Diagnostics (not part of the reproducible history stream).
    double ei = 0.0;
    double wall_seconds = 0.0;
    nlohmann::json fit;
};

struct History {
    BoConfig config;
    std::vector<IterationRecord> records;
    std::optional<std::string> failure;

    std::size_t iterations_completed() const {
        return records.empty() ? 0 : records.back().iteration;
    }

    // best_so_far after the initial design (index 0) and after each BO iteration.
    std::vector<double> best_curve() const {
        std::vector<double> out;
        for (const auto& r : records) {
            if (r.iteration >= out.size()) out.resize(r.iteration + 1);
            out[r.iteration] = r.best_so_far;
        }
        return out;
    }
};

namespace detail {

struct SurrogateFit {
    std::variant<LvgpModel, ForestModel> model;
    nlohmann::json diagnostics;
};

inline SurrogateFit fit_surrogate(const BoConfig& cfg, const Dataset& data, const Domain& domain,
                                  std::uint64_t seed) {
    if (cfg.surrogate == SurrogateKind::Forest) {
        ForestConfig fc = cfg.forest;
        fc.seed = seed;
        auto m = fit_forest(data, domain, fc);
        auto diag = nlohmann::json{{"trees", m.num_trees()}, {"max_depth", m.max_depth()}};
        return {std::move(m), std::move(diag)};
    }
    LvgpConfig lc = cfg.lvgp;
    lc.seed = seed;
    nlohmann::json diag;
    try {
        auto m = fit_lvgp(data, domain, lc);
        diag = {{"nll", m.neg_log_likelihood()}, {"retried", false}};
        return {std::move(m), std::move(diag)};
    } catch (const std::exception&) {
        lc.nugget_floor *= 100.0;
        auto m = fit_lvgp(data, domain, lc);
        diag = {{"nll", m.neg_log_likelihood()}, {"retried", true}};
        return {std::move(m), std::move(diag)};
    }
}

inline std::vector<MixedPoint> initial_points(const ObjectiveSpec& spec, const BoConfig& cfg) {
    if (spec.is_lookup()) {
        std::vector<std::size_t> rows(spec.table->points.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        Rng rng = make_rng(cfg.seed, 0x1a);
        shuffle(rows, rng);
        rows.resize(cfg.n_initial);
        std::sort(rows.begin(), rows.end());
        std::vector<MixedPoint> out;
        for (auto r : rows) out.push_back(spec.table->points[r]);
        return out;
    }
    return initial_design(spec.domain, DesignConfig{cfg.n_initial, cfg.seed});
}

}  // namespace detail

// One BO campaign: initial design, then `max_iterations` rounds of fit,
// propose, evaluate. A lookup objective stops early once every row is sampled.
inline History run_bo(const ObjectiveSpec& spec, BoConfig cfg) {
    using Clock = std::chrono::steady_clock;
    if (cfg.objective.empty()) cfg.objective = spec.name;
    cfg.validate(spec);

    History h;
    h.config = cfg;
    Dataset data;
    double best = std::numeric_limits<double>::infinity();
    auto append = [&](std::size_t it, MixedPoint p, double y, bool initial) {
        best = std::min(best, y);
        data.add(p, y);
        IterationRecord r;
        r.iteration = it;
        r.point = std::move(p);
        r.response = y;
        r.best_so_far = best;
        r.initial = initial;
        h.records.push_back(std::move(r));
    };

    for (auto& p : detail::initial_points(spec, cfg)) {
        const double y = evaluate(spec, p);
        append(0, std::move(p), y, true);
    }

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        const auto start = Clock::now();
        std::vector<MixedPoint> remaining;
        if (spec.is_lookup()) {
            const detail::SampledIndex seen(spec.domain, data.points, cfg.acquisition.duplicate_tolerance);
            for (const auto& p : spec.table->points)
                if (!seen.contains(p)) remaining.push_back(p);
            if (remaining.empty()) break;
        }
        std::optional<detail::SurrogateFit> fit;
        try {
            fit = detail::fit_surrogate(cfg, data, spec.domain, derive_seed(cfg.seed, 0xf17, it));
        } catch (const std::exception& e) {
            h.failure = "surrogate fit failed at iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
        const auto seed = derive_seed(cfg.seed, 0xac9, it);
        const auto* finite = spec.is_lookup() ? &remaining : nullptr;
        const Proposal prop = std::visit(
            [&](const auto& m) { return propose(m, spec.domain, best, cfg.acquisition, seed, data.points, finite); },
            fit->model);
        const double y = evaluate(spec, prop.point);
        append(it, prop.point, y, false);
        auto& rec = h.records.back();
        rec.ei = prop.ei;
        rec.fit = std::move(fit->diagnostics);
        rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    }
    return h;
}

struct AggregateCurve {
    std::vector<double> median;
    std::vector<double> mad;  // scaled: median(|y - median|) / 0.6745
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::pair<double, double> aggregate_median_mad(const std::vector<double>& values) {
    const double med = median_of(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
    return {med, median_of(std::move(dev)) / 0.6745};
}

// Median and scaled MAD of best_so_far across histories, truncated to the
// iterations every history reached.
inline AggregateCurve aggregate(const std::vector<History>& histories) {
    AggregateCurve out;
    std::vector<std::vector<double>> curves;
    for (const auto& h : histories) curves.push_back(h.best_curve());
    if (curves.empty()) return out;
    std::size_t len = curves.front().size();
    for (const auto& c : curves) len = std::min(len, c.size());
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> col;
        for (const auto& c : curves) col.push_back(c[i]);
        auto [m, d] = aggregate_median_mad(col);
        out.median.push_back(m);
        out.mad.push_back(d);
    }
    return out;
}

// First iteration whose median best_so_far is within `tol` of `reference`.
inline std::optional<std::size_t> iterations_to_threshold(const AggregateCurve& c, double reference, double tol) {
    for (std::size_t i = 0; i < c.median.size(); ++i)
        if (c.median[i] - reference <= tol) return i;
    return std::nullopt;
}

struct ReplicateResult {
    std::vector<History> histories;  // by replicate index
    AggregateCurve aggregate;        // over the histories without failure
    std::size_t failed = 0;
};

// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Replicate i runs with seed base_seed + i. The initial design depends only on
// the seed, so two surrogates run with the same base seed share designs.
inline ReplicateResult run_replicates(const ObjectiveSpec& spec, const BoConfig& cfg, std::size_t n_replicates,
                                      std::uint64_t base_seed, std::size_t workers = 1) {
    if (n_replicates < 1) throw std::invalid_argument("n_replicates must be >= 1");
    cfg.validate(spec);
    ReplicateResult out;
    out.histories.resize(n_replicates);
    parallel_for(n_replicates, workers, [&](std::size_t i) {
        BoConfig c = cfg;
        c.seed = base_seed + i;
        try {
            out.histories[i] = run_bo(spec, c);
        } catch (const std::exception& e) {
            out.histories[i].config = c;
            out.histories[i].failure = e.what();
        }
    });
    std::vector<History> ok;
    for (const auto& h : out.histories) {
        if (h.failure)
            ++out.failed;
        else
            ok.push_back(h);
    }
    out.aggregate = aggregate(ok);
    return out;
}

inline double rrmse(const std::vector<double>& predictions, const std::vector<double>& truths) {
    if (predictions.size() != truths.size() || truths.empty())
        throw std::invalid_argument("rrmse requires equal non-zero lengths");
    double mean = 0.0;
    for (double t : truths) mean += t;
    mean /= static_cast<double>(truths.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        num += (predictions[i] - truths[i]) * (predictions[i] - truths[i]);
        den += (truths[i] - mean) * (truths[i] - mean);
    }
    if (!(den > 0.0)) throw std::invalid_argument("undefined RRMSE: truths are constant");
    return std::sqrt(num / den);
}

struct RrmseRow {
    SurrogateKind surrogate = SurrogateKind::Lvgp;
    std::size_t size = 0;
    std::size_t repeat = 0;
    std::optional<double> rrmse;  // empty when the fit failed
    std::string error;
};

inline std::vector<MixedPoint> uniform_points(const Domain& domain, std::size_t n, Rng& rng) {
    std::vector<MixedPoint> out(n);
    for (auto& p : out) {
        p.numeric.resize(domain.num_numeric());
        for (std::size_t k = 0; k < p.numeric.size(); ++k) p.numeric[k] = domain.from_unit(k, uniform01(rng));
        p.categorical.resize(domain.num_categorical());
        for (std::size_t k = 0; k < p.categorical.size(); ++k)
            p.categorical[k] = uniform_index(rng, domain.categorical(k).num_levels());
    }
    return out;
}

struct FitStudyConfig {
    std::vector<std::size_t> sizes;
    std::size_t n_repeats = 10;
    std::size_t n_test = 1000;
    std::uint64_t seed = 0;
    LvgpConfig lvgp{};
    ForestConfig forest{};
    std::size_t workers = 1;
};

// RRMSE of a surrogate trained on fresh initial designs, tested on
// independently drawn uniform points. Rows are ordered by (size, repeat).
inline std::vector<RrmseRow> fit_study(const ObjectiveSpec& spec, SurrogateKind kind, const FitStudyConfig& cfg) {
    if (!spec.is_formula()) throw std::invalid_argument("fit study requires a formula objective");
    if (cfg.sizes.empty()) throw std::invalid_argument("fit study requires at least one training size");
    if (cfg.n_repeats < 1 || cfg.n_test < 2) throw std::invalid_argument("fit study requires repeats >= 1 and test >= 2");
    BoConfig probe;
    for (auto s : cfg.sizes) {
        probe.n_initial = s;
        probe.validate(spec);
    }

    std::vector<RrmseRow> rows;
    for (auto s : cfg.sizes)
        for (std::size_t r = 0; r < cfg.n_repeats; ++r) rows.push_back({kind, s, r, std::nullopt, {}});

    BoConfig bc;
    bc.surrogate = kind;
    bc.lvgp = cfg.lvgp;
    bc.forest = cfg.forest;
    parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
        auto& row = rows[i];
        const auto seed = derive_seed(cfg.seed, row.size, row.repeat);
        Dataset train;
        for (auto& p : initial_design(spec.domain, DesignConfig{row.size, seed})) {
            const double y = evaluate(spec, p);
            train.add(std::move(p), y);
        }
        Rng test_rng = make_rng(seed, 0x7e57);
        const auto test = uniform_points(spec.domain, cfg.n_test, test_rng);
        std::vector<double> truth;
        for (const auto& p : test) truth.push_back(evaluate(spec, p));
        try {
            auto fit = detail::fit_surrogate(bc, train, spec.domain, derive_seed(seed, 0xf17));
            const auto preds = std::visit([&](const auto& m) { return m.predict_batch(test); }, fit.model);
            std::vector<double> mean;
            for (const auto& p : preds) mean.push_back(p.mean);
            row.rrmse = rrmse(mean, truth);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

}  // namespace mixbo
