#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixbo/benchmarks.hpp"
#include "mixbo/core.hpp"

#ifndef MIXBO_DATA_DIR
#define MIXBO_DATA_DIR "data"
#endif

// Brute-force global minimum oracle for the formula objectives: a dense grid
// over the numeric block for every categorical combination, followed by a
// local refinement of the best grid point (and of any registered hints).

namespace mixbo {

struct MinimumRecord {
    double value = std::numeric_limits<double>::infinity();
    MixedPoint argmin;
    std::string provenance;
};

namespace detail {

struct GridPlan {
    std::size_t points_per_dim;
    const char* refinement;
};

inline GridPlan grid_plan(std::size_t numeric_dims) {
    if (numeric_dims == 1) return {100001, "golden-section"};
    if (numeric_dims == 2) return {1025, "pattern search"};
    return {7, "pattern search"};
}

inline double golden_section(const std::function<double(double)>& f, double a, double b, double& xmin) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    xmin = fc < fd ? c : d;
    return std::min(fc, fd);
}

// Compass search in unit coordinates, clamped to [0,1].
inline double pattern_search(const std::function<double(const std::vector<double>&)>& f, std::vector<double>& u,
                             double step) {
    double fu = f(u);
    std::size_t evals = 0;
    while (step > 1e-13 && evals < 200000) {
        bool improved = false;
        for (std::size_t k = 0; k < u.size(); ++k)
            for (double dir : {-1.0, 1.0}) {
                auto trial = u;
                trial[k] = std::clamp(trial[k] + dir * step, 0.0, 1.0);
                if (trial[k] == u[k]) continue;
                const double ft = f(trial);
                ++evals;
                if (ft < fu) {
                    u = std::move(trial);
                    fu = ft;
                    improved = true;
                }
            }
        if (!improved) step *= 0.5;
    }
    return fu;
}

}  // namespace detail

inline MinimumRecord compute_reference_minimum(const ObjectiveSpec& spec) {
    if (spec.is_lookup()) {
        MinimumRecord r;
        for (std::size_t i = 0; i < spec.table->points.size(); ++i)
            if (spec.table->responses[i] < r.value) {
                r.value = spec.table->responses[i];
                r.argmin = spec.table->points[i];
            }
        r.provenance = "enumeration of " + std::to_string(spec.table->points.size()) + " rows";
        return r;
    }
    if (!spec.is_formula()) throw std::invalid_argument("objective has no evaluator");
    const Domain& dom = spec.domain;
    const std::size_t p = dom.num_numeric();
    const std::size_t c = dom.num_categorical();
    const auto plan = detail::grid_plan(p);

    MinimumRecord best;
    auto consider = [&](const MixedPoint& pt, double v) {
        if (v < best.value) {
            best.value = v;
            best.argmin = pt;
        }
    };

    std::vector<std::size_t> combo(c, 0);
    const std::size_t total = dom.num_combinations();
    for (std::size_t ci = 0; ci < total; ++ci) {
        MixedPoint pt;
        pt.categorical = combo;
        pt.numeric.assign(p, 0.0);
        auto eval_unit = [&](const std::vector<double>& u) {
            for (std::size_t k = 0; k < p; ++k) pt.numeric[k] = dom.from_unit(k, u[k]);
            return spec.formula(to_formula_arguments(dom, pt));
        };

        if (p == 0) {
            consider(pt, eval_unit({}));
        } else {
            const std::size_t m = plan.points_per_dim;
            const double h = 1.0 / static_cast<double>(m - 1);
            std::vector<std::size_t> idx(p, 0);
            std::vector<double> u(p), best_u(p);
            double best_v = std::numeric_limits<double>::infinity();
            std::size_t grid_total = 1;
            for (std::size_t k = 0; k < p; ++k) grid_total *= m;
            for (std::size_t g = 0; g < grid_total; ++g) {
                for (std::size_t k = 0; k < p; ++k) u[k] = static_cast<double>(idx[k]) * h;
                const double v = eval_unit(u);
                if (v < best_v) {
                    best_v = v;
                    best_u = u;
                }
                for (std::size_t k = p; k-- > 0;) {
                    if (++idx[k] < m) break;
                    idx[k] = 0;
                }
            }
            std::vector<std::vector<double>> starts{best_u};
            for (const auto& hint : spec.oracle_hints)
                if (hint.categorical == combo) {
                    std::vector<double> hu(p);
                    for (std::size_t k = 0; k < p; ++k) hu[k] = dom.to_unit(k, hint.numeric[k]);
                    starts.push_back(std::move(hu));
                }
            for (std::size_t s = 0; s < starts.size(); ++s) {
                auto start = starts[s];
                double v0 = eval_unit(start);
                auto x0 = start;
                double v;
                if (p == 1) {
                    const double a = std::max(0.0, start[0] - h), b = std::min(1.0, start[0] + h);
                    double xm = start[0];
                    v = detail::golden_section([&](double x) { return eval_unit({x}); }, a, b, xm);
                    start[0] = xm;
                } else {
                    v = detail::pattern_search(eval_unit, start, s == 0 ? h / 2 : 1e-3);
                }
                if (!(v < v0)) {
                    v = v0;
                    start = x0;
                }
                eval_unit(start);
                consider(pt, v);
            }
        }
        for (std::size_t k = c; k-- > 0;) {
            if (++combo[k] < dom.categorical(k).num_levels()) break;
            combo[k] = 0;
        }
    }
    if (p == 0)
        best.provenance = "enumeration of " + std::to_string(total) + " combinations";
    else
        best.provenance = "grid " + std::to_string(plan.points_per_dim) + "^" + std::to_string(p) + " per combination (" +
                          std::to_string(total) + ") + " + plan.refinement;
    return best;
}

inline nlohmann::json minima_to_json(const std::map<std::string, MinimumRecord>& records) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, r] : records)
        j[name] = {{"value", r.value}, {"argmin", to_json(r.argmin)}, {"provenance", r.provenance}};
    return j;
}

inline std::map<std::string, MinimumRecord> minima_from_json(const nlohmann::json& j) {
    std::map<std::string, MinimumRecord> out;
    for (const auto& [name, v] : j.items())
        out[name] = MinimumRecord{v.at("value").get<double>(), point_from_json(v.at("argmin")),
                                  v.value("provenance", std::string{})};
    return out;
}

inline std::map<std::string, MinimumRecord> load_minima(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reference minima fixtures '" + path + "'");
    return minima_from_json(nlohmann::json::parse(in));
}

inline std::string default_minima_path() { return std::string(MIXBO_DATA_DIR) + "/reference_minima.json"; }

inline void attach_reference_minimum(ObjectiveSpec& spec, const std::map<std::string, MinimumRecord>& fixtures) {
    auto it = fixtures.find(spec.name);
    if (it == fixtures.end()) return;
    spec.reference_minimum = it->second.value;
    spec.reference_argmin = it->second.argmin;
    spec.reference_provenance = it->second.provenance;
}

// Registered objective with its reference minimum loaded from the fixtures.
inline ObjectiveSpec load_objective(const std::string& name, const std::string& fixtures = default_minima_path()) {
    auto spec = make_objective(name);
    attach_reference_minimum(spec, load_minima(fixtures));
    return spec;
}

}  // namespace mixbo
