#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixbo/core.hpp"

namespace mixbo {

// Finite, all-categorical objective read from a table.
struct LookupTable {
    std::vector<MixedPoint> points;
    std::vector<double> responses;
    std::map<std::vector<std::size_t>, double> index;
    std::string source;
};

struct ObjectiveSpec {
    std::string name;
    Domain domain;
    std::function<double(const std::vector<double>&)> formula;  // over to_formula_arguments
    std::shared_ptr<const LookupTable> table;

    std::optional<double> reference_minimum;
    std::optional<MixedPoint> reference_argmin;
    std::string reference_provenance;

    // Protocol defaults used by the experiment suites.
    std::size_t default_initial = 10;
    std::size_t default_iterations = 50;
    std::size_t default_replicates = 30;

    // Known minimizers, used as extra starting points by the minimum oracle.
    std::vector<MixedPoint> oracle_hints;

    bool is_formula() const { return static_cast<bool>(formula); }
    bool is_lookup() const { return static_cast<bool>(table); }
};

class UnknownObjective : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline double evaluate(const ObjectiveSpec& spec, const MixedPoint& p) {
    require_valid(spec.domain, p);
    if (spec.is_formula()) return spec.formula(to_formula_arguments(spec.domain, p));
    if (spec.is_lookup()) {
        auto it = spec.table->index.find(p.categorical);
        if (it == spec.table->index.end()) throw std::out_of_range("point not in dataset");
        return it->second;
    }
    throw std::logic_error("objective '" + spec.name + "' has no evaluator");
}

inline double reference_minimum(const ObjectiveSpec& spec) {
    if (!spec.reference_minimum)
        throw std::runtime_error("reference minimum of '" + spec.name + "' not available: oracle not yet run");
    return *spec.reference_minimum;
}

namespace functions {

inline double branin(double x, double t) {
    using std::numbers::pi;
    const double a = t - 5.1 / (4.0 * pi * pi) * x * x + 5.0 / pi * x - 6.0;
    return a * a + 10.0 * (1.0 - 1.0 / (8.0 * pi)) * std::cos(x) + 10.0;
}

inline double mccormick(double x, double t) { return std::sin(x + t) + (x - t) * (x - t) - 1.5 * x + 2.5 * t + 1.0; }

inline double camel(double x, double t) {
    const double x2 = x * x;
    return (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * t + (-4.0 + 4.0 * t * t) * t * t;
}

inline double rastrigin(const std::vector<double>& v) {
    double s = 10.0 * static_cast<double>(v.size());
    for (double x : v) s += x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x);
    return s;
}

inline double perm(const std::vector<double>& v, double beta = 0.5) {
    const std::size_t d = v.size();
    // jp[j] = (j+1)^i and rp[j] = (v_j/(j+1))^i, advanced one power per outer step.
    std::vector<double> jp(d, 1.0), rp(d, 1.0);
    double outer = 0.0;
    for (std::size_t i = 1; i <= d; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double jd = static_cast<double>(j + 1);
            jp[j] *= jd;
            rp[j] *= v[j] / jd;
            inner += (jp[j] + beta) * (rp[j] - 1.0);
        }
        outer += inner * inner;
    }
    return outer;
}

inline double rosenbrock(const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double a = v[i + 1] - v[i] * v[i];
        const double b = v[i] - 1.0;
        s += 100.0 * a * a + b * b;
    }
    return s;
}

inline double quadratic(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double holder_table(double x, double t) {
    return -std::abs(std::sin(x) * std::cos(t) * std::exp(std::abs(1.0 - std::sqrt(x * x + t * t) / std::numbers::pi)));
}

inline double ackley(const std::vector<double>& v, double b = 0.2, double c = 2.0 * std::numbers::pi) {
    const double d = static_cast<double>(v.size());
    double sq = 0.0, cs = 0.0;
    for (double x : v) {
        sq += x * x;
        cs += std::cos(c * x);
    }
    return -20.0 * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 + std::numbers::e;
}

inline double cross_in_tray(double x, double t) {
    const double r = std::sqrt(x * x + t * t) / std::numbers::pi;
    const double inner = std::abs(std::sin(x) * std::sin(t) * std::exp(std::abs(100.0 - r))) + 1.0;
    return -0.0001 * std::pow(inner, 0.1);
}

inline double shubert(double x, double t) {
    double a = 0.0, b = 0.0;
    for (int i = 1; i <= 5; ++i) {
        a += i * std::cos((i + 1) * x + i);
        b += i * std::cos((i + 1) * t + i);
    }
    return a * b;
}

}  // namespace functions

namespace detail {

inline std::vector<double> integer_range(int lo, int hi) {
    std::vector<double> v;
    for (int i = lo; i <= hi; ++i) v.push_back(static_cast<double>(i));
    return v;
}

inline std::vector<VariableSpec> numeric_block(std::size_t count, double lo, double hi) {
    std::vector<VariableSpec> v;
    for (std::size_t i = 0; i < count; ++i) v.push_back(VariableSpec::numeric(lo, hi, "x" + std::to_string(i + 1)));
    return v;
}

inline ObjectiveSpec make_formula(std::string name, std::vector<VariableSpec> vars,
                                  std::function<double(const std::vector<double>&)> f, std::size_t initial,
                                  std::size_t iterations, std::size_t replicates) {
    ObjectiveSpec s;
    s.domain = Domain(name, std::move(vars));
    s.name = std::move(name);
    s.formula = std::move(f);
    s.default_initial = initial;
    s.default_iterations = iterations;
    s.default_replicates = replicates;
    return s;
}

// One numeric x plus one categorical t.
inline ObjectiveSpec make_xt(std::string name, double lo, double hi, const std::vector<double>& levels,
                             double (*f)(double, double), std::size_t initial, std::size_t replicates) {
    return make_formula(std::move(name),
                        {VariableSpec::numeric(lo, hi, "x"), VariableSpec::categorical_values(levels, "t")},
                        [f](const std::vector<double>& a) { return f(a[0], a[1]); }, initial, 50, replicates);
}

inline MixedPoint hint_for(const Domain& domain, const std::vector<double>& args) {
    // Inverse of to_formula_arguments for points whose categorical arguments are level values.
    MixedPoint p;
    std::size_t pos = 0, ic = 0;
    for (const auto& v : domain.variables()) {
        if (v.is_numeric()) {
            p.numeric.push_back(args[pos]);
        } else {
            const auto& lv = v.levels();
            auto it = std::find_if(lv.begin(), lv.end(), [&](const Level& l) { return l.value && *l.value == args[pos]; });
            if (it == lv.end()) throw std::logic_error("hint value is not a level");
            p.categorical.push_back(static_cast<std::size_t>(it - lv.begin()));
            ++ic;
        }
        ++pos;
    }
    return p;
}

}  // namespace detail

inline std::vector<std::string> objective_names() {
    return {"branin",     "mccormick", "camel", "rastrigin3d", "perm6",       "perm10",
            "rosenbrock10", "quad10",  "holder", "ackley3d",   "crossintray", "shubert"};
}

inline ObjectiveSpec make_objective(const std::string& name) {
    using detail::integer_range;
    using detail::numeric_block;
    if (name == "branin") return detail::make_xt(name, -5.0, 10.0, {0, 5, 10, 15}, functions::branin, 10, 30);
    if (name == "mccormick") return detail::make_xt(name, -1.5, 4.0, integer_range(-3, 4), functions::mccormick, 10, 30);
    if (name == "camel")
        return detail::make_xt(name, -2.0, 2.0, {-1.0, -0.7126, 0.0, 0.7126, 1.0}, functions::camel, 10, 30);
    if (name == "rastrigin3d") {
        auto vars = numeric_block(2, -5.12, 5.12);
        vars.push_back(VariableSpec::categorical_values(integer_range(-5, 5), "t"));
        auto s = detail::make_formula(name, std::move(vars), functions::rastrigin, 30, 100, 10);
        s.oracle_hints.push_back(detail::hint_for(s.domain, {0, 0, 0}));
        return s;
    }
    if (name == "perm6") {
        auto vars = numeric_block(5, -6.0, 6.0);
        vars.push_back(VariableSpec::categorical_values({-4, 1, 6}, "t1"));
        auto s = detail::make_formula(name, std::move(vars), [](const std::vector<double>& a) { return functions::perm(a); },
                                      20, 50, 10);
        s.oracle_hints.push_back(detail::hint_for(s.domain, {1, 2, 3, 4, 5, 6}));
        return s;
    }
    if (name == "perm10") {
        auto vars = numeric_block(5, -10.0, 10.0);
        vars.push_back(VariableSpec::categorical_values({-4, 1, 6}, "t1"));
        vars.push_back(VariableSpec::categorical_values({-8, -3, 2, 7}, "t2"));
        vars.push_back(VariableSpec::categorical_values({-6, 1, 8}, "t3"));
        vars.push_back(VariableSpec::categorical_values({-9, -3, 3, 9}, "t4"));
        vars.push_back(VariableSpec::categorical_values({-10, -5, 0, 5, 10}, "t5"));
        auto s = detail::make_formula(name, std::move(vars), [](const std::vector<double>& a) { return functions::perm(a); },
                                      50, 50, 10);
        s.oracle_hints.push_back(detail::hint_for(s.domain, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
        return s;
    }
    if (name == "rosenbrock10") {
        auto vars = numeric_block(5, -5.0, 10.0);
        vars.push_back(VariableSpec::categorical_values({-4, 1, 6}, "t1"));
        vars.push_back(VariableSpec::categorical_values({-3, 1, 5, 9}, "t2"));
        vars.push_back(VariableSpec::categorical_values({-5, 1, 7}, "t3"));
        vars.push_back(VariableSpec::categorical_values({-2, 1, 4, 7}, "t4"));
        vars.push_back(VariableSpec::categorical_values({-3, -1, 1, 3, 5}, "t5"));
        auto s = detail::make_formula(name, std::move(vars), functions::rosenbrock, 50, 50, 10);
        s.oracle_hints.push_back(detail::hint_for(s.domain, std::vector<double>(10, 1.0)));
        return s;
    }
    if (name == "quad10") {
        auto vars = numeric_block(5, -2.0, 2.0);
        for (int i = 1; i <= 5; ++i)
            vars.push_back(VariableSpec::categorical_values({-2, -1, 0, 1, 2}, "t" + std::to_string(i)));
        auto s = detail::make_formula(name, std::move(vars), functions::quadratic, 50, 50, 10);
        s.oracle_hints.push_back(detail::hint_for(s.domain, std::vector<double>(10, 0.0)));
        return s;
    }
    if (name == "holder")
        return detail::make_xt(name, -10.0, 10.0, integer_range(-10, 10), functions::holder_table, 21, 10);
    if (name == "ackley3d") {
        auto vars = numeric_block(2, -32.768, 32.768);
        vars.push_back(VariableSpec::categorical_values(integer_range(-32, 32), "t"));
        auto s = detail::make_formula(name, std::move(vars), [](const std::vector<double>& a) { return functions::ackley(a); },
                                      65, 50, 5);
        s.oracle_hints.push_back(detail::hint_for(s.domain, {0, 0, 0}));
        return s;
    }
    if (name == "crossintray")
        return detail::make_xt(name, -10.0, 10.0, integer_range(-10, 10), functions::cross_in_tray, 21, 10);
    if (name == "shubert") return detail::make_xt(name, -10.0, 10.0, integer_range(-10, 10), functions::shubert, 21, 10);

    std::string msg = "unknown objective '" + name + "'; registered objectives:";
    for (const auto& n : objective_names()) msg += " " + n;
    throw UnknownObjective(msg);
}

// Experiment suites: objective names per section of the benchmark study.
inline const std::map<std::string, std::vector<std::string>>& suites() {
    static const std::map<std::string, std::vector<std::string>> s{
        {"low-simple", {"branin", "mccormick"}},
        {"low-complex", {"camel", "rastrigin3d"}},
        {"high-dim", {"perm6", "perm10", "rosenbrock10", "quad10"}},
        {"supplementary", {"holder", "ackley3d", "crossintray", "shubert"}},
    };
    return s;
}

// ---- lookup tables ----------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    if (line.find('"') != std::string::npos)
        throw std::invalid_argument("line " + std::to_string(line_no) + ": quoted values are not supported");
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace detail

// Every column other than the response is a categorical input unless
// `input_columns` names a subset.
inline ObjectiveSpec load_lookup(std::istream& in, const std::string& response_column, bool negate,
                                 const std::vector<std::string>& input_columns = {},
                                 const std::string& source = "<stream>") {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(source + ": empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = detail::split_csv_line(line, 1);
    for (auto& h : header) h = detail::trim(h);
    auto resp_it = std::find(header.begin(), header.end(), response_column);
    if (resp_it == header.end()) throw std::invalid_argument(source + ": missing column '" + response_column + "'");
    const auto resp_col = static_cast<std::size_t>(resp_it - header.begin());
    std::vector<std::size_t> input_cols;
    if (input_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (c != resp_col) input_cols.push_back(c);
    } else {
        for (const auto& name : input_columns) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw std::invalid_argument(source + ": missing column '" + name + "'");
            if (it == resp_it) throw std::invalid_argument(source + ": column '" + name + "' is the response");
            input_cols.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }

    std::vector<std::vector<std::string>> labels;
    std::vector<double> ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line, line_no);
        if (cells.size() != header.size())
            throw std::invalid_argument(source + ": line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        std::vector<std::string> row;
        for (auto c : input_cols) row.push_back(detail::trim(cells[c]));
        double y;
        try {
            std::size_t used = 0;
            const auto cell = detail::trim(cells[resp_col]);
            y = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument(source + ": line " + std::to_string(line_no) + ": response '" + cells[resp_col] +
                                        "' is not a number");
        }
        if (!std::isfinite(y))
            throw std::invalid_argument(source + ": line " + std::to_string(line_no) + ": response is not finite");
        labels.push_back(std::move(row));
        ys.push_back(negate ? -y : y);
    }
    if (labels.empty()) throw std::invalid_argument(source + ": no data rows");

    // Levels in order of first appearance.
    std::vector<std::string> names;
    for (auto c : input_cols) names.push_back(header[c]);
    std::vector<std::vector<std::string>> levels(names.size());
    std::vector<std::map<std::string, std::size_t>> level_index(names.size());
    for (const auto& row : labels)
        for (std::size_t k = 0; k < row.size(); ++k)
            if (level_index[k].emplace(row[k], levels[k].size()).second) levels[k].push_back(row[k]);

    std::vector<VariableSpec> vars;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (levels[k].size() < 2)
            throw std::invalid_argument(source + ": column '" + names[k] + "' has fewer than 2 distinct levels");
        vars.push_back(VariableSpec::categorical_labels(levels[k], names[k]));
    }

    auto table = std::make_shared<LookupTable>();
    table->source = source;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        MixedPoint p;
        for (std::size_t k = 0; k < names.size(); ++k) p.categorical.push_back(level_index[k].at(labels[r][k]));
        auto [it, inserted] = table->index.emplace(p.categorical, ys[r]);
        if (!inserted) {
            if (it->second != ys[r])
                throw std::invalid_argument(source + ": duplicate rows with conflicting responses at line " +
                                            std::to_string(r + 2));
            continue;
        }
        table->points.push_back(std::move(p));
        table->responses.push_back(ys[r]);
    }

    ObjectiveSpec s;
    s.name = response_column;
    s.domain = Domain(response_column, std::move(vars));
    const auto best = std::min_element(table->responses.begin(), table->responses.end());
    s.reference_minimum = *best;
    s.reference_argmin = table->points[static_cast<std::size_t>(best - table->responses.begin())];
    s.reference_provenance = "enumeration";
    s.table = std::move(table);
    return s;
}

inline ObjectiveSpec load_lookup(const std::string& path, const std::string& response_column, bool negate,
                                 const std::vector<std::string>& input_columns = {}) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open lookup table '" + path + "'");
    return load_lookup(in, response_column, negate, input_columns, path);
}

}  // namespace mixbo
