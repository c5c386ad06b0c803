#pragma once

#include <charconv>
#include <compare>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixbo {

enum class VariableKind { Numeric, Categorical };

struct Level {
    std::string label;
    std::optional<double> value;  // numeric surrogate, for formula objectives

    bool operator==(const Level&) const = default;
};

// Shortest round-trip text for a double, used for level labels and CSV cells.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

class VariableSpec {
public:
    static VariableSpec numeric(double lo, double hi, std::string name = {}) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw std::invalid_argument("numeric variable requires finite lo < hi");
        VariableSpec v;
        v.kind_ = VariableKind::Numeric;
        v.lo_ = lo;
        v.hi_ = hi;
        v.name_ = std::move(name);
        return v;
    }

    static VariableSpec categorical(std::vector<Level> levels, std::string name = {}) {
        if (levels.size() < 2)
            throw std::invalid_argument("categorical variable requires at least 2 levels");
        std::unordered_set<std::string> seen;
        for (const auto& l : levels)
            if (!seen.insert(l.label).second)
                throw std::invalid_argument("duplicate level label '" + l.label + "'");
        VariableSpec v;
        v.kind_ = VariableKind::Categorical;
        v.levels_ = std::move(levels);
        v.name_ = std::move(name);
        return v;
    }

    // Levels labelled by their numeric values, e.g. {0, 5, 10, 15}.
    static VariableSpec categorical_values(const std::vector<double>& values, std::string name = {}) {
        std::vector<Level> levels;
        levels.reserve(values.size());
        for (double x : values) levels.push_back({format_double(x), x});
        return categorical(std::move(levels), std::move(name));
    }

    static VariableSpec categorical_labels(const std::vector<std::string>& labels, std::string name = {}) {
        std::vector<Level> levels;
        levels.reserve(labels.size());
        for (const auto& s : labels) levels.push_back({s, std::nullopt});
        return categorical(std::move(levels), std::move(name));
    }

    VariableKind kind() const { return kind_; }
    bool is_numeric() const { return kind_ == VariableKind::Numeric; }
    bool is_categorical() const { return kind_ == VariableKind::Categorical; }
    const std::string& name() const { return name_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<Level>& levels() const { return levels_; }
    std::size_t num_levels() const { return levels_.size(); }

    bool operator==(const VariableSpec&) const = default;

private:
    VariableSpec() = default;

    VariableKind kind_ = VariableKind::Numeric;
    std::string name_;
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::vector<Level> levels_;
};

// A candidate design. Numeric and categorical parts are each stored in the
// order their variables appear in the domain.
struct MixedPoint {
    std::vector<double> numeric;
    std::vector<std::size_t> categorical;

    bool operator==(const MixedPoint&) const = default;
    auto operator<=>(const MixedPoint&) const = default;
};

class Domain {
public:
    Domain() = default;

    Domain(std::string name, std::vector<VariableSpec> variables)
        : name_(std::move(name)), variables_(std::move(variables)) {
        if (variables_.empty()) throw std::invalid_argument("domain requires at least one variable");
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            if (variables_[i].is_numeric())
                numeric_index_.push_back(i);
            else
                categorical_index_.push_back(i);
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<VariableSpec>& variables() const { return variables_; }
    std::size_t size() const { return variables_.size(); }

    std::size_t num_numeric() const { return numeric_index_.size(); }
    std::size_t num_categorical() const { return categorical_index_.size(); }

    // k-th numeric / categorical variable in domain order
    const VariableSpec& numeric(std::size_t k) const { return variables_[numeric_index_[k]]; }
    const VariableSpec& categorical(std::size_t k) const { return variables_[categorical_index_[k]]; }

    const std::vector<std::size_t>& numeric_positions() const { return numeric_index_; }
    const std::vector<std::size_t>& categorical_positions() const { return categorical_index_; }

    // Number of categorical level combinations; saturates at SIZE_MAX.
    std::size_t num_combinations() const {
        std::size_t total = 1;
        for (std::size_t k = 0; k < num_categorical(); ++k) {
            std::size_t j = categorical(k).num_levels();
            if (total > std::numeric_limits<std::size_t>::max() / j)
                return std::numeric_limits<std::size_t>::max();
            total *= j;
        }
        return total;
    }

    // Numeric coordinate mapped to [0, 1] by the variable bounds.
    double to_unit(std::size_t k, double x) const {
        const auto& v = numeric(k);
        return (x - v.lo()) / (v.hi() - v.lo());
    }

    double from_unit(std::size_t k, double u) const {
        const auto& v = numeric(k);
        return v.lo() + u * (v.hi() - v.lo());
    }

    bool operator==(const Domain& o) const { return name_ == o.name_ && variables_ == o.variables_; }

private:
    std::string name_;
    std::vector<VariableSpec> variables_;
    std::vector<std::size_t> numeric_index_;
    std::vector<std::size_t> categorical_index_;
};

struct Dataset {
    std::vector<MixedPoint> points;
    std::vector<double> responses;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    void add(MixedPoint p, double y) {
        if (!std::isfinite(y)) throw std::invalid_argument("dataset responses must be finite");
        points.push_back(std::move(p));
        responses.push_back(y);
    }

    void check() const {
        if (points.size() != responses.size())
            throw std::invalid_argument("dataset points and responses differ in length");
        for (double y : responses)
            if (!std::isfinite(y)) throw std::invalid_argument("dataset responses must be finite");
    }
};

// Outcome of validate_point: empty message means valid.
struct Verdict {
    std::string message;

    bool ok() const { return message.empty(); }
    explicit operator bool() const { return ok(); }
};

inline Verdict validate_point(const Domain& domain, const MixedPoint& p) {
    if (p.numeric.size() != domain.num_numeric())
        return {"arity mismatch: expected " + std::to_string(domain.num_numeric()) +
                " numeric values, got " + std::to_string(p.numeric.size())};
    if (p.categorical.size() != domain.num_categorical())
        return {"arity mismatch: expected " + std::to_string(domain.num_categorical()) +
                " categorical values, got " + std::to_string(p.categorical.size())};
    for (std::size_t k = 0; k < p.numeric.size(); ++k) {
        const auto& v = domain.numeric(k);
        double x = p.numeric[k];
        if (!std::isfinite(x)) return {"numeric value " + std::to_string(k) + " is not finite"};
        if (x < v.lo())
            return {"numeric value " + std::to_string(k) + " = " + format_double(x) +
                    " below lo=" + format_double(v.lo())};
        if (x > v.hi())
            return {"numeric value " + std::to_string(k) + " = " + format_double(x) +
                    " exceeds hi=" + format_double(v.hi())};
    }
    for (std::size_t k = 0; k < p.categorical.size(); ++k) {
        std::size_t j = domain.categorical(k).num_levels();
        if (p.categorical[k] >= j)
            return {"level index " + std::to_string(p.categorical[k]) + " >= " + std::to_string(j) +
                    " levels for categorical " + std::to_string(k)};
    }
    return {};
}

inline void require_valid(const Domain& domain, const MixedPoint& p) {
    if (auto v = validate_point(domain, p); !v) throw std::invalid_argument("invalid point: " + v.message);
}

// #numeric + sum over categoricals of (#levels - 1)
inline std::size_t degrees_of_freedom(const Domain& domain) {
    std::size_t df = domain.num_numeric();
    for (std::size_t k = 0; k < domain.num_categorical(); ++k) df += domain.categorical(k).num_levels() - 1;
    return df;
}

inline std::vector<int> one_hot_encode(const VariableSpec& spec, std::size_t level_index) {
    if (!spec.is_categorical()) throw std::invalid_argument("one_hot_encode: variable is not categorical");
    if (level_index >= spec.num_levels())
        throw std::out_of_range("one_hot_encode: level index " + std::to_string(level_index) + " out of range");
    std::vector<int> code(spec.num_levels(), 0);
    code[level_index] = 1;
    return code;
}

// Values in domain variable order, categorical levels replaced by their
// numeric surrogate values.
inline std::vector<double> to_formula_arguments(const Domain& domain, const MixedPoint& p) {
    std::vector<double> args;
    args.reserve(domain.size());
    std::size_t in = 0, ic = 0;
    for (const auto& v : domain.variables()) {
        if (v.is_numeric()) {
            args.push_back(p.numeric.at(in++));
        } else {
            const auto& level = v.levels().at(p.categorical.at(ic++));
            if (!level.value)
                throw std::invalid_argument("level '" + level.label + "' has no numeric value");
            args.push_back(*level.value);
        }
    }
    return args;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const VariableSpec& v) {
    nlohmann::json j;
    if (!v.name().empty()) j["name"] = v.name();
    if (v.is_numeric()) {
        j["kind"] = "numeric";
        j["lo"] = v.lo();
        j["hi"] = v.hi();
    } else {
        j["kind"] = "categorical";
        auto levels = nlohmann::json::array();
        for (const auto& l : v.levels()) {
            nlohmann::json lj{{"label", l.label}};
            if (l.value) lj["value"] = *l.value;
            levels.push_back(std::move(lj));
        }
        j["levels"] = std::move(levels);
    }
    return j;
}

inline VariableSpec variable_from_json(const nlohmann::json& j) {
    std::string name = j.value("name", std::string{});
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "numeric") return VariableSpec::numeric(j.at("lo").get<double>(), j.at("hi").get<double>(), name);
    if (kind == "categorical") {
        std::vector<Level> levels;
        for (const auto& lj : j.at("levels")) {
            Level l{lj.at("label").get<std::string>(), std::nullopt};
            if (lj.contains("value") && !lj["value"].is_null()) l.value = lj["value"].get<double>();
            levels.push_back(std::move(l));
        }
        return VariableSpec::categorical(std::move(levels), name);
    }
    throw std::invalid_argument("unknown variable kind '" + kind + "'");
}

inline nlohmann::json to_json(const Domain& d) {
    nlohmann::json j;
    j["name"] = d.name();
    auto vars = nlohmann::json::array();
    for (const auto& v : d.variables()) vars.push_back(to_json(v));
    j["variables"] = std::move(vars);
    return j;
}

inline Domain domain_from_json(const nlohmann::json& j) {
    std::vector<VariableSpec> vars;
    for (const auto& vj : j.at("variables")) vars.push_back(variable_from_json(vj));
    return Domain(j.value("name", std::string{}), std::move(vars));
}

inline nlohmann::json to_json(const MixedPoint& p) {
    return nlohmann::json{{"x", p.numeric}, {"t", p.categorical}};
}

inline MixedPoint point_from_json(const nlohmann::json& j) {
    return MixedPoint{j.at("x").get<std::vector<double>>(), j.at("t").get<std::vector<std::size_t>>()};
}

}  // namespace mixbo
