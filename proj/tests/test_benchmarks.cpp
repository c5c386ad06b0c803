#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mixbo/benchmarks.hpp"

using namespace mixbo;

namespace {

MixedPoint hint(const std::string& name, const std::vector<double>& args) {
    return detail::hint_for(make_objective(name).domain, args);
}

ObjectiveSpec toy(bool negate) {
    std::istringstream in("a,b,y\nx,p,3.5\nx,q,-1\nz,p,7\nz,q,2\n");
    return load_lookup(in, "y", negate);
}

}  // namespace

TEST(Formulas, KnownZeros) {
    EXPECT_EQ(evaluate(make_objective("quad10"), hint("quad10", std::vector<double>(10, 0.0))), 0.0);
    EXPECT_EQ(evaluate(make_objective("rosenbrock10"), hint("rosenbrock10", std::vector<double>(10, 1.0))), 0.0);
    EXPECT_NEAR(evaluate(make_objective("perm6"), hint("perm6", {1, 2, 3, 4, 5, 6})), 0.0, 1e-12);
    EXPECT_NEAR(evaluate(make_objective("perm10"), hint("perm10", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10})), 0.0, 1e-6);
    EXPECT_EQ(evaluate(make_objective("rastrigin3d"), hint("rastrigin3d", {0, 0, 0})), 0.0);
    EXPECT_NEAR(evaluate(make_objective("ackley3d"), hint("ackley3d", {0, 0, 0})), 0.0, 1e-14);
}

TEST(Formulas, CamelNearGlobalMinimum) {
    EXPECT_NEAR(evaluate(make_objective("camel"), MixedPoint{{0.0898}, {1}}), -1.0316, 1e-4);
}

TEST(Formulas, HandComputedValues) {
    using std::numbers::pi;
    // Branin at x=pi, t=5: a = 5 - 5.1/4 + 5 - 6, cos(pi) = -1.
    const double a = 5.0 - 5.1 / 4.0 + 5.0 - 6.0;
    EXPECT_NEAR(evaluate(make_objective("branin"), MixedPoint{{pi}, {1}}), a * a - 10.0 * (1.0 - 1.0 / (8.0 * pi)) + 10.0,
                1e-12);
    // McCormick at (0, t=0): sin 0 + 0 - 0 + 0 + 1.
    EXPECT_NEAR(evaluate(make_objective("mccormick"), MixedPoint{{0.0}, {3}}), 1.0, 1e-15);
    // Rosenbrock with a single unit deviation in the last coordinate.
    std::vector<double> r(10, 1.0);
    r[9] = 5.0;
    EXPECT_NEAR(evaluate(make_objective("rosenbrock10"), hint("rosenbrock10", r)), 100.0 * 16.0, 1e-9);
    // Shubert at (0,0) is (sum i cos i)^2.
    double s = 0.0;
    for (int i = 1; i <= 5; ++i) s += i * std::cos(i);
    EXPECT_NEAR(evaluate(make_objective("shubert"), MixedPoint{{0.0}, {10}}), s * s, 1e-12);
    // Cross-in-tray on an axis: sin(0) kills the product.
    EXPECT_NEAR(evaluate(make_objective("crossintray"), MixedPoint{{0.0}, {10}}), -1e-4, 1e-18);
    EXPECT_NEAR(evaluate(make_objective("holder"), MixedPoint{{0.0}, {3}}), 0.0, 1e-15);
}

TEST(Formulas, PermAgainstDirectPowers) {
    // Direct evaluation with std::pow as an independent check.
    const std::vector<double> v{0.3, -1.2, 2.5, 4.0, -5.5, 6.0};
    double expect = 0.0;
    for (int i = 1; i <= 6; ++i) {
        double inner = 0.0;
        for (int j = 1; j <= 6; ++j) inner += (std::pow(j, i) + 0.5) * (std::pow(v[j - 1] / j, i) - 1.0);
        expect += inner * inner;
    }
    EXPECT_NEAR(functions::perm(v), expect, 1e-9 * expect);
}

TEST(Formulas, PureAndDeterministic) {
    for (const auto& name : objective_names()) {
        const auto spec = make_objective(name);
        MixedPoint p;
        for (std::size_t k = 0; k < spec.domain.num_numeric(); ++k)
            p.numeric.push_back(spec.domain.from_unit(k, 0.37 + 0.05 * static_cast<double>(k)));
        for (std::size_t k = 0; k < spec.domain.num_categorical(); ++k)
            p.categorical.push_back(spec.domain.categorical(k).num_levels() / 2);
        const double a = evaluate(spec, p);
        EXPECT_TRUE(std::isfinite(a)) << name;
        EXPECT_EQ(a, evaluate(make_objective(name), p)) << name;
    }
}

TEST(Formulas, InvalidPointRejected) {
    EXPECT_THROW(evaluate(make_objective("branin"), MixedPoint{{20.0}, {0}}), std::invalid_argument);
    EXPECT_THROW(evaluate(make_objective("branin"), MixedPoint{{0.0}, {9}}), std::invalid_argument);
}

TEST(Registry, UnknownNameListsRegisteredObjectives) {
    try {
        make_objective("nope");
        FAIL() << "expected UnknownObjective";
    } catch (const UnknownObjective& e) {
        const std::string msg = e.what();
        for (const auto& n : objective_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
    }
}

TEST(Registry, ReferenceMinimumRequiresOracle) {
    EXPECT_THROW(reference_minimum(make_objective("branin")), std::runtime_error);
}

TEST(Registry, ProtocolDefaults) {
    EXPECT_EQ(make_objective("branin").default_initial, 10u);
    EXPECT_EQ(make_objective("rastrigin3d").default_initial, 30u);
    EXPECT_EQ(make_objective("rastrigin3d").default_iterations, 100u);
    EXPECT_EQ(make_objective("perm6").default_initial, 20u);
    EXPECT_EQ(make_objective("perm10").default_initial, 50u);
    EXPECT_EQ(make_objective("holder").default_initial, 21u);
    EXPECT_EQ(make_objective("ackley3d").default_initial, 65u);
    for (const auto& name : objective_names())
        EXPECT_GE(make_objective(name).default_initial, make_objective(name).domain.categorical(0).num_levels()) << name;
}

TEST(Registry, SuitesCoverEveryObjectiveOnce) {
    std::multiset<std::string> seen;
    for (const auto& [suite, names] : suites())
        for (const auto& n : names) seen.insert(n);
    for (const auto& n : objective_names()) EXPECT_EQ(seen.count(n), 1u) << n;
    EXPECT_EQ(seen.size(), objective_names().size());
}

TEST(Lookup, MinimumIsSmallestResponse) {
    const auto s = toy(false);
    EXPECT_TRUE(s.is_lookup());
    EXPECT_EQ(reference_minimum(s), -1.0);
    EXPECT_EQ(s.table->points.size(), 4u);
    EXPECT_EQ(s.domain.num_categorical(), 2u);
    EXPECT_EQ(s.domain.categorical(0).levels()[1].label, "z");
}

TEST(Lookup, NegationFlipsSign) {
    const auto s = toy(true);
    EXPECT_EQ(reference_minimum(s), -7.0);
    EXPECT_EQ(evaluate(s, MixedPoint{{}, {1, 0}}), -7.0);
}

TEST(Lookup, AbsentCombinationIsNotInDataset) {
    std::istringstream in("a,b,y\nx,p,1\nz,q,2\n");
    const auto s = load_lookup(in, "y", false);
    try {
        evaluate(s, MixedPoint{{}, {0, 1}});
        FAIL();
    } catch (const std::out_of_range& e) {
        EXPECT_NE(std::string(e.what()).find("not in dataset"), std::string::npos);
    }
}

TEST(Lookup, RejectsMalformedTables) {
    auto load = [](const std::string& text, const std::string& resp = "y", std::vector<std::string> inputs = {}) {
        std::istringstream in(text);
        return load_lookup(in, resp, false, inputs);
    };
    EXPECT_THROW(load("a,b,y\nx,p,1\nz,q,2\n", "E"), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\nx,p,1\nx,p,2\nz,q,2\n"), std::invalid_argument);
    EXPECT_NO_THROW(load("a,b,y\nx,p,1\nx,p,1\nz,q,2\n"));
    EXPECT_THROW(load("a,b,y\nx,p,1\nz,\"q,r\",2\n"), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\nx,p\nz,q,2\n"), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\nx,p,one\nz,q,2\n"), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\n"), std::invalid_argument);
    EXPECT_THROW(load(""), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\nx,p,1\nz,q,2\n", "y", {"a", "c"}), std::invalid_argument);
    EXPECT_THROW(load("a,b,y\nx,p,1\nz,q,2\n", "y", {"a", "y"}), std::invalid_argument);
}

TEST(Lookup, InputColumnSubset) {
    std::istringstream in("a,b,y,w\nx,p,1,9\nz,q,2,8\nx,q,0,7\n");
    const auto s = load_lookup(in, "y", false, {"b", "a"});
    ASSERT_EQ(s.domain.num_categorical(), 2u);
    EXPECT_EQ(s.domain.categorical(0).name(), "b");
    EXPECT_EQ(evaluate(s, MixedPoint{{}, {1, 0}}), 0.0);
}

TEST(Lookup, BundledSyntheticTablesHaveExpectedShapes) {
    const auto m2ax = load_lookup(std::string(MIXBO_DATA_DIR) + "/m2ax_synthetic.csv", "B", true, {"M", "A", "X"});
    EXPECT_EQ(m2ax.domain.num_combinations(), 10u * 12u * 2u);
    EXPECT_EQ(m2ax.table->points.size(), 223u);
    const auto spinel = load_lookup(std::string(MIXBO_DATA_DIR) + "/spinel_synthetic.csv", "Eg", true,
                                    {"A", "Ma", "Mb", "X"});
    EXPECT_EQ(spinel.domain.num_combinations(), 3u * 6u * 5u * 3u);
    EXPECT_EQ(spinel.table->points.size(), 270u);
    EXPECT_EQ(std::count(spinel.table->responses.begin(), spinel.table->responses.end(), 0.0), 56);
}
