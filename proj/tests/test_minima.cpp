#include <cmath>

#include <gtest/gtest.h>

#include "mixbo/benchmarks.hpp"
#include "mixbo/minima.hpp"

using namespace mixbo;

namespace {

const std::map<std::string, MinimumRecord>& fixtures() {
    static const auto f = load_minima(default_minima_path());
    return f;
}

}  // namespace

TEST(ReferenceMinima, FixturesCoverRegistry) {
    for (const auto& name : objective_names()) {
        ASSERT_TRUE(fixtures().count(name)) << name;
        EXPECT_FALSE(fixtures().at(name).provenance.empty()) << name;
    }
}

TEST(ReferenceMinima, ArgminReproducesValue) {
    for (const auto& name : objective_names()) {
        const auto spec = load_objective(name);
        ASSERT_TRUE(spec.reference_argmin);
        EXPECT_NEAR(evaluate(spec, *spec.reference_argmin), reference_minimum(spec), 1e-9) << name;
    }
}

TEST(ReferenceMinima, TrivialMinimaAreZero) {
    for (const auto* name : {"quad10", "rosenbrock10", "perm6", "perm10", "rastrigin3d", "ackley3d"})
        EXPECT_NEAR(fixtures().at(name).value, 0.0, 1e-9) << name;
}

TEST(ReferenceMinima, OracleMatchesFixturesOnOneDimensionalObjectives) {
    for (const auto* name : {"branin", "mccormick", "camel", "holder", "crossintray", "shubert"}) {
        const auto r = compute_reference_minimum(make_objective(name));
        EXPECT_NEAR(r.value, fixtures().at(name).value, 1e-9) << name;
    }
}

TEST(ReferenceMinima, CamelMatchesKnownMinimum) {
    // The continuous optimum is -1.0316284535 at t = -0.71265...; the rounded level sits slightly above it.
    const double v = fixtures().at("camel").value;
    EXPECT_GT(v, -1.0316284535);
    EXPECT_LT(v, -1.0316284535 + 1e-7);
}

TEST(ReferenceMinima, NoGridPointBeatsStoredValue) {
    // Coarse independent scan per level for the single-x objectives.
    for (const auto* name : {"branin", "mccormick", "camel", "holder", "crossintray", "shubert"}) {
        const auto spec = make_objective(name);
        const double ref = fixtures().at(name).value;
        for (std::size_t t = 0; t < spec.domain.categorical(0).num_levels(); ++t)
            for (int i = 0; i <= 20000; ++i) {
                const MixedPoint p{{spec.domain.from_unit(0, i / 20000.0)}, {t}};
                EXPECT_GE(evaluate(spec, p), ref - 1e-9) << name;
            }
    }
}

TEST(ReferenceMinima, MissingFixtureFileIsReported) {
    EXPECT_THROW(load_minima("/nonexistent/minima.json"), std::runtime_error);
}
