#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "mixbo/benchmarks.hpp"
#include "mixbo/results.hpp"
#include "mixbo/runner.hpp"

using namespace mixbo;

namespace {

ObjectiveSpec four_rows() {
    std::istringstream in("a,b,y\nx,p,3.5\nx,q,-1\nz,p,7\nz,q,2\n");
    return load_lookup(in, "y", false);
}

BoConfig quick(SurrogateKind kind, std::size_t n_initial, std::size_t iters, std::uint64_t seed) {
    BoConfig c;
    c.surrogate = kind;
    c.n_initial = n_initial;
    c.max_iterations = iters;
    c.seed = seed;
    c.acquisition.sobol_candidates = 128;
    c.lvgp.n_starts = 3;
    return c;
}

ObjectiveSpec linear_1d() {
    ObjectiveSpec s;
    s.name = "linear";
    s.domain = Domain("linear", {VariableSpec::numeric(0, 4, "x")});
    s.formula = [](const std::vector<double>& a) { return 3.0 * a[0] - 2.0; };
    return s;
}

History history_with(const std::vector<std::vector<double>>& responses_by_iteration) {
    History h;
    double best = INFINITY;
    for (std::size_t it = 0; it < responses_by_iteration.size(); ++it)
        for (double y : responses_by_iteration[it]) {
            best = std::min(best, y);
            IterationRecord r;
            r.iteration = it;
            r.response = y;
            r.best_so_far = best;
            r.initial = it == 0;
            h.records.push_back(r);
        }
    return h;
}

}  // namespace

TEST(Aggregate, MedianAndScaledMadExamples) {
    auto [m1, d1] = aggregate_median_mad({1, 2, 3, 4, 100});
    EXPECT_EQ(m1, 3.0);
    EXPECT_NEAR(d1, 1.0 / 0.6745, 1e-15);
    EXPECT_NEAR(d1, 1.4826, 1e-4);
    auto [m2, d2] = aggregate_median_mad({3, 1});
    EXPECT_EQ(m2, 2.0);
    EXPECT_NEAR(d2, 1.4826, 1e-4);
    auto [m3, d3] = aggregate_median_mad({2.5, 2.5, 2.5});
    EXPECT_EQ(m3, 2.5);
    EXPECT_EQ(d3, 0.0);
    EXPECT_THROW(aggregate_median_mad({}), std::invalid_argument);
}

TEST(Aggregate, SingleHistoryHasZeroMad) {
    const auto h = history_with({{5, 3}, {4}, {1}});
    const auto c = aggregate({h});
    EXPECT_EQ(c.median, (std::vector<double>{3, 3, 1}));
    EXPECT_EQ(c.mad, (std::vector<double>{0, 0, 0}));
}

TEST(Aggregate, TruncatesToShortestHistory) {
    const auto c = aggregate({history_with({{5}, {4}, {1}}), history_with({{6}, {2}})});
    ASSERT_EQ(c.median.size(), 2u);
    EXPECT_EQ(c.median[1], 3.0);
    EXPECT_TRUE(aggregate({}).median.empty());
}

TEST(Aggregate, ThresholdCrossing) {
    AggregateCurve c{{5.0, 2.0, 1.005, 1.0}, {0, 0, 0, 0}};
    EXPECT_EQ(iterations_to_threshold(c, 1.0, 1e-2), 2u);
    EXPECT_FALSE(iterations_to_threshold(c, 0.0, 1e-2));
}

TEST(Rrmse, Examples) {
    const std::vector<double> y{1, 2, 3, 4, 5};
    EXPECT_EQ(rrmse(y, y), 0.0);
    EXPECT_NEAR(rrmse(std::vector<double>(5, 3.0), y), 1.0, 1e-15);
    // Residuals scaled to half the deviation from the mean: R^2 = 0.75.
    std::vector<double> pred;
    for (double v : y) pred.push_back(v + 0.5 * (v - 3.0));
    const double r = rrmse(pred, y);
    EXPECT_NEAR(r, 0.5, 1e-15);
    EXPECT_NEAR(1.0 - r * r, 0.75, 1e-15);
}

TEST(Rrmse, Errors) {
    try {
        rrmse({1, 2}, {4, 4});
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("undefined RRMSE"), std::string::npos);
    }
    EXPECT_THROW(rrmse({1}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(rrmse({}, {}), std::invalid_argument);
}

TEST(BoConfig, Validation) {
    const auto branin = make_objective("branin");
    BoConfig c;
    c.n_initial = 3;
    EXPECT_THROW(c.validate(branin), std::invalid_argument);
    c.n_initial = 4;
    EXPECT_NO_THROW(c.validate(branin));
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(branin), std::invalid_argument);
    c = BoConfig{};
    c.n_initial = 5;
    EXPECT_THROW(c.validate(four_rows()), std::invalid_argument);
    EXPECT_EQ(parse_surrogate("forest"), SurrogateKind::Forest);
    EXPECT_THROW(parse_surrogate("svm"), std::invalid_argument);
}

TEST(RunBo, LookupIsExhausted) {
    for (auto kind : {SurrogateKind::Lvgp, SurrogateKind::Forest}) {
        const auto spec = four_rows();
        const auto h = run_bo(spec, quick(kind, 2, 2, 3));
        ASSERT_FALSE(h.failure) << *h.failure;
        ASSERT_EQ(h.records.size(), 4u);
        std::set<MixedPoint> seen;
        for (const auto& r : h.records) seen.insert(r.point);
        EXPECT_EQ(seen.size(), 4u);
        EXPECT_EQ(h.records.back().best_so_far, -1.0);
    }
}

TEST(RunBo, LookupStopsWhenRowsRunOut) {
    const auto h = run_bo(four_rows(), quick(SurrogateKind::Forest, 2, 10, 1));
    EXPECT_EQ(h.records.size(), 4u);
    EXPECT_EQ(h.iterations_completed(), 2u);
    EXPECT_FALSE(h.failure);
}

TEST(RunBo, RecordLayoutAndMonotoneBest) {
    const auto spec = make_objective("mccormick");
    const auto h = run_bo(spec, quick(SurrogateKind::Forest, 8, 6, 11));
    ASSERT_EQ(h.records.size(), 14u);
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        const auto& r = h.records[i];
        EXPECT_EQ(r.initial, i < 8);
        EXPECT_EQ(r.iteration, i < 8 ? 0 : i - 7);
        if (i > 0) {
            EXPECT_LE(r.best_so_far, h.records[i - 1].best_so_far);
        }
        double m = INFINITY;
        for (std::size_t j = 0; j <= i; ++j) m = std::min(m, h.records[j].response);
        EXPECT_EQ(r.best_so_far, m);
        EXPECT_EQ(evaluate(spec, r.point), r.response);
    }
    EXPECT_EQ(h.best_curve().size(), 7u);
}

TEST(RunBo, QuadraticTenDimensionalIsBitIdenticalOnRerun) {
    const auto spec = make_objective("quad10");
    BoConfig c = quick(SurrogateKind::Lvgp, 50, 10, 42);
    const auto a = run_bo(spec, c);
    const auto b = run_bo(spec, c);
    ASSERT_FALSE(a.failure);
    EXPECT_EQ(history_csv(a), history_csv(b));
    EXPECT_EQ(a.records.size(), 60u);
}

TEST(RunBo, SeedChangesTheRun) {
    const auto spec = make_objective("branin");
    EXPECT_NE(history_csv(run_bo(spec, quick(SurrogateKind::Forest, 8, 2, 1))),
              history_csv(run_bo(spec, quick(SurrogateKind::Forest, 8, 2, 2))));
}

TEST(RunReplicates, SurrogatesShareInitialDesigns) {
    const auto spec = make_objective("branin");
    const auto lv = run_replicates(spec, quick(SurrogateKind::Lvgp, 8, 2, 0), 3, 100);
    const auto rf = run_replicates(spec, quick(SurrogateKind::Forest, 8, 2, 0), 3, 100);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(lv.histories[i].config.seed, 100 + i);
        for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(lv.histories[i].records[j].point, rf.histories[i].records[j].point);
    }
    EXPECT_NE(lv.histories[0].records[0].point, lv.histories[1].records[0].point);
    EXPECT_EQ(lv.aggregate.median.size(), 3u);
}

TEST(RunReplicates, WorkersDoNotChangeResults) {
    const auto spec = make_objective("camel");
    const auto cfg = quick(SurrogateKind::Forest, 10, 3, 0);
    const auto a = run_replicates(spec, cfg, 4, 9, 1);
    const auto b = run_replicates(spec, cfg, 4, 9, 3);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(history_csv(a.histories[i]), history_csv(b.histories[i]));
    EXPECT_EQ(aggregate_csv(a.aggregate), aggregate_csv(b.aggregate));
}

TEST(RunReplicates, FailuresAreExcludedFromAggregate) {
    // A formula that throws on one categorical level fails the replicate that reaches it.
    ObjectiveSpec s;
    s.name = "flaky";
    s.domain = Domain("flaky", {VariableSpec::numeric(0, 1, "x"), VariableSpec::categorical_values({0, 1}, "t")});
    s.formula = [](const std::vector<double>& a) {
        if (a[1] == 1.0 && a[0] > 0.5) throw std::runtime_error("simulator crashed");
        return a[0];
    };
    const auto r = run_replicates(s, quick(SurrogateKind::Forest, 4, 2, 0), 6, 0);
    EXPECT_GT(r.failed, 0u);
    EXPECT_LT(r.failed, 6u);
    for (const auto& h : r.histories) {
        if (h.failure) {
            EXPECT_NE(h.failure->find("simulator crashed"), std::string::npos);
        }
    }
    EXPECT_EQ(r.aggregate.median.size(), 3u);
}

TEST(ParallelFor, RethrowsWorkerErrors) {
    std::vector<int> hit(20, 0);
    parallel_for(20, 4, [&](std::size_t i) { hit[i] = 1; });
    EXPECT_EQ(std::accumulate(hit.begin(), hit.end(), 0), 20);
    EXPECT_THROW(parallel_for(5, 2, [](std::size_t i) {
                     if (i == 3) throw std::runtime_error("boom");
                 }),
                 std::runtime_error);
}

TEST(FitStudy, LinearObjectiveIsEasyForLvgp) {
    FitStudyConfig cfg;
    cfg.sizes = {12};
    cfg.n_repeats = 3;
    cfg.n_test = 200;
    cfg.seed = 5;
    for (const auto& row : fit_study(linear_1d(), SurrogateKind::Lvgp, cfg)) {
        ASSERT_TRUE(row.rrmse) << row.error;
        EXPECT_LT(*row.rrmse, 0.05);
    }
}

TEST(FitStudy, TableShapeAndDeterminism) {
    FitStudyConfig cfg;
    cfg.sizes = {10, 20};
    cfg.n_repeats = 2;
    cfg.n_test = 100;
    const auto spec = make_objective("mccormick");
    const auto a = fit_study(spec, SurrogateKind::Forest, cfg);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a[2].size, 20u);
    EXPECT_EQ(a[3].repeat, 1u);
    cfg.workers = 3;
    EXPECT_EQ(rrmse_csv(a), rrmse_csv(fit_study(spec, SurrogateKind::Forest, cfg)));
    EXPECT_EQ(rrmse_csv(a).substr(0, 26), "surrogate,size,repeat,rrms");
}

TEST(FitStudy, RejectsBadArguments) {
    FitStudyConfig cfg;
    EXPECT_THROW(fit_study(make_objective("branin"), SurrogateKind::Forest, cfg), std::invalid_argument);
    cfg.sizes = {2};
    EXPECT_THROW(fit_study(make_objective("branin"), SurrogateKind::Forest, cfg), std::invalid_argument);
    cfg.sizes = {8};
    EXPECT_THROW(fit_study(four_rows(), SurrogateKind::Forest, cfg), std::invalid_argument);
}

TEST(FitStudy, PermTenDimensionalFitsPoorlyAtFifty) {
    FitStudyConfig cfg;
    cfg.sizes = {50};
    cfg.n_repeats = 3;
    cfg.n_test = 300;
    cfg.seed = 2;
    const auto spec = make_objective("perm10");
    for (auto kind : {SurrogateKind::Lvgp, SurrogateKind::Forest}) {
        std::vector<double> v;
        for (const auto& r : fit_study(spec, kind, cfg))
            if (r.rrmse) v.push_back(*r.rrmse);
        ASSERT_FALSE(v.empty());
        EXPECT_GT(median_of(v), 0.5) << to_string(kind);
    }
}

TEST(Results, CsvLayouts) {
    auto h = history_with({{2.0}, {1.5}});
    h.records[0].point = MixedPoint{{0.25}, {1}};
    h.records[1].point = MixedPoint{{-1.0}, {0}};
    const auto csv = history_csv(h);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,best_so_far,response,point_json,phase");
    EXPECT_NE(csv.find(",initial\n"), std::string::npos);
    EXPECT_NE(csv.find(",bo\n"), std::string::npos);
    EXPECT_EQ(aggregate_csv(AggregateCurve{{1.0}, {0.0}}).substr(0, 21), "iteration,median,mad\n");
    std::vector<RrmseRow> rows{{SurrogateKind::Lvgp, 50, 0, 0.25, {}}, {SurrogateKind::Forest, 50, 1, std::nullopt, "x"}};
    EXPECT_EQ(rrmse_csv(rows), "surrogate,size,repeat,rrmse\nlvgp,50,0,0.25\nforest,50,1,\n");
}
