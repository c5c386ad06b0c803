// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [criterion ...]     (default: all)

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixbo/mixbo.hpp"
#include "support/oracles.hpp"

using namespace mixbo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

BoConfig protocol(SurrogateKind kind, std::size_t n_initial, std::size_t iterations) {
    BoConfig c;
    c.surrogate = kind;
    c.n_initial = n_initial;
    c.max_iterations = iterations;
    return c;
}

std::string threshold_text(const std::optional<std::size_t>& it) { return it ? std::to_string(*it) : "never"; }

Outcome ei_closed_form() {
    double worst = 0.0;
    std::uint64_t seed = 1;
    for (double delta : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double s : {1.0, 1.5, 2.0, 2.5, 3.0}) {
            const double closed = expected_improvement(0.0, s, delta);
            const double mc = oracle::mc_expected_improvement(0.0, s, delta, 1'000'000, seed++);
            worst = std::max(worst, oracle::relative_error(closed, mc));
        }
    return {worst < 0.01, "max relative error " + fmt(worst) + " over 25 (delta, sd) cells"};
}

Domain oracle_domain() {
    return Domain("oracle", {VariableSpec::numeric(-1.0, 3.0, "x1"), VariableSpec::numeric(0.0, 10.0, "x2"),
                             VariableSpec::categorical_values({1, 2, 3, 4}, "t1"),
                             VariableSpec::categorical_labels({"a", "b", "c"}, "t2")});
}

double oracle_response(const MixedPoint& p) {
    return std::sin(p.numeric[0]) + 0.1 * p.numeric[1] * p.numeric[1] + 0.5 * static_cast<double>(p.categorical[0]) -
           (p.categorical[1] == 2 ? 1.0 : 0.0);
}

Outcome gp_oracle() {
    const auto d = oracle_domain();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = oracle::random_hyperparams(d, rng);
        Dataset data;
        for (int i = 0; i < 12 + 2 * trial; ++i) {
            auto p = oracle::random_point(d, rng);
            data.add(p, oracle_response(p));
        }
        const auto model = LvgpModel::from_hyperparams(d, data, h);
        for (int q = 0; q < 20; ++q) {
            const auto x = oracle::random_point(d, rng);
            const auto pred = model.predict(x);
            const auto ref = oracle::dense_gp(d, h, data, x);
            worst = std::max({worst, oracle::relative_error(pred.mean, ref.mean),
                              oracle::relative_error(pred.variance, ref.variance)});
        }
    }
    return {worst <= 1e-6, "max relative error " + fmt(worst) + " over 10 datasets (n = 12..30)"};
}

Outcome psd_and_gauge() {
    const auto d = oracle_domain();
    std::mt19937_64 rng(7);
    int factorized = 0;
    for (int draw = 0; draw < 100; ++draw) {
        const auto h = oracle::random_hyperparams(d, rng);
        std::vector<MixedPoint> pts;
        for (int i = 0; i < 25; ++i) pts.push_back(oracle::random_point(d, rng));
        Eigen::MatrixXd K(25, 25);
        for (Eigen::Index i = 0; i < 25; ++i)
            for (Eigen::Index j = 0; j < 25; ++j)
                K(i, j) = lvgp_kernel(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)], h, d) +
                          (i == j ? h.nugget() : 0.0);
        factorized += Eigen::LLT<Eigen::MatrixXd>(K).info() == Eigen::Success;
    }

    Dataset data;
    for (auto& p : initial_design(d, {24, 5})) {
        const double y = oracle_response(p);
        data.add(std::move(p), y);
    }
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        const auto h = oracle::random_hyperparams(d, rng);
        // Same pairwise distances: rotate, then reflect, every latent map.
        auto g = h;
        const double a = std::uniform_real_distribution<double>(0.0, 6.28)(rng);
        Eigen::Matrix2d rot;
        rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        for (auto& z : g.latent.coords) {
            z = z * rot.transpose();
            z.col(0) *= -1.0;
        }
        worst = std::max(worst, std::abs(neg_log_likelihood(h, data, d).value - neg_log_likelihood(g, data, d).value));
    }
    return {factorized == 100 && worst <= 1e-10, std::to_string(factorized) +
                                                     "/100 Cholesky factorizations, max NLL gap " + fmt(worst) +
                                                     " under latent isometries"};
}

Outcome branin_convergence() {
    const auto spec = load_objective("branin");
    const double ref = reference_minimum(spec);
    const auto lv = run_replicates(spec, protocol(SurrogateKind::Lvgp, 10, 50), 10, 0, workers());
    const auto rf = run_replicates(spec, protocol(SurrogateKind::Forest, 10, 50), 10, 0, workers());
    const auto it_lv = iterations_to_threshold(lv.aggregate, ref, 1e-2);
    const auto it_rf = iterations_to_threshold(rf.aggregate, ref, 1e-2);
    const bool lv_ok = !lv.failed && lv.aggregate.median.size() == 51 && it_lv && *it_lv <= 50;
    const bool order_ok = lv_ok && (!it_rf || *it_lv <= *it_rf);
    return {lv_ok && order_ok, "median iterations to within 1e-2 of " + fmt(ref) + ": lvgp " + threshold_text(it_lv) +
                                   ", forest " + threshold_text(it_rf) + "; final medians lvgp " +
                                   fmt(lv.aggregate.median.back()) + ", forest " + fmt(rf.aggregate.median.back())};
}

Outcome camel_convergence() {
    const auto spec = load_objective("camel");
    const auto lv = run_replicates(spec, protocol(SurrogateKind::Lvgp, 10, 50), 10, 0, workers());
    const auto rf = run_replicates(spec, protocol(SurrogateKind::Forest, 10, 50), 10, 0, workers());
    const double a = lv.aggregate.median.back(), b = rf.aggregate.median.back();
    const bool ok = !lv.failed && !rf.failed && std::abs(a + 1.0316) <= 5e-2 && std::abs(b + 1.0316) <= 5e-2;
    return {ok, "final medians lvgp " + fmt(a) + ", forest " + fmt(b) + " (target -1.0316, oracle " +
                    fmt(reference_minimum(spec)) + ")"};
}

Outcome rastrigin_ordering() {
    const auto spec = load_objective("rastrigin3d");
    std::string detail;
    for (std::uint64_t base : {0u, 1000u}) {
        const auto lv = run_replicates(spec, protocol(SurrogateKind::Lvgp, 30, 100), 5, base, workers());
        const auto rf = run_replicates(spec, protocol(SurrogateKind::Forest, 30, 100), 5, base, workers());
        const double a = lv.aggregate.median.back(), b = rf.aggregate.median.back();
        const bool ok = !lv.failed && !rf.failed && a < b;
        detail += (detail.empty() ? "" : "; rerun ") + std::string("base seed ") + std::to_string(base) +
                  ": final medians lvgp " + fmt(a) + ", forest " + fmt(b);
        if (ok) return {true, detail};
    }
    return {false, detail};
}

Outcome fitting_study() {
    FitStudyConfig cfg;
    cfg.sizes = {50, 80};
    cfg.n_repeats = 10;
    cfg.n_test = 1000;
    cfg.workers = workers();
    const auto rows = fit_study(make_objective("quad10"), SurrogateKind::Lvgp, cfg);
    std::vector<double> at50, at80;
    for (const auto& r : rows)
        if (r.rrmse) (r.size == 50 ? at50 : at80).push_back(*r.rrmse);
    if (at50.empty() || at80.empty()) return {false, "every fit failed at one size"};
    const double m50 = median_of(at50), m80 = median_of(at80);
    return {m80 < m50 && at50.size() == 10 && at80.size() == 10,
            "median RRMSE " + fmt(m50) + " at 50, " + fmt(m80) + " at 80 (" + std::to_string(at50.size() + at80.size()) +
                "/20 fits)"};
}

Outcome degrees_of_freedom_values() {
    const auto p6 = degrees_of_freedom(make_objective("perm6").domain);
    const auto p10 = degrees_of_freedom(make_objective("perm10").domain);
    const auto r10 = degrees_of_freedom(make_objective("rosenbrock10").domain);
    const auto q10 = degrees_of_freedom(make_objective("quad10").domain);
    return {p6 == 7 && p10 == 19 && r10 == 19 && q10 == 25, "perm6 " + std::to_string(p6) + ", perm10 " +
                                                                std::to_string(p10) + ", rosenbrock10 " +
                                                                std::to_string(r10) + ", quad10 " + std::to_string(q10)};
}

Outcome forest_identities() {
    const Domain dom("mixed", {VariableSpec::numeric(0, 1, "x"), VariableSpec::categorical_labels({"A", "B", "C"}, "c")});
    Rng rng = make_rng(3, 0);
    std::normal_distribution<double> noise(0.0, 0.3);
    Dataset data;
    for (int i = 0; i < 40; ++i) {
        const double x = uniform01(rng);
        const std::size_t c = uniform_index(rng, 3);
        data.add(MixedPoint{{x}, {c}}, std::sin(6 * x) + static_cast<double>(c) + noise(rng));
    }
    ForestConfig cfg;
    cfg.n_trees = 2;  // bias correction of order n/B swamps the raw terms
    cfg.seed = 11;
    const auto f = fit_forest(data, dom, cfg);
    bool mean_exact = true, nonneg = true;
    int negative_raw = 0;
    for (int i = 0; i <= 100; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            const MixedPoint p{{i / 100.0}, {c}};
            double s = 0.0;
            for (const auto& t : f.trees()) s += tree_predict(t, p);
            const auto pred = f.predict(p);
            mean_exact &= pred.mean == s / static_cast<double>(f.num_trees());
            nonneg &= pred.variance >= 0.0;
            negative_raw += f.variance_terms(p).raw < 0.0;
        }

    ForestConfig one, eight;
    one.seed = eight.seed = 99;
    one.threads = 1;
    eight.threads = 8;
    const auto f1 = fit_forest(data, dom, one);
    const auto f8 = fit_forest(data, dom, eight);
    bool identical = true;
    for (int i = 0; i < 50; ++i) {
        const MixedPoint p{{i / 49.0}, {static_cast<std::size_t>(i % 3)}};
        const auto a = f1.predict(p), b = f8.predict(p);
        identical &= std::memcmp(&a, &b, sizeof(Prediction)) == 0;
    }
    return {mean_exact && nonneg && negative_raw > 0 && identical,
            std::string("mean identity ") + (mean_exact ? "exact" : "BROKEN") + ", " + std::to_string(negative_raw) +
                " negative raw estimates clamped" + (nonneg ? "" : " (NEGATIVE VARIANCE SEEN)") +
                ", 1 vs 8 threads " + (identical ? "byte-identical" : "DIFFER")};
}

Outcome lookup_exhaustion() {
    std::string detail;
    bool ok = true;
    auto check = [&](const ObjectiveSpec& spec, SurrogateKind kind, std::size_t n_initial) {
        const std::size_t rows = spec.table->points.size();
        const auto h = run_bo(spec, protocol(kind, n_initial, rows));
        std::set<MixedPoint> seen;
        bool distinct = true;
        std::optional<std::size_t> reached;
        for (const auto& r : h.records) {
            distinct &= seen.insert(r.point).second;
            if (!reached && r.best_so_far == *spec.reference_minimum) reached = r.iteration;
        }
        const bool here = !h.failure && distinct && h.records.size() == rows && reached && *reached <= rows - n_initial;
        ok &= here;
        detail += (detail.empty() ? "" : "; ") + spec.name + "/" + to_string(kind) + ": " + std::to_string(rows) +
                  " rows, minimum at iteration " + threshold_text(reached) + (distinct ? "" : ", DUPLICATES");
    };
    std::ostringstream small;
    small << "a,b,y\n";
    const char* as[] = {"p", "q", "r", "s"};
    const char* bs[] = {"u", "v", "w"};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) small << as[i] << ',' << bs[j] << ',' << std::sin(3.0 * i + j) * 10 << '\n';
    std::istringstream in(small.str());
    auto toy = load_lookup(in, "y", false);
    toy.name = "toy12";
    check(toy, SurrogateKind::Lvgp, 2);
    check(toy, SurrogateKind::Forest, 2);
    auto m2ax = load_lookup(std::string(MIXBO_DATA_DIR) + "/m2ax_synthetic.csv", "B", true, {"M", "A", "X"});
    m2ax.name = "m2ax_B";
    check(m2ax, SurrogateKind::Forest, 10);
    return {ok, detail};
}

Outcome cmd_run_reproducible() {
    const fs::path root = fs::temp_directory_path() / ("mixbo-accept-" + std::to_string(::getpid()));
    fs::remove_all(root);
    auto run = [&](const std::string& tag) {
        const std::string cmd = std::string("\"") + MIXBO_CLI_PATH +
                                "\" run --objective branin --surrogates lvgp,forest --replicates 3 --initial 10 "
                                "--iters 10 --seed 7 --out \"" + (root / tag).string() + "\" >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    if (!run("a") || !run("b")) return {false, "cmd_run exited with an error"};
    std::size_t compared = 0;
    bool same = true;
    for (const auto* s : {"lvgp", "forest"})
        for (int k = 0; k < 3; ++k) {
            const auto rel = fs::path("branin") / s / ("rep" + std::to_string(k) + ".csv");
            same &= read_file(root / "a" / rel) == read_file(root / "b" / rel);
            ++compared;
        }
    fs::remove_all(root);
    return {same && compared == 6, std::to_string(compared) + " history CSVs " + (same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"ei-closed-form", ei_closed_form},
        {"gp-oracle-equivalence", gp_oracle},
        {"kernel-psd-and-gauge", psd_and_gauge},
        {"branin-convergence", branin_convergence},
        {"camel-convergence", camel_convergence},
        {"rastrigin3d-ordering", rastrigin_ordering},
        {"fitting-study-quad10", fitting_study},
        {"degrees-of-freedom", degrees_of_freedom_values},
        {"forest-identities", forest_identities},
        {"lookup-exhaustion", lookup_exhaustion},
        {"cmd-run-reproducibility", cmd_run_reproducible},
    };
    std::set<std::string> selected(argv + 1, argv + argc);
    bool all = true;
    for (const auto& [name, fn] : criteria) {
        if (!selected.empty() && !selected.count(name)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs) << " s]"
                  << std::endl;
        all &= o.pass;
    }
    return all ? 0 : 1;
}
