// mixbo: command-line driver for BO campaigns, benchmark suites, fitting
// studies and reference-minimum maintenance.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mixbo/mixbo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string default_out_root() {
    const char* env = std::getenv("MIXBO_OUT");
    return env && *env ? env : "out";
}

std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct RunManifest {
    std::string experiment;
    std::string objective;
    std::vector<std::string> surrogates{"lvgp", "forest"};
    std::optional<std::size_t> n_initial;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> replicates;
    std::uint64_t seed = 0;
    std::string out;
    std::string lookup;
    std::string response;
    bool negate = false;
    std::vector<std::string> inputs;
    double threshold = 1e-2;
};

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json to_json(const RunManifest& m) {
    json j{{"experiment", m.experiment}, {"objective", m.objective},   {"surrogates", m.surrogates},
           {"n_initial", opt_json(m.n_initial)}, {"iterations", opt_json(m.iterations)},
           {"replicates", opt_json(m.replicates)}, {"seed", m.seed}, {"out", m.out}, {"threshold", m.threshold}};
    if (!m.lookup.empty())
        j["lookup"] = {{"path", m.lookup}, {"response", m.response}, {"negate", m.negate}, {"inputs", m.inputs}};
    return j;
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    try {
        m.experiment = j.value("experiment", std::string{});
        m.objective = j.value("objective", std::string{});
        if (j.contains("surrogates")) m.surrogates = j.at("surrogates").get<std::vector<std::string>>();
        auto opt = [&](const char* key, std::optional<std::size_t>& dst) {
            if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<std::size_t>();
        };
        opt("n_initial", m.n_initial);
        opt("iterations", m.iterations);
        opt("replicates", m.replicates);
        m.seed = j.value("seed", std::uint64_t{0});
        m.out = j.value("out", std::string{});
        m.threshold = j.value("threshold", 1e-2);
        if (j.contains("lookup")) {
            const auto& l = j.at("lookup");
            m.lookup = l.at("path").get<std::string>();
            m.response = l.at("response").get<std::string>();
            m.negate = l.value("negate", false);
            if (l.contains("inputs")) m.inputs = l.at("inputs").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid manifest: ") + e.what());
    }
    return m;
}

mixbo::ObjectiveSpec resolve_objective(const RunManifest& m) {
    if (!m.lookup.empty()) {
        if (m.response.empty()) throw ConfigError("--lookup requires --response");
        try {
            auto spec = mixbo::load_lookup(m.lookup, m.response, m.negate, m.inputs);
            if (!m.objective.empty()) spec.name = m.objective;
            return spec;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (m.objective.empty()) {
        std::string msg = "missing objective name; registered objectives:";
        for (const auto& n : mixbo::objective_names()) msg += " " + n;
        throw ConfigError(msg);
    }
    mixbo::ObjectiveSpec spec;
    try {
        spec = mixbo::make_objective(m.objective);
    } catch (const mixbo::UnknownObjective& e) {
        throw ConfigError(e.what());
    }
    if (fs::exists(mixbo::default_minima_path()))
        mixbo::attach_reference_minimum(spec, mixbo::load_minima(mixbo::default_minima_path()));
    return spec;
}

void write_json(const fs::path& path, const json& j) { mixbo::atomic_write(path, j.dump(2) + "\n"); }

// Runs every surrogate of the manifest and writes the result files. Returns
// false when any replicate failed.
bool execute_campaign(RunManifest m, std::size_t workers) {
    const auto spec = resolve_objective(m);
    if (m.experiment.empty()) m.experiment = spec.name;
    if (m.out.empty()) m.out = default_out_root();
    if (m.surrogates.empty()) throw ConfigError("no surrogates requested");
    const std::size_t lookup_default_initial = 10, lookup_default_iterations = 50, lookup_default_replicates = 10;
    if (!m.n_initial) m.n_initial = spec.is_lookup() ? lookup_default_initial : spec.default_initial;
    if (!m.iterations) m.iterations = spec.is_lookup() ? lookup_default_iterations : spec.default_iterations;
    if (!m.replicates) m.replicates = spec.is_lookup() ? lookup_default_replicates : spec.default_replicates;
    if (*m.replicates < 1) throw ConfigError("--replicates must be >= 1");

    std::vector<mixbo::SurrogateKind> kinds;
    try {
        for (const auto& s : m.surrogates) kinds.push_back(mixbo::parse_surrogate(s));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    mixbo::BoConfig base;
    base.objective = spec.name;
    base.n_initial = *m.n_initial;
    base.max_iterations = *m.iterations;
    try {
        base.validate(spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const fs::path dir = fs::path(m.out) / m.experiment;
    write_json(dir / "manifest.json", to_json(m));

    json summary{{"experiment", m.experiment}, {"objective", spec.name}, {"seed", m.seed},
                 {"replicates", *m.replicates}, {"threshold", m.threshold}};
    summary["reference_minimum"] = opt_json(spec.reference_minimum);
    bool all_ok = true;
    for (auto kind : kinds) {
        auto cfg = base;
        cfg.surrogate = kind;
        const auto name = mixbo::to_string(kind);
        std::cerr << "[" << m.experiment << "/" << name << "] " << *m.replicates << " replicates, " << cfg.n_initial
                  << " initial, " << cfg.max_iterations << " iterations\n";
        auto res = mixbo::run_replicates(spec, cfg, *m.replicates, m.seed, workers);
        const fs::path sdir = dir / name;
        for (std::size_t k = 0; k < res.histories.size(); ++k) {
            const auto& h = res.histories[k];
            const auto stem = "rep" + std::to_string(k);
            mixbo::atomic_write(sdir / (stem + ".csv"), mixbo::history_csv(h));
            write_json(sdir / (stem + ".json"), mixbo::history_sidecar(h));
            mixbo::atomic_write(sdir / "diagnostics" / (stem + ".csv"), mixbo::diagnostics_csv(h));
            if (h.failure) std::cerr << "  replicate " << k << " failed: " << *h.failure << "\n";
        }
        mixbo::atomic_write(sdir / "aggregate.csv", mixbo::aggregate_csv(res.aggregate));

        json s{{"failed_replicates", res.failed}, {"aggregated_iterations", res.aggregate.median.size()}};
        if (!res.aggregate.median.empty()) {
            s["final_median"] = res.aggregate.median.back();
            s["final_mad"] = res.aggregate.mad.back();
        }
        if (spec.reference_minimum) {
            const auto it = mixbo::iterations_to_threshold(res.aggregate, *spec.reference_minimum, m.threshold);
            s["iterations_to_threshold"] = opt_json(it);
        }
        summary["surrogates"][name] = s;
        if (res.failed) all_ok = false;
    }
    write_json(dir / "summary.json", summary);
    std::cerr << "wrote " << dir.string() << "\n";
    return all_ok;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(',', start);
        auto item = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!item.empty()) out.push_back(item);
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

int verify_minima(bool update, const std::string& fixtures, double tolerance, std::vector<std::string> names) {
    if (names.empty()) names = mixbo::objective_names();
    std::map<std::string, mixbo::MinimumRecord> stored;
    if (fs::exists(fixtures)) stored = mixbo::load_minima(fixtures);
    else if (!update) {
        std::cerr << "fixtures file '" << fixtures << "' not found\n";
        return kExitRuntime;
    }

    auto updated = stored;
    bool drift = false;
    for (const auto& name : names) {
        mixbo::ObjectiveSpec spec;
        try {
            spec = mixbo::make_objective(name);
        } catch (const mixbo::UnknownObjective& e) {
            throw ConfigError(e.what());
        }
        const auto rec = mixbo::compute_reference_minimum(spec);
        updated[name] = rec;
        auto it = stored.find(name);
        if (it == stored.end()) {
            std::cout << "MISSING " << name << ": computed " << mixbo::format_double(rec.value) << "\n";
            drift = true;
        } else if (!(std::abs(it->second.value - rec.value) <= tolerance)) {
            std::cout << "DRIFT " << name << ": fixture " << mixbo::format_double(it->second.value) << ", computed "
                      << mixbo::format_double(rec.value) << "\n";
            drift = true;
        } else {
            std::cout << "OK " << name << ": " << mixbo::format_double(rec.value) << " (" << rec.provenance << ")\n";
        }
    }
    if (update) {
        mixbo::atomic_write(fixtures, mixbo::minima_to_json(updated).dump(2) + "\n");
        std::cout << "wrote " << fixtures << "\n";
        return 0;
    }
    return drift ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-variable Bayesian optimization benchmarks"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run BO replicates of one objective for each surrogate");
    RunManifest flags;
    std::string manifest_path, surrogates_flag = "lvgp,forest", inputs_flag;
    std::size_t n_initial = 0, iterations = 0, replicates = 0, workers = default_workers();
    run->add_option("--manifest", manifest_path, "JSON manifest; flags given explicitly override its fields")
        ->check(CLI::ExistingFile);
    auto* o_objective = run->add_option("--objective", flags.objective, "Registered objective name (or name of a lookup objective)");
    auto* o_surrogates = run->add_option("--surrogates", surrogates_flag, "Comma-separated surrogates: lvgp, forest")
                             ->capture_default_str();
    auto* o_replicates = run->add_option("--replicates", replicates, "Number of replicates (default: objective protocol)");
    auto* o_initial = run->add_option("--initial", n_initial, "Initial design size (default: objective protocol)");
    auto* o_iters = run->add_option("--iters", iterations, "BO iterations (default: objective protocol)");
    auto* o_seed = run->add_option("--seed", flags.seed, "Base seed; replicate i uses seed + i")->capture_default_str();
    auto* o_out = run->add_option("--out", flags.out, "Output root (default: $MIXBO_OUT or ./out)");
    auto* o_experiment = run->add_option("--experiment", flags.experiment, "Experiment name (default: objective name)");
    auto* o_lookup = run->add_option("--lookup", flags.lookup, "CSV lookup table to optimize instead of a formula");
    auto* o_response = run->add_option("--response", flags.response, "Response column of the lookup table");
    auto* o_negate = run->add_flag("--negate", flags.negate, "Minimize the negated response (i.e. maximize it)");
    auto* o_inputs = run->add_option("--inputs", inputs_flag, "Comma-separated input columns of the lookup table");
    auto* o_threshold = run->add_option("--threshold", flags.threshold, "Tolerance for iterations-to-threshold in the summary")
                            ->capture_default_str();
    run->add_option("--workers", workers, "Maximum concurrent replicates")->capture_default_str();

    // suite
    auto* suite = app.add_subcommand("suite", "Run every objective of a benchmark suite at its protocol settings");
    std::string suite_name, suite_out, suite_surrogates = "lvgp,forest";
    double scale = 1.0;
    std::uint64_t suite_seed = 0;
    std::size_t suite_workers = default_workers();
    suite->add_option("name", suite_name, "Suite: low-simple, low-complex, high-dim, supplementary")->required();
    suite->add_option("--scale", scale, "Scale factor applied to the replicate count")->capture_default_str();
    suite->add_option("--seed", suite_seed, "Base seed")->capture_default_str();
    suite->add_option("--out", suite_out, "Output root (default: $MIXBO_OUT or ./out)");
    suite->add_option("--surrogates", suite_surrogates, "Comma-separated surrogates")->capture_default_str();
    suite->add_option("--workers", suite_workers, "Maximum concurrent replicates")->capture_default_str();

    // fit-study
    auto* study = app.add_subcommand("fit-study", "RRMSE of surrogate fits over training-set sizes");
    std::string study_objective, study_sizes, study_surrogate = "lvgp", study_out;
    mixbo::FitStudyConfig study_cfg;
    study_cfg.workers = default_workers();
    study->add_option("--objective", study_objective, "Formula objective name")->required();
    study->add_option("--sizes", study_sizes, "Comma-separated training sizes")->required();
    study->add_option("--surrogate", study_surrogate, "Comma-separated surrogates: lvgp, forest")->capture_default_str();
    study->add_option("--repeats", study_cfg.n_repeats, "Training sets per size")->capture_default_str();
    study->add_option("--test", study_cfg.n_test, "Independent test points per training set")->capture_default_str();
    study->add_option("--seed", study_cfg.seed, "Seed")->capture_default_str();
    study->add_option("--out", study_out, "Table CSV path (default: <root>/fit-study/<objective>.csv)");
    study->add_option("--workers", study_cfg.workers, "Maximum concurrent fits")->capture_default_str();

    // verify-minima
    auto* verify = app.add_subcommand("verify-minima", "Recompute reference minima and compare with the fixtures");
    bool update = false;
    std::string fixtures = mixbo::default_minima_path();
    double tolerance = 1e-6;
    std::vector<std::string> verify_names;
    verify->add_flag("--update", update, "Rewrite the fixtures file with the recomputed minima");
    verify->add_option("--fixtures", fixtures, "Fixtures file")->capture_default_str();
    verify->add_option("--tolerance", tolerance, "Allowed absolute drift")->capture_default_str();
    verify->add_option("--objective", verify_names, "Restrict to these objectives");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            RunManifest m;
            if (!manifest_path.empty()) {
                try {
                    m = manifest_from_json(json::parse(mixbo::read_file(manifest_path)));
                } catch (const json::parse_error& e) {
                    throw ConfigError(std::string("invalid manifest: ") + e.what());
                }
            }
            const bool have_manifest = !manifest_path.empty();
            auto given = [&](CLI::Option* o) { return !have_manifest || o->count() > 0; };
            if (given(o_objective)) m.objective = flags.objective;
            if (given(o_surrogates)) m.surrogates = split_list(surrogates_flag);
            if (o_replicates->count()) m.replicates = replicates;
            if (o_initial->count()) m.n_initial = n_initial;
            if (o_iters->count()) m.iterations = iterations;
            if (given(o_seed)) m.seed = flags.seed;
            if (given(o_out)) m.out = flags.out;
            if (given(o_experiment)) m.experiment = flags.experiment;
            if (given(o_lookup)) m.lookup = flags.lookup;
            if (given(o_response)) m.response = flags.response;
            if (given(o_negate)) m.negate = flags.negate;
            if (given(o_inputs)) m.inputs = split_list(inputs_flag);
            if (given(o_threshold)) m.threshold = flags.threshold;
            return execute_campaign(m, workers) ? 0 : kExitRuntime;
        }
        if (suite->parsed()) {
            const auto& all = mixbo::suites();
            auto it = all.find(suite_name);
            if (it == all.end()) {
                std::string msg = "unknown suite '" + suite_name + "'; available:";
                for (const auto& [n, _] : all) msg += " " + n;
                throw ConfigError(msg);
            }
            if (!(scale > 0.0)) throw ConfigError("--scale must be positive");
            bool ok = true;
            for (const auto& name : it->second) {
                const auto spec = mixbo::make_objective(name);
                RunManifest m;
                m.objective = name;
                m.experiment = suite_name + "/" + name;
                m.surrogates = split_list(suite_surrogates);
                m.n_initial = spec.default_initial;
                m.iterations = spec.default_iterations;
                m.replicates = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::lround(scale * static_cast<double>(spec.default_replicates))));
                m.seed = suite_seed;
                m.out = suite_out;
                ok = execute_campaign(m, suite_workers) && ok;
            }
            return ok ? 0 : kExitRuntime;
        }
        if (study->parsed()) {
            mixbo::ObjectiveSpec spec;
            try {
                spec = mixbo::make_objective(study_objective);
            } catch (const mixbo::UnknownObjective& e) {
                throw ConfigError(e.what());
            }
            for (const auto& s : split_list(study_sizes)) {
                std::size_t used = 0;
                unsigned long long v = 0;
                try {
                    v = std::stoull(s, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != s.size() || s.front() == '-') throw ConfigError("invalid training size '" + s + "'");
                study_cfg.sizes.push_back(static_cast<std::size_t>(v));
            }
            if (study_cfg.sizes.empty()) throw ConfigError("--sizes is empty");
            if (study_cfg.n_repeats < 1) throw ConfigError("--repeats must be >= 1");
            if (study_cfg.n_test < 2) throw ConfigError("--test must be >= 2");
            std::vector<mixbo::SurrogateKind> kinds;
            for (const auto& s : split_list(study_surrogate)) {
                try {
                    kinds.push_back(mixbo::parse_surrogate(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
            std::vector<mixbo::RrmseRow> table;
            for (auto kind : kinds) {
                std::vector<mixbo::RrmseRow> rows;
                try {
                    rows = mixbo::fit_study(spec, kind, study_cfg);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
                for (auto size : study_cfg.sizes) {
                    std::vector<double> vals;
                    for (const auto& r : rows)
                        if (r.size == size && r.rrmse) vals.push_back(*r.rrmse);
                    std::cout << mixbo::to_string(kind) << " size " << size << ": median RRMSE "
                              << (vals.empty() ? std::string("n/a") : mixbo::format_double(mixbo::median_of(vals)))
                              << " over " << vals.size() << " fits\n";
                }
                table.insert(table.end(), rows.begin(), rows.end());
            }
            if (study_out.empty()) study_out = (fs::path(default_out_root()) / "fit-study" / (study_objective + ".csv")).string();
            mixbo::atomic_write(study_out, mixbo::rrmse_csv(table));
            std::cerr << "wrote " << study_out << "\n";
            for (const auto& r : table)
                if (!r.rrmse) return kExitRuntime;
            return 0;
        }
        if (verify->parsed()) return verify_minima(update, fixtures, tolerance, verify_names);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
