#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixbo/core.hpp"
#include "mixbo/io.hpp"
#include "mixbo/runner.hpp"

// Text serialization of runner outputs. Everything here is a pure function of
// the seeded results; wall times only appear in the diagnostics CSV.

namespace mixbo {

inline std::string history_csv(const History& h) {
    std::ostringstream out;
    out << "iteration,best_so_far,response,point_json,phase\n";
    for (const auto& r : h.records)
        out << r.iteration << ',' << format_double(r.best_so_far) << ',' << format_double(r.response) << ','
            << csv_quote(to_json(r.point).dump()) << ',' << (r.initial ? "initial" : "bo") << '\n';
    return out.str();
}

inline nlohmann::json history_sidecar(const History& h) {
    nlohmann::json j{{"config", to_json(h.config)},
                     {"seed", h.config.seed},
                     {"n_records", h.records.size()},
                     {"iterations_completed", h.iterations_completed()}};
    j["failure"] = h.failure ? nlohmann::json(*h.failure) : nlohmann::json(nullptr);
    return j;
}

inline std::string diagnostics_csv(const History& h) {
    std::ostringstream out;
    out << "iteration,wall_seconds,ei,fit_json\n";
    for (const auto& r : h.records) {
        if (r.initial) continue;
        out << r.iteration << ',' << format_double(r.wall_seconds) << ',' << format_double(r.ei) << ','
            << csv_quote(r.fit.dump()) << '\n';
    }
    return out.str();
}

inline std::string aggregate_csv(const AggregateCurve& c) {
    std::ostringstream out;
    out << "iteration,median,mad\n";
    for (std::size_t i = 0; i < c.median.size(); ++i)
        out << i << ',' << format_double(c.median[i]) << ',' << format_double(c.mad[i]) << '\n';
    return out.str();
}

// Failed cells have an empty rrmse field.
inline std::string rrmse_csv(const std::vector<RrmseRow>& rows) {
    std::ostringstream out;
    out << "surrogate,size,repeat,rrmse\n";
    for (const auto& r : rows)
        out << to_string(r.surrogate) << ',' << r.size << ',' << r.repeat << ','
            << (r.rrmse ? format_double(*r.rrmse) : std::string{}) << '\n';
    return out.str();
}

}  // namespace mixbo
