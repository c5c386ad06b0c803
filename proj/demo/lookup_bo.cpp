// Maximizes a response column of a lookup table (a finite, purely categorical
// design space) with forest-based BO.
//
//   demo_lookup [table.csv] [response] [input,columns]

#include <iostream>
#include <sstream>

#include "mixbo/mixbo.hpp"

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : std::string(MIXBO_DATA_DIR) + "/m2ax_synthetic.csv";
    const std::string response = argc > 2 ? argv[2] : "B";
    std::vector<std::string> inputs{"M", "A", "X"};
    if (argc > 3) {
        inputs.clear();
        std::istringstream ss(argv[3]);
        for (std::string col; std::getline(ss, col, ',');) inputs.push_back(col);
    }

    const auto spec = mixbo::load_lookup(path, response, /*negate=*/true, inputs);
    mixbo::BoConfig cfg;
    cfg.surrogate = mixbo::SurrogateKind::Forest;
    cfg.n_initial = 12;
    cfg.max_iterations = 30;
    cfg.seed = 1;
    const auto history = mixbo::run_bo(spec, cfg);

    const auto& best = *std::min_element(history.records.begin(), history.records.end(),
                                         [](const auto& a, const auto& b) { return a.response < b.response; });
    std::cout << "rows in table: " << spec.table->points.size() << '\n';
    std::cout << "evaluated: " << history.records.size() << '\n';
    std::cout << "best " << response << " found: " << -best.response << " (table maximum " << -*spec.reference_minimum
              << ")\n";
    for (std::size_t k = 0; k < spec.domain.num_categorical(); ++k)
        std::cout << "  " << spec.domain.categorical(k).name() << " = "
                  << spec.domain.categorical(k).levels()[best.point.categorical[k]].label << '\n';
}
