#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mixbo/core.hpp"
#include "mixbo/detail/sobol_table.hpp"
#include "mixbo/random.hpp"

namespace mixbo {

// Unscrambled base-2 Sobol sequence in Gray-code order. Index 0 is the
// origin; sobol_sequence() starts at index 1.
class SobolSequence {
public:
    static constexpr std::size_t kBits = 32;

    explicit SobolSequence(std::size_t dim) : dim_(dim), directions_(dim) {
        if (dim == 0) throw std::invalid_argument("sobol: dimension must be positive");
        if (dim > detail::kSobolMaxDim)
            throw std::invalid_argument("sobol: dimension " + std::to_string(dim) + " exceeds " +
                                        std::to_string(detail::kSobolMaxDim));
        for (std::size_t d = 0; d < dim; ++d) {
            const auto& entry = detail::kSobolTable[d];
            std::array<std::uint32_t, kBits> m{};
            const unsigned s = std::bit_width(entry.poly) - 1;
            if (s == 0) {
                m.fill(1);
            } else {
                for (unsigned k = 0; k < s; ++k) m[k] = entry.m[k];
                for (unsigned k = s; k < kBits; ++k) {
                    std::uint32_t mk = m[k - s] ^ (m[k - s] << s);
                    for (unsigned j = 1; j < s; ++j)
                        if ((entry.poly >> (s - j)) & 1u) mk ^= m[k - j] << j;
                    m[k] = mk;
                }
            }
            for (unsigned k = 0; k < kBits; ++k) directions_[d][k] = m[k] << (kBits - 1 - k);
        }
    }

    std::size_t dim() const { return dim_; }

    std::vector<double> point(std::uint64_t index) const {
        if (index >> kBits) throw std::out_of_range("sobol: index exceeds 2^32");
        const std::uint64_t gray = index ^ (index >> 1);
        std::vector<double> x(dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            std::uint32_t acc = 0;
            for (unsigned k = 0; k < kBits; ++k)
                if ((gray >> k) & 1u) acc ^= directions_[d][k];
            x[d] = static_cast<double>(acc) * 0x1.0p-32;
        }
        return x;
    }

private:
    std::size_t dim_;
    std::vector<std::array<std::uint32_t, kBits>> directions_;
};

inline std::vector<std::vector<double>> sobol_sequence(std::size_t dim, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sobol: n must be positive");
    SobolSequence seq(dim);
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) pts.push_back(seq.point(i));
    return pts;
}

struct DesignConfig {
    std::size_t n_initial = 10;
    std::uint64_t seed = 0;
};

// Balanced column of n level indices over J levels: every level appears
// floor(n/J) or ceil(n/J) times, extras go to a random subset of levels.
inline std::vector<std::size_t> balanced_levels(std::size_t n, std::size_t levels, Rng& rng) {
    if (n < levels)
        throw std::invalid_argument("initial design of " + std::to_string(n) + " points cannot contain all " +
                                    std::to_string(levels) + " levels at least once");
    std::vector<std::size_t> order(levels);
    for (std::size_t j = 0; j < levels; ++j) order[j] = j;
    shuffle(order, rng);
    const std::size_t extra = n % levels;
    std::vector<std::size_t> column;
    column.reserve(n);
    for (std::size_t j = 0; j < levels; ++j) column.insert(column.end(), n / levels, j);
    for (std::size_t e = 0; e < extra; ++e) column.push_back(order[e]);
    shuffle(column, rng);
    return column;
}

inline std::vector<MixedPoint> initial_design(const Domain& domain, const DesignConfig& cfg) {
    if (cfg.n_initial == 0) throw std::invalid_argument("initial design size must be positive");
    std::vector<MixedPoint> design(cfg.n_initial);
    if (domain.num_numeric() > 0) {
        auto unit = sobol_sequence(domain.num_numeric(), cfg.n_initial);
        for (std::size_t i = 0; i < cfg.n_initial; ++i) {
            design[i].numeric.resize(domain.num_numeric());
            for (std::size_t k = 0; k < domain.num_numeric(); ++k)
                design[i].numeric[k] = domain.from_unit(k, unit[i][k]);
        }
    }
    for (auto& p : design) p.categorical.resize(domain.num_categorical());
    for (std::size_t k = 0; k < domain.num_categorical(); ++k) {
        Rng rng = make_rng(cfg.seed, k);
        auto column = balanced_levels(cfg.n_initial, domain.categorical(k).num_levels(), rng);
        for (std::size_t i = 0; i < cfg.n_initial; ++i) design[i].categorical[k] = column[i];
    }
    return design;
}

}  // namespace mixbo
