#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "crowdteach/core.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach::testing {

/// Lines through the origin at angles kπ/n_lines under a uniform prior.
/// Points spread over every wedge between adjacent lines, so each of the
/// 2·n_lines cells holds per_wedge examples. Labels come from line 0.
inline TeachingProblem wedge_problem(std::size_t n_lines, std::size_t per_wedge, std::uint64_t seed) {
    TeachingProblem p;
    p.alpha = 2.0;
    for (std::size_t k = 0; k < n_lines; ++k) {
        const double a = static_cast<double>(k) * std::numbers::pi / static_cast<double>(n_lines);
        p.hypothesis_class.hypotheses.push_back(Hypothesis{{std::cos(a), std::sin(a)}, 0.0});
    }
    p.hypothesis_class.prior.assign(n_lines, 1.0 / static_cast<double>(n_lines));
    Rng rng(seed);
    const double wedge = std::numbers::pi / static_cast<double>(n_lines);
    for (std::size_t w = 0; w < 2 * n_lines; ++w) {
        for (std::size_t i = 0; i < per_wedge; ++i) {
            const double a = std::numbers::pi / 2.0 + (static_cast<double>(w) + 0.05 + 0.9 * rng.uniform()) * wedge;
            const double r = 0.2 + 0.8 * rng.uniform();
            std::vector<double> x{r * std::cos(a), r * std::sin(a)};
            const Label y = predict(p.hypothesis_class.hypotheses[0], x);
            p.teaching_set.push_back(
                Example{"w" + std::to_string(p.teaching_set.size()), std::move(x), y, std::nullopt});
        }
    }
    return p;
}

}  // namespace crowdteach::testing
