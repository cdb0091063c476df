#include "crowdteach/rng.hpp"

#include "crowdteach/error.hpp"

namespace crowdteach {

std::size_t Rng::categorical(std::span<const double> probabilities) {
    if (probabilities.empty()) throw UsageError("categorical: empty distribution");
    const double u = uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0.0) continue;
        last_positive = i;
        cumulative += probabilities[i];
        if (u < cumulative) return i;
    }
    return last_positive;
}

}  // namespace crowdteach
