#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "crowdteach/core.hpp"

namespace crowdteach {

/// Two-class Gaussian feature model for the synthetic insect task
/// (f1 = head/body size ratio, f2 = head/body color contrast).
struct VWParams {
    std::array<double, 2> mean_pos{0.10, 0.13};
    std::array<double, 2> mean_neg{-0.10, -0.13};
    /// Per-axis variance.
    std::array<double, 2> cov_diag{0.12, 0.12};
    std::size_t n_train_per_class = 80;
    std::size_t n_test_per_class = 20;
};

/// Clustered linear hypotheses: cluster i draws (angle, offset) from a
/// Gaussian with mean (angle_mean_step·i, 0) and per-axis variance param_cov.
struct HypothesisGenParams {
    std::size_t n_clusters = 8;
    std::size_t per_cluster = 12;
    double angle_mean_step = std::numbers::pi / 4.0;
    std::array<double, 2> param_cov{2.0, 0.005};
};

struct VWData {
    std::vector<Example> train;
    std::vector<Example> test;
};

struct HypothesisDraw {
    std::size_t cluster = 0;
    double angle = 0.0;
    double offset = 0.0;
};

/// Positives first, then negatives; ids `train-NNN` / `test-NNN`.
[[nodiscard]] VWData generate_vw(const VWParams& params, std::uint64_t seed);

[[nodiscard]] std::vector<HypothesisDraw> sample_hypothesis_params(
    const HypothesisGenParams& params, std::uint64_t seed);

/// weights = [cos θ, sin θ], offset = b.
[[nodiscard]] Hypothesis hypothesis_from_angle(double angle, double offset);

[[nodiscard]] std::vector<Hypothesis> generate_vw_hypotheses(const HypothesisGenParams& params,
                                                             std::uint64_t seed);

/// Index of the hypothesis with the fewest label disagreements on `examples`
/// (lowest index on ties).
[[nodiscard]] std::size_t select_target(std::span<const Hypothesis> hypotheses,
                                        std::span<const Example> examples);

/// Drops exactly the examples the target mislabels, preserving order.
/// Throws UsageError if nothing survives.
[[nodiscard]] std::vector<Example> enforce_realizability(std::span<const Example> examples,
                                                         std::span<const Hypothesis> hypotheses,
                                                         std::size_t target_index);

/// Full pipeline: data, hypotheses, target, pruning of the teaching set,
/// uniform prior. The test set is kept as generated.
[[nodiscard]] TeachingProblem make_vw_problem(const VWParams& data_params,
                                              const HypothesisGenParams& hypothesis_params,
                                              double alpha, std::uint64_t seed);

}  // namespace crowdteach
