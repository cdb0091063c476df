#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdteach/core.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach {

/// A simulated learner: the hypothesis currently in use plus the belief it
/// resamples from after a mistake.
struct LearnerState {
    std::size_t current_index = 0;
    PosteriorTracker tracker;
    std::size_t step = 0;
};

struct RolloutTrace {
    /// h_1 .. h_{T+1}.
    std::vector<std::size_t> hypothesis_path;
    /// 1-based steps t at which x_t triggered a resample.
    std::vector<std::size_t> switch_steps;
    /// Error of the final (frozen) hypothesis on the test set, if present.
    std::optional<double> final_test_error;
};

/// h_1 ~ P0.
[[nodiscard]] LearnerState init_learner(const LearnerModel& model, Rng& rng);
[[nodiscard]] LearnerState init_learner(const LearnerModel& model, std::uint64_t seed);

/// Shows one labeled example. The belief always absorbs the example. A
/// hypothesis that labels x correctly is kept. One that mislabels it is kept
/// with probability P(y | h, x) and otherwise redrawn from the full P_t, which
/// keeps the marginal of h_{t+1} equal to P_t.
[[nodiscard]] LearnerState learner_observe(const LearnerState& state, const LearnerModel& model,
                                           std::string_view example_id, Rng& rng);
/// Returns true when the hypothesis was redrawn.
bool learner_observe_in_place(LearnerState& state, const LearnerModel& model,
                              std::size_t example_index, Rng& rng);

[[nodiscard]] Label learner_predict(const LearnerState& state, const LearnerModel& model,
                                    std::span<const double> features);

/// Teach `sequence` to one learner, then freeze its hypothesis for testing.
/// Throws UsageError on repeated or unknown example ids.
[[nodiscard]] RolloutTrace rollout(const LearnerModel& model,
                                   std::span<const std::string> sequence, std::uint64_t seed);
[[nodiscard]] RolloutTrace rollout(const LearnerModel& model,
                                   std::span<const std::size_t> sequence, std::uint64_t seed);

}  // namespace crowdteach
