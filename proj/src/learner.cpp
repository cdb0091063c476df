#include "crowdteach/learner.hpp"

#include <cmath>

#include "crowdteach/error.hpp"

namespace crowdteach {

LearnerState init_learner(const LearnerModel& model, Rng& rng) {
    LearnerState state{0, PosteriorTracker(model), 0};
    state.current_index = rng.categorical(model.prior());
    return state;
}

LearnerState init_learner(const LearnerModel& model, std::uint64_t seed) {
    Rng rng(seed);
    return init_learner(model, rng);
}

bool learner_observe_in_place(LearnerState& state, const LearnerModel& model,
                              std::size_t example_index, Rng& rng) {
    state.tracker.observe(model, example_index);
    ++state.step;
    if (!model.inconsistent(state.current_index, example_index)) return false;
    if (rng.uniform() < std::exp(model.log_penalty(state.current_index, example_index))) return false;
    state.current_index = rng.categorical(normalized_posterior(state.tracker));
    return true;
}

LearnerState learner_observe(const LearnerState& state, const LearnerModel& model,
                             std::string_view example_id, Rng& rng) {
    LearnerState next = state;
    learner_observe_in_place(next, model, model.example_index(example_id), rng);
    return next;
}

Label learner_predict(const LearnerState& state, const LearnerModel& model,
                      std::span<const double> features) {
    return predict(model.hypothesis(state.current_index), features);
}

RolloutTrace rollout(const LearnerModel& model, std::span<const std::size_t> sequence,
                     std::uint64_t seed) {
    Rng rng(seed);
    LearnerState state = init_learner(model, rng);
    RolloutTrace trace;
    trace.hypothesis_path.reserve(sequence.size() + 1);
    trace.hypothesis_path.push_back(state.current_index);
    for (std::size_t x : sequence) {
        if (learner_observe_in_place(state, model, x, rng)) trace.switch_steps.push_back(state.step);
        trace.hypothesis_path.push_back(state.current_index);
    }
    if (const auto& test = model.problem().test_set; test && !test->empty()) {
        trace.final_test_error = labeling_error(model.hypothesis(state.current_index), *test);
    }
    return trace;
}

RolloutTrace rollout(const LearnerModel& model, std::span<const std::string> sequence,
                     std::uint64_t seed) {
    std::vector<std::size_t> indices;
    indices.reserve(sequence.size());
    for (const auto& id : sequence) indices.push_back(model.example_index(id));
    return rollout(model, indices, seed);
}

}  // namespace crowdteach
