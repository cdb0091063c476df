#include <doctest.h>

#include <array>
#include <cmath>

#include "crowdteach/error.hpp"
#include "crowdteach/learner.hpp"
#include "crowdteach/rng.hpp"

using namespace crowdteach;

namespace {

Example example(std::string id, std::vector<double> x, Label y) {
    return Example{std::move(id), std::move(x), y, std::nullopt};
}

TeachingProblem two_hypothesis_problem() {
    TeachingProblem p;
    p.alpha = 1.0;
    p.teaching_set = {example("x1", {1.0}, Label::positive), example("x2", {3.0}, Label::positive)};
    p.hypothesis_class.hypotheses = {Hypothesis{{1.0}, 0.0},
                                     Hypothesis{{1.0}, -(1.0 + std::log(4.0))}};
    p.hypothesis_class.prior = {0.5, 0.5};
    p.hypothesis_class.target_index = 0;
    return p;
}

// Thresholds on a line at -1.5, -0.5, 0.5, 1.5 (target 0.5) with one
// teaching point between each pair; only the target labels the test points
// correctly.
TeachingProblem threshold_problem(double alpha) {
    TeachingProblem p;
    p.alpha = alpha;
    for (double t : {-1.5, -0.5, 0.5, 1.5}) p.hypothesis_class.hypotheses.push_back(Hypothesis{{1.0}, -t});
    p.hypothesis_class.prior.assign(4, 0.25);
    p.hypothesis_class.target_index = 2;
    p.teaching_set = {example("a", {-2.5}, Label::negative), example("b", {-1.0}, Label::negative),
                      example("c", {0.0}, Label::negative), example("d", {1.0}, Label::positive),
                      example("e", {2.5}, Label::positive)};
    p.test_set = std::vector<Example>{example("t1", {-1.0}, Label::negative),
                                      example("t2", {0.0}, Label::negative),
                                      example("t3", {1.0}, Label::positive)};
    return p;
}

}  // namespace

TEST_CASE("init_learner draws from the prior") {
    TeachingProblem p = threshold_problem(1.0);
    p.hypothesis_class.prior = {0.0, 0.0, 1.0, 0.0};
    const LearnerModel certain(p);
    for (std::uint64_t s = 0; s < 200; ++s) CHECK(init_learner(certain, s).current_index == 2);

    const LearnerModel uniform(threshold_problem(1.0));
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int s = 0; s < n; ++s) ++counts[init_learner(uniform, static_cast<std::uint64_t>(s)).current_index];
    for (int c : counts) CHECK(std::abs(c / double(n) - 0.25) <= 0.01);

    const LearnerState a = init_learner(uniform, 99);
    const LearnerState b = init_learner(uniform, 99);
    CHECK(a.current_index == b.current_index);
    CHECK(a.tracker == b.tracker);
    CHECK(a.step == 0);
}

TEST_CASE("consistent example keeps the hypothesis") {
    const LearnerModel model(threshold_problem(2.0));
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        LearnerState s = init_learner(model, rng);
        const std::size_t before = s.current_index;
        // "a" (x = -2.5, negative) is consistent with every threshold.
        s = learner_observe(s, model, "a", rng);
        CHECK(s.current_index == before);
        CHECK(s.step == 1);
    }
}

TEST_CASE("a mistaken hypothesis is kept with its likelihood, else redrawn from P_t") {
    const LearnerModel model(two_hypothesis_problem());
    // h1 mislabels x1 with P(y | h1, x1) = 0.2, so P_1 = (5/6, 1/6).
    Rng rng(2014);
    const int n = 100000;
    int from_h1 = 0;
    int marginal = 0;
    for (int i = 0; i < n; ++i) {
        LearnerState s{1, PosteriorTracker(model), 0};
        s = learner_observe(s, model, "x1", rng);
        if (s.current_index == 0) ++from_h1;
        LearnerState fresh = init_learner(model, rng);
        fresh = learner_observe(fresh, model, "x1", rng);
        if (fresh.current_index == 0) ++marginal;
    }
    CHECK(std::abs(from_h1 / double(n) - 0.8 * 5.0 / 6.0) <= 0.01);
    CHECK(std::abs(marginal / double(n) - 5.0 / 6.0) <= 0.01);
}

TEST_CASE("alpha 1e6 resamples onto consistent hypotheses") {
    const LearnerModel model(threshold_problem(1e6));
    Rng rng(5);
    const std::size_t c = model.example_index("d");  // x = 1, positive; |h(x)| ≥ 0.5
    int consistent = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        LearnerState s{3, PosteriorTracker(model), 0};  // threshold 1.5 mislabels x = 1
        learner_observe_in_place(s, model, c, rng);
        if (!model.inconsistent(s.current_index, c)) ++consistent;
    }
    CHECK(consistent == n);
}

TEST_CASE("learner_observe rejects duplicates") {
    const LearnerModel model(two_hypothesis_problem());
    Rng rng(1);
    LearnerState s = init_learner(model, rng);
    s = learner_observe(s, model, "x1", rng);
    CHECK_THROWS_AS((void)learner_observe(s, model, "x1", rng), UsageError);
    CHECK_THROWS_AS((void)learner_observe(s, model, "missing", rng), UsageError);
}

TEST_CASE("learner_predict uses the current hypothesis") {
    const LearnerModel model(two_hypothesis_problem());
    const LearnerState at_target{0, PosteriorTracker(model), 0};
    for (const auto& e : model.problem().teaching_set) CHECK(learner_predict(at_target, model, e.features) == e.label);
    const LearnerState at_h1{1, PosteriorTracker(model), 0};
    CHECK(learner_predict(at_h1, model, std::vector<double>{1.0}) == Label::negative);
    CHECK(learner_predict(at_h1, model, std::vector<double>{3.0}) == Label::positive);
}

TEST_CASE("rollout") {
    const LearnerModel noisy(threshold_problem(2.0));

    SUBCASE("empty sequence leaves h_1 ~ P0") {
        std::array<int, 4> counts{};
        const int n = 40000;
        const std::vector<std::string> none;
        for (int s = 0; s < n; ++s) {
            const auto trace = rollout(noisy, std::span<const std::string>(none), static_cast<std::uint64_t>(s));
            REQUIRE(trace.hypothesis_path.size() == 1);
            ++counts[trace.hypothesis_path[0]];
        }
        for (int c : counts) CHECK(std::abs(c / double(n) - 0.25) <= 0.015);
    }

    SUBCASE("noise-free elimination reaches zero test error") {
        const LearnerModel sharp(threshold_problem(1e6));
        const std::vector<std::string> seq{"b", "c", "d"};
        for (std::uint64_t s = 0; s < 2000; ++s) {
            const auto trace = rollout(sharp, std::span<const std::string>(seq), s);
            REQUIRE(trace.final_test_error.has_value());
            CHECK(*trace.final_test_error == 0.0);
            CHECK(trace.hypothesis_path.back() == 2);
        }
    }

    SUBCASE("fixed seed gives an identical trace") {
        const std::vector<std::string> seq{"c", "b", "e", "d"};
        const auto a = rollout(noisy, std::span<const std::string>(seq), 77);
        const auto b = rollout(noisy, std::span<const std::string>(seq), 77);
        CHECK(a.hypothesis_path == b.hypothesis_path);
        CHECK(a.switch_steps == b.switch_steps);
        CHECK(a.final_test_error == b.final_test_error);
        CHECK(a.hypothesis_path.size() == seq.size() + 1);
        for (std::size_t t : a.switch_steps) {
            CHECK(t >= 1);
            CHECK(t <= seq.size());
        }
    }

    SUBCASE("errors propagate") {
        const std::vector<std::string> dup{"c", "c"};
        CHECK_THROWS_AS((void)rollout(noisy, std::span<const std::string>(dup), 1), UsageError);
    }
}

TEST_CASE("categorical skips zero-probability entries") {
    Rng rng(4);
    const std::vector<double> p{0.0, 0.3, 0.0, 0.7, 0.0};
    std::array<int, 5> counts{};
    for (int i = 0; i < 20000; ++i) ++counts[rng.categorical(p)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(counts[4] == 0);
    CHECK(std::abs(counts[1] / 20000.0 - 0.3) <= 0.02);
}

TEST_CASE("derived seeds are distinct across streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}
