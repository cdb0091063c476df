#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "crowdteach/core.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach::testing {

struct InstanceShape {
    std::size_t min_examples = 2;
    std::size_t max_examples = 8;
    std::size_t min_hypotheses = 2;
    std::size_t max_hypotheses = 8;
    std::size_t dim = 2;
    bool uniform_prior = false;
    /// Every |h(x)| must be at least this (resampling points until it holds).
    double min_margin = 0.0;
    double min_alpha = 0.5;
    double max_alpha = 4.0;
    std::size_t test_examples = 0;
};

inline std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + rng.index(hi - lo + 1);
}

inline std::vector<double> draw_point(Rng& rng, std::size_t dim) {
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.normal(0.0, 1.0);
    return x;
}

inline bool clears_margin(const std::vector<Hypothesis>& hs, const std::vector<double>& x,
                          double margin) {
    for (const auto& h : hs) {
        if (std::abs(h.score(x)) < margin) return false;
    }
    return true;
}

/// Random realizable problem: Gaussian points and hyperplanes, labels from a
/// randomly chosen target, uniform or random (exponential) prior.
inline TeachingProblem random_instance(Rng& rng, const InstanceShape& shape = {}) {
    TeachingProblem p;
    const std::size_t nh = draw_between(rng, shape.min_hypotheses, shape.max_hypotheses);
    const std::size_t nx = draw_between(rng, shape.min_examples, shape.max_examples);
    for (std::size_t h = 0; h < nh; ++h) {
        Hypothesis hyp;
        hyp.weights = draw_point(rng, shape.dim);
        hyp.offset = rng.normal(0.0, 0.5);
        p.hypothesis_class.hypotheses.push_back(std::move(hyp));
    }
    const auto& hs = p.hypothesis_class.hypotheses;
    const std::size_t target = rng.index(nh);
    p.hypothesis_class.target_index = target;

    auto make_examples = [&](std::size_t n, const std::string& prefix) {
        std::vector<Example> out;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x = draw_point(rng, shape.dim);
            while (!clears_margin(hs, x, shape.min_margin)) x = draw_point(rng, shape.dim);
            Example e;
            e.id = prefix + std::to_string(i);
            e.label = predict(hs[target], x);
            e.features = std::move(x);
            out.push_back(std::move(e));
        }
        return out;
    };
    p.teaching_set = make_examples(nx, "x");
    if (shape.test_examples > 0) p.test_set = make_examples(shape.test_examples, "t");

    std::vector<double> prior(nh, 1.0);
    if (!shape.uniform_prior) {
        for (auto& v : prior) v = -std::log(1.0 - rng.uniform()) + 1e-3;
    }
    double sum = 0.0;
    for (double v : prior) sum += v;
    for (auto& v : prior) v /= sum;
    p.hypothesis_class.prior = std::move(prior);
    p.alpha = shape.min_alpha + (shape.max_alpha - shape.min_alpha) * rng.uniform();
    return p;
}

}  // namespace crowdteach::testing
