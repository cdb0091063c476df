#include "crowdteach/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "crowdteach/error.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%03zu", prefix, i);
    return buf;
}

/// Zero variance yields the mean exactly.
double draw(Rng& rng, double mean, double variance) {
    return variance > 0.0 ? rng.normal(mean, std::sqrt(variance)) : mean;
}

void fill_class(std::vector<Example>& out, const char* prefix, std::size_t count, Label label,
                const std::array<double, 2>& mean, const std::array<double, 2>& var, Rng& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        Example e;
        e.id = numbered(prefix, out.size());
        e.features = {draw(rng, mean[0], var[0]), draw(rng, mean[1], var[1])};
        e.label = label;
        out.push_back(std::move(e));
    }
}

}  // namespace

VWData generate_vw(const VWParams& params, std::uint64_t seed) {
    if (!(params.cov_diag[0] > 0.0 && params.cov_diag[1] > 0.0)) {
        throw UsageError("cov_diag entries must be positive");
    }
    if (params.n_train_per_class < 1 || params.n_test_per_class < 1) {
        throw UsageError("per-class counts must be at least 1");
    }
    Rng rng(seed);
    VWData data;
    const auto& c = params.cov_diag;
    fill_class(data.train, "train", params.n_train_per_class, Label::positive, params.mean_pos, c,
               rng);
    fill_class(data.train, "train", params.n_train_per_class, Label::negative, params.mean_neg, c,
               rng);
    fill_class(data.test, "test", params.n_test_per_class, Label::positive, params.mean_pos, c,
               rng);
    fill_class(data.test, "test", params.n_test_per_class, Label::negative, params.mean_neg, c,
               rng);
    return data;
}

std::vector<HypothesisDraw> sample_hypothesis_params(const HypothesisGenParams& params,
                                                     std::uint64_t seed) {
    if (params.per_cluster < 1) throw UsageError("per_cluster must be at least 1");
    if (params.param_cov[0] < 0.0 || params.param_cov[1] < 0.0) {
        throw UsageError("param_cov entries must be non-negative");
    }
    Rng rng(seed);
    std::vector<HypothesisDraw> draws;
    draws.reserve(params.n_clusters * params.per_cluster);
    for (std::size_t i = 0; i < params.n_clusters; ++i) {
        const double mean_angle = params.angle_mean_step * static_cast<double>(i);
        for (std::size_t k = 0; k < params.per_cluster; ++k) {
            HypothesisDraw d;
            d.cluster = i;
            d.angle = draw(rng, mean_angle, params.param_cov[0]);
            d.offset = draw(rng, 0.0, params.param_cov[1]);
            draws.push_back(d);
        }
    }
    return draws;
}

Hypothesis hypothesis_from_angle(double angle, double offset) {
    return Hypothesis{{std::cos(angle), std::sin(angle)}, offset};
}

std::vector<Hypothesis> generate_vw_hypotheses(const HypothesisGenParams& params,
                                               std::uint64_t seed) {
    std::vector<Hypothesis> out;
    for (const auto& d : sample_hypothesis_params(params, seed)) {
        out.push_back(hypothesis_from_angle(d.angle, d.offset));
    }
    return out;
}

std::size_t select_target(std::span<const Hypothesis> hypotheses,
                          std::span<const Example> examples) {
    if (hypotheses.empty()) throw UsageError("select_target: no hypotheses");
    std::size_t best = 0;
    std::size_t best_wrong = examples.size() + 1;
    for (std::size_t h = 0; h < hypotheses.size(); ++h) {
        std::size_t wrong = 0;
        for (const auto& x : examples) wrong += predict(hypotheses[h], x) != x.label;
        if (wrong < best_wrong) {
            best_wrong = wrong;
            best = h;
        }
    }
    return best;
}

std::vector<Example> enforce_realizability(std::span<const Example> examples,
                                           std::span<const Hypothesis> hypotheses,
                                           std::size_t target_index) {
    const Hypothesis& target = hypotheses[target_index];
    std::vector<Example> kept;
    for (const auto& x : examples) {
        if (predict(target, x) == x.label) kept.push_back(x);
    }
    if (kept.empty()) throw UsageError("target hypothesis mislabels every example");
    return kept;
}

TeachingProblem make_vw_problem(const VWParams& data_params,
                                const HypothesisGenParams& hypothesis_params, double alpha,
                                std::uint64_t seed) {
    auto data = generate_vw(data_params, derive_seed(seed, 0));
    auto hypotheses = generate_vw_hypotheses(hypothesis_params, derive_seed(seed, 1));
    const std::size_t target = select_target(hypotheses, data.train);

    TeachingProblem problem;
    problem.teaching_set = enforce_realizability(data.train, hypotheses, target);
    const std::size_t n = hypotheses.size();
    problem.hypothesis_class.prior.assign(n, 1.0 / static_cast<double>(n));
    problem.hypothesis_class.hypotheses = std::move(hypotheses);
    problem.hypothesis_class.target_index = target;
    problem.alpha = alpha;
    problem.test_set = std::move(data.test);
    validate(problem);
    return problem;
}

}  // namespace crowdteach
