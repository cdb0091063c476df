#include "crowdteach/teach.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crowdteach/error.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach {

std::string_view to_string(TeachStatus status) noexcept {
    switch (status) {
        case TeachStatus::tolerance_met: return "tolerance_met";
        case TeachStatus::exhausted: return "exhausted";
        case TeachStatus::unreachable: return "unreachable";
    }
    return "exhausted";
}

TeachStatus teach_status_from_string(std::string_view name) {
    if (name == "tolerance_met") return TeachStatus::tolerance_met;
    if (name == "exhausted") return TeachStatus::exhausted;
    if (name == "unreachable") return TeachStatus::unreachable;
    throw ParseError("unknown teaching status '" + std::string(name) + "'");
}

double surrogate_F(const PosteriorTracker& tracker, const LearnerModel& model) {
    const auto lw = tracker.log_weights();
    const auto lp = model.log_prior();
    double f = 0.0;
    for (std::size_t h = 0; h < lw.size(); ++h) {
        const double err = model.error(h);
        if (err == 0.0 || model.prior()[h] == 0.0) continue;
        // P0·(1 - Q/P0) with the ratio kept in log space.
        f += model.prior()[h] * err * -std::expm1(lw[h] - lp[h]);
    }
    return f;
}

double surrogate_F(const LearnerModel& model, std::span<const std::size_t> set) {
    PosteriorTracker tracker(model);
    for (std::size_t x : set) tracker.observe(model, x);
    return surrogate_F(tracker, model);
}

double surrogate_F(const LearnerModel& model, std::span<const std::string> ids) {
    const auto indices = to_indices(model, ids);
    return surrogate_F(model, indices);
}

double marginal_gain(const PosteriorTracker& tracker, const LearnerModel& model,
                     std::size_t example_index) {
    if (tracker.has_shown(example_index)) return 0.0;
    const auto lw = tracker.log_weights();
    double gain = 0.0;
    for (std::size_t h = 0; h < lw.size(); ++h) {
        if (!model.inconsistent(h, example_index)) continue;
        const double err = model.error(h);
        gain += std::exp(lw[h]) * err * -std::expm1(model.log_penalty(h, example_index));
    }
    return gain;
}

std::vector<std::size_t> to_indices(const LearnerModel& model, std::span<const std::string> ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(model.example_index(id));
    return out;
}

namespace {

StepDiagnostics record_step(PosteriorTracker& tracker, const LearnerModel& model,
                            std::size_t x) {
    StepDiagnostics d;
    d.difficulty = difficulty(tracker, model, x);
    d.marginal_gain = marginal_gain(tracker, model, x);
    tracker.observe(model, x);
    d.f_value = surrogate_F(tracker, model);
    d.expected_error_upper_bound =
        (model.prior_expected_error() - d.f_value) / model.prior_target();
    return d;
}

}  // namespace

TeachingSequence strict_teach(const LearnerModel& teacher, double epsilon,
                              std::optional<std::size_t> max_len) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("epsilon must lie in (0, 1)");
    if (max_len && *max_len < 1) throw UsageError("max_len must be at least 1");

    TeachingSequence seq;
    seq.policy = "strict";
    PosteriorTracker tracker(teacher);
    const double threshold =
        teacher.prior_expected_error() - teacher.prior_target() * epsilon;
    double f = 0.0;
    const std::size_t n = teacher.num_examples();

    while (f < threshold) {
        if (max_len && seq.example_ids.size() >= *max_len) {
            seq.status = TeachStatus::exhausted;
            return seq;
        }
        std::size_t best = n;
        double best_gain = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            if (tracker.has_shown(x)) continue;
            const double g = marginal_gain(tracker, teacher, x);
            if (best == n || g > best_gain) {
                best = x;
                best_gain = g;
            }
        }
        if (best == n || !(best_gain > 0.0)) {
            seq.status = TeachStatus::unreachable;
            return seq;
        }
        seq.per_step.push_back(record_step(tracker, teacher, best));
        seq.example_ids.push_back(teacher.example(best).id);
        f = seq.per_step.back().f_value;
    }
    seq.status = TeachStatus::tolerance_met;
    return seq;
}

TeachingSequence strict_teach(const TeachingProblem& problem, const TeachConfig& config) {
    const LearnerModel teacher(problem, config.teacher_alpha.value_or(problem.alpha));
    return strict_teach(teacher, config.epsilon, config.max_len);
}

TeachingSequence setcover_teach(const TeachingProblem& problem, std::size_t max_len,
                                std::uint64_t seed) {
    if (max_len < 1) throw UsageError("max_len must be at least 1");
    const LearnerModel model(problem);
    const std::size_t n = model.num_examples();
    const std::size_t nh = model.num_hypotheses();
    const std::size_t length = std::min(max_len, n);

    std::vector<double> mass(nh);
    for (std::size_t h = 0; h < nh; ++h) mass[h] = model.prior()[h] * model.error(h);
    std::vector<std::uint8_t> surviving(nh, 1);
    std::vector<std::uint8_t> picked(n, 0);
    std::vector<std::size_t> order;
    order.reserve(length);

    while (order.size() < length) {
        std::size_t best = n;
        double best_mass = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            if (picked[x]) continue;
            double m = 0.0;
            for (std::size_t h = 0; h < nh; ++h) {
                if (surviving[h] && model.inconsistent(h, x)) m += mass[h];
            }
            if (m > best_mass) {
                best = x;
                best_mass = m;
            }
        }
        if (best == n) break;  // every non-target-equivalent hypothesis eliminated
        picked[best] = 1;
        order.push_back(best);
        for (std::size_t h = 0; h < nh; ++h) {
            if (model.inconsistent(h, best)) surviving[h] = 0;
        }
    }

    if (order.size() < length) {
        std::vector<std::size_t> rest;
        for (std::size_t x = 0; x < n; ++x) {
            if (!picked[x]) rest.push_back(x);
        }
        Rng rng(seed);
        for (std::size_t i = 0; order.size() < length; ++i) {
            const std::size_t j = i + rng.index(rest.size() - i);
            std::swap(rest[i], rest[j]);
            order.push_back(rest[i]);
        }
    }

    TeachingSequence seq;
    seq.policy = "setcover";
    seq.status = TeachStatus::exhausted;
    seq.per_step = diagnose_sequence(model, order);
    for (std::size_t x : order) seq.example_ids.push_back(model.example(x).id);
    return seq;
}

TeachingSequence random_teach(const TeachingProblem& problem, std::size_t max_len,
                              std::uint64_t seed) {
    const LearnerModel model(problem);
    const std::size_t n = model.num_examples();
    if (max_len > n) {
        throw UsageError("max_len " + std::to_string(max_len) + " exceeds teaching set size " +
                         std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < max_len; ++i) {
        const std::size_t j = i + rng.index(n - i);
        std::swap(perm[i], perm[j]);
    }
    perm.resize(max_len);

    TeachingSequence seq;
    seq.policy = "random";
    seq.status = TeachStatus::exhausted;
    seq.per_step = diagnose_sequence(model, perm);
    for (std::size_t x : perm) seq.example_ids.push_back(model.example(x).id);
    return seq;
}

ErrorCertificate error_certificate(const PosteriorTracker& tracker, const LearnerModel& model) {
    const double gap = model.prior_expected_error() - surrogate_F(tracker, model);
    return {gap / model.prior_target(), std::max(0.0, gap)};
}

ErrorCertificate error_certificate(const LearnerModel& model, std::span<const std::size_t> set) {
    PosteriorTracker tracker(model);
    for (std::size_t x : set) tracker.observe(model, x);
    return error_certificate(tracker, model);
}

std::vector<StepDiagnostics> diagnose_sequence(const LearnerModel& model,
                                               std::span<const std::size_t> sequence) {
    std::vector<StepDiagnostics> out;
    out.reserve(sequence.size());
    PosteriorTracker tracker(model);
    for (std::size_t x : sequence) out.push_back(record_step(tracker, model, x));
    return out;
}

}  // namespace crowdteach
