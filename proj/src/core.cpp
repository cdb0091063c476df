#include "crowdteach/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "crowdteach/error.hpp"

namespace crowdteach {

Label label_from_int(long long v) {
    if (v == 1) return Label::positive;
    if (v == -1) return Label::negative;
    throw UsageError("label must be -1 or +1, got " + std::to_string(v));
}

double Hypothesis::score(std::span<const double> x) const {
    if (x.size() != weights.size()) {
        throw UsageError("dimension mismatch: hypothesis has " + std::to_string(weights.size()) +
                         " weights, example has " + std::to_string(x.size()) + " features");
    }
    double s = offset;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights[i] * x[i];
    return s;
}

Label predict(const Hypothesis& h, std::span<const double> x) {
    return h.score(x) >= 0.0 ? Label::positive : Label::negative;
}

double log_sigmoid(double z) noexcept {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

double log_likelihood(const Hypothesis& h, std::span<const double> x, Label y, double alpha) {
    return log_sigmoid(alpha * h.score(x) * to_int(y));
}

double likelihood(const Hypothesis& h, std::span<const double> x, Label y, double alpha) {
    return std::exp(log_likelihood(h, x, y, alpha));
}

double error_rate(const Hypothesis& h, const TeachingProblem& problem) {
    const auto& X = problem.teaching_set;
    if (X.empty()) throw UsageError("error_rate: empty teaching set");
    const auto& target =
        problem.hypothesis_class.hypotheses.at(problem.hypothesis_class.target_index);
    std::size_t disagree = 0;
    for (const auto& x : X) {
        if (predict(h, x) != predict(target, x)) ++disagree;
    }
    return static_cast<double>(disagree) / static_cast<double>(X.size());
}

double labeling_error(const Hypothesis& h, std::span<const Example> examples) {
    if (examples.empty()) throw UsageError("labeling_error: no examples");
    std::size_t wrong = 0;
    for (const auto& x : examples) {
        if (predict(h, x) != x.label) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(examples.size());
}

double binary_entropy(double p) noexcept {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double log_sum_exp(std::span<const double> values) noexcept {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

namespace {

void validate_examples(const std::vector<Example>& examples, std::size_t dim,
                       const char* what) {
    std::unordered_set<std::string> ids;
    for (const auto& x : examples) {
        if (!ids.insert(x.id).second) {
            throw ValidationError(std::string(what) + ": duplicate example id '" + x.id + "'");
        }
        if (x.features.size() != dim) {
            throw ValidationError(std::string(what) + ": example '" + x.id + "' has dimension " +
                                  std::to_string(x.features.size()) + ", expected " +
                                  std::to_string(dim));
        }
        for (double f : x.features) {
            if (!std::isfinite(f)) {
                throw ValidationError(std::string(what) + ": example '" + x.id +
                                      "' has a non-finite feature");
            }
        }
        if (x.label != Label::positive && x.label != Label::negative) {
            throw ValidationError(std::string(what) + ": example '" + x.id + "' has bad label");
        }
    }
}

}  // namespace

void validate(const TeachingProblem& problem) {
    const auto& hc = problem.hypothesis_class;
    if (hc.hypotheses.empty()) throw ValidationError("hypothesis class is empty");
    if (hc.prior.size() != hc.hypotheses.size()) {
        throw ValidationError("prior has " + std::to_string(hc.prior.size()) + " entries for " +
                              std::to_string(hc.hypotheses.size()) + " hypotheses");
    }
    if (hc.target_index >= hc.hypotheses.size()) {
        throw ValidationError("target_index " + std::to_string(hc.target_index) +
                              " out of range");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < hc.prior.size(); ++i) {
        const double p = hc.prior[i];
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError("prior[" + std::to_string(i) + "] is negative or non-finite");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
        throw ValidationError("prior sums to " + std::to_string(sum) + ", expected 1");
    }
    if (!(hc.prior[hc.target_index] > 0.0)) {
        throw ValidationError("prior of the target hypothesis must be positive");
    }
    if (!(problem.alpha > 0.0) || !std::isfinite(problem.alpha)) {
        throw ValidationError("alpha must be positive and finite");
    }
    if (problem.teaching_set.empty()) throw ValidationError("teaching set is empty");

    const std::size_t dim = hc.hypotheses.front().weights.size();
    for (std::size_t i = 0; i < hc.hypotheses.size(); ++i) {
        const auto& h = hc.hypotheses[i];
        if (h.weights.size() != dim) {
            throw ValidationError("hypothesis " + std::to_string(i) + " has dimension " +
                                  std::to_string(h.weights.size()) + ", expected " +
                                  std::to_string(dim));
        }
        const bool finite = std::isfinite(h.offset) &&
                            std::all_of(h.weights.begin(), h.weights.end(),
                                        [](double w) { return std::isfinite(w); });
        if (!finite) {
            throw ValidationError("hypothesis " + std::to_string(i) + " has non-finite entries");
        }
    }
    validate_examples(problem.teaching_set, dim, "teaching set");
    if (problem.test_set) validate_examples(*problem.test_set, dim, "test set");

    const auto& target = hc.hypotheses[hc.target_index];
    for (const auto& x : problem.teaching_set) {
        if (predict(target, x) != x.label) {
            throw ValidationError("not realizable: target mislabels example '" + x.id + "'");
        }
    }
}

// ─── LearnerModel ─────────────────────────────────────────────

LearnerModel::LearnerModel(TeachingProblem problem)
    : LearnerModel(std::move(problem), std::numeric_limits<double>::quiet_NaN()) {}

LearnerModel::LearnerModel(TeachingProblem problem, double alpha)
    : problem_(std::move(problem)), alpha_(std::isnan(alpha) ? problem_.alpha : alpha) {
    validate(problem_);
    if (!(alpha_ > 0.0) || std::isnan(alpha_)) {
        throw UsageError("alpha must be positive");
    }
    const auto& hc = problem_.hypothesis_class;
    num_h_ = hc.hypotheses.size();
    num_x_ = problem_.teaching_set.size();

    log_prior_.resize(num_h_);
    for (std::size_t h = 0; h < num_h_; ++h) log_prior_[h] = std::log(hc.prior[h]);

    log_penalty_.assign(num_h_ * num_x_, 0.0);
    inconsistent_.assign(num_h_ * num_x_, 0);
    positive_.assign(num_h_ * num_x_, 0);
    error_.assign(num_h_, 0.0);

    for (std::size_t h = 0; h < num_h_; ++h) {
        const auto& hyp = hc.hypotheses[h];
        std::size_t disagree = 0;
        for (std::size_t x = 0; x < num_x_; ++x) {
            const auto& ex = problem_.teaching_set[x];
            const double s = hyp.score(ex.features);
            const Label pred = s >= 0.0 ? Label::positive : Label::negative;
            const std::size_t k = h * num_x_ + x;
            positive_[k] = pred == Label::positive;
            // Realizability makes "disagrees with h*" and "mislabels x" the same event.
            if (pred != ex.label) {
                inconsistent_[k] = 1;
                log_penalty_[k] = log_sigmoid(alpha_ * s * to_int(ex.label));
                ++disagree;
            }
        }
        error_[h] = static_cast<double>(disagree) / static_cast<double>(num_x_);
    }
    for (std::size_t h = 0; h < num_h_; ++h) prior_error_ += hc.prior[h] * error_[h];

    index_.reserve(num_x_);
    for (std::size_t x = 0; x < num_x_; ++x) index_.emplace(problem_.teaching_set[x].id, x);
}

std::size_t LearnerModel::example_index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        throw UsageError("unknown example id '" + std::string(id) + "'");
    }
    return it->second;
}

// ─── PosteriorTracker ─────────────────────────────────────────

PosteriorTracker::PosteriorTracker(const LearnerModel& model)
    : log_weights_(model.log_prior().begin(), model.log_prior().end()),
      shown_mask_(model.num_examples(), 0) {}

void PosteriorTracker::observe(const LearnerModel& model, std::size_t example_index) {
    if (example_index >= model.num_examples() || shown_mask_.size() != model.num_examples()) {
        throw UsageError("example index out of range for this problem");
    }
    if (shown_mask_[example_index]) {
        throw UsageError("example '" + model.example(example_index).id + "' was already shown");
    }
    for (std::size_t h = 0; h < log_weights_.size(); ++h) {
        log_weights_[h] += model.log_penalty(h, example_index);
    }
    shown_mask_[example_index] = 1;
    shown_.push_back(example_index);
}

PosteriorTracker update_tracker(const PosteriorTracker& tracker, const LearnerModel& model,
                                std::size_t example_index) {
    PosteriorTracker next = tracker;
    next.observe(model, example_index);
    return next;
}

PosteriorTracker update_tracker(const PosteriorTracker& tracker, const LearnerModel& model,
                                std::string_view example_id) {
    return update_tracker(tracker, model, model.example_index(example_id));
}

std::vector<double> normalized_posterior(const PosteriorTracker& tracker) {
    const auto lw = tracker.log_weights();
    const double log_z = log_sum_exp(lw);
    std::vector<double> p(lw.size());
    for (std::size_t h = 0; h < lw.size(); ++h) p[h] = std::exp(lw[h] - log_z);
    return p;
}

double expected_error(const PosteriorTracker& tracker, const LearnerModel& model) {
    const auto p = normalized_posterior(tracker);
    double e = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) e += p[h] * model.error(h);
    return e;
}

double difficulty(const PosteriorTracker& tracker, const LearnerModel& model,
                  std::span<const double> features) {
    const auto p = normalized_posterior(tracker);
    double positive = 0.0;
    double negative = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        (predict(model.hypothesis(h), features) == Label::positive ? positive : negative) += p[h];
    }
    return binary_entropy(positive / (positive + negative));
}

double difficulty(const PosteriorTracker& tracker, const LearnerModel& model,
                  std::size_t example_index) {
    if (example_index >= model.num_examples()) throw UsageError("example index out of range");
    const auto p = normalized_posterior(tracker);
    double positive = 0.0;
    double negative = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        (model.predicts_positive(h, example_index) ? positive : negative) += p[h];
    }
    return binary_entropy(positive / (positive + negative));
}

double expected_entropy(const PosteriorTracker& tracker, const LearnerModel& model,
                        std::span<const double> features) {
    const auto p = normalized_posterior(tracker);
    double total = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        const double q = likelihood(model.hypothesis(h), features, Label::positive, model.alpha());
        total += p[h] * binary_entropy(q);
    }
    return total;
}

double expected_entropy(const PosteriorTracker& tracker, const LearnerModel& model,
                        std::size_t example_index) {
    if (example_index >= model.num_examples()) throw UsageError("example index out of range");
    return expected_entropy(tracker, model, model.example(example_index).features);
}

}  // namespace crowdteach
