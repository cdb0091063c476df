#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crowdteach {

// ─── Domain types ─────────────────────────────────────────────

enum class Label : std::int8_t { negative = -1, positive = 1 };

[[nodiscard]] constexpr int to_int(Label y) noexcept { return static_cast<int>(y); }
[[nodiscard]] constexpr Label opposite(Label y) noexcept {
    return y == Label::positive ? Label::negative : Label::positive;
}
/// Throws UsageError unless v is -1 or +1.
[[nodiscard]] Label label_from_int(long long v);

/// A teachable item. `asset` is an opaque display reference (image URL or
/// path) used only by the session service.
struct Example {
    std::string id;
    std::vector<double> features;
    Label label = Label::positive;
    std::optional<std::string> asset;

    bool operator==(const Example&) const = default;
};

/// Linear scoring function w·x + b.
struct Hypothesis {
    std::vector<double> weights;
    double offset = 0.0;

    /// Throws UsageError on dimension mismatch.
    [[nodiscard]] double score(std::span<const double> x) const;

    bool operator==(const Hypothesis&) const = default;
};

struct HypothesisClass {
    std::vector<Hypothesis> hypotheses;
    std::vector<double> prior;
    std::size_t target_index = 0;

    bool operator==(const HypothesisClass&) const = default;
};

struct TeachingProblem {
    std::vector<Example> teaching_set;
    HypothesisClass hypothesis_class;
    double alpha = 1.0;
    std::optional<std::vector<Example>> test_set;

    bool operator==(const TeachingProblem&) const = default;
};

/// Tolerance on probability vectors summing to one.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Checks every TeachingProblem invariant; throws ValidationError naming the
/// first violation (for realizability, the offending example id).
void validate(const TeachingProblem& problem);

// ─── Elementary quantities ────────────────────────────────────

/// sgn(w·x + b) with sgn(0) = +1.
[[nodiscard]] Label predict(const Hypothesis& h, std::span<const double> x);
[[nodiscard]] inline Label predict(const Hypothesis& h, const Example& x) {
    return predict(h, x.features);
}

/// log σ(z) = -log(1 + e^{-z}), accurate for large |z|.
[[nodiscard]] double log_sigmoid(double z) noexcept;

/// Logistic confidence P(y | h, x) = 1 / (1 + exp(-α·h(x)·y)).
[[nodiscard]] double likelihood(const Hypothesis& h, std::span<const double> x, Label y,
                                double alpha);
[[nodiscard]] double log_likelihood(const Hypothesis& h, std::span<const double> x, Label y,
                                    double alpha);

/// Fraction of the teaching set on which h and the target disagree.
/// Throws UsageError on an empty teaching set.
[[nodiscard]] double error_rate(const Hypothesis& h, const TeachingProblem& problem);

/// Fraction of `examples` that h labels differently from their ground truth.
[[nodiscard]] double labeling_error(const Hypothesis& h, std::span<const Example> examples);

/// Binary entropy in bits; 0 at p ∈ {0, 1}.
[[nodiscard]] double binary_entropy(double p) noexcept;

/// Log of Σ exp(v), stable.
[[nodiscard]] double log_sum_exp(std::span<const double> values) noexcept;

// ─── LearnerModel ─────────────────────────────────────────────

/// A validated problem together with everything the posterior computations
/// need at a fixed confidence scale α: predictions, per-(h, x) log penalties
/// (log-likelihood when h is inconsistent with x, 0 otherwise), err(h, h*).
///
/// Teacher and learner may hold models of the same problem at different α.
class LearnerModel {
public:
    explicit LearnerModel(TeachingProblem problem);
    LearnerModel(TeachingProblem problem, double alpha);

    [[nodiscard]] const TeachingProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::size_t num_hypotheses() const noexcept { return num_h_; }
    [[nodiscard]] std::size_t num_examples() const noexcept { return num_x_; }
    [[nodiscard]] std::size_t target_index() const noexcept {
        return problem_.hypothesis_class.target_index;
    }
    [[nodiscard]] const Example& example(std::size_t i) const { return problem_.teaching_set[i]; }
    [[nodiscard]] const Hypothesis& hypothesis(std::size_t h) const {
        return problem_.hypothesis_class.hypotheses[h];
    }

    /// Index of an example id; throws UsageError if unknown.
    [[nodiscard]] std::size_t example_index(std::string_view id) const;

    [[nodiscard]] std::span<const double> log_prior() const noexcept { return log_prior_; }
    [[nodiscard]] std::span<const double> prior() const noexcept {
        return problem_.hypothesis_class.prior;
    }
    [[nodiscard]] double prior_target() const noexcept { return prior()[target_index()]; }

    [[nodiscard]] double log_penalty(std::size_t h, std::size_t x) const noexcept {
        return log_penalty_[h * num_x_ + x];
    }
    [[nodiscard]] bool inconsistent(std::size_t h, std::size_t x) const noexcept {
        return inconsistent_[h * num_x_ + x] != 0;
    }
    [[nodiscard]] bool predicts_positive(std::size_t h, std::size_t x) const noexcept {
        return positive_[h * num_x_ + x] != 0;
    }

    /// err(h, h*) over the teaching set.
    [[nodiscard]] double error(std::size_t h) const noexcept { return error_[h]; }
    [[nodiscard]] std::span<const double> errors() const noexcept { return error_; }

    /// E = Σ_h P0(h)·err(h, h*), the learner's expected error before teaching.
    [[nodiscard]] double prior_expected_error() const noexcept { return prior_error_; }

private:
    TeachingProblem problem_;
    double alpha_;
    std::size_t num_h_ = 0;
    std::size_t num_x_ = 0;
    std::vector<double> log_prior_;
    std::vector<double> log_penalty_;
    std::vector<std::uint8_t> inconsistent_;
    std::vector<std::uint8_t> positive_;
    std::vector<double> error_;
    double prior_error_ = 0.0;
    std::unordered_map<std::string, std::size_t> index_;
};

// ─── PosteriorTracker ─────────────────────────────────────────

/// Unnormalized learner posterior log Q(h | A) for the set A of shown
/// examples. h* is never penalized, so Z(A) ≥ P0(h*) > 0.
class PosteriorTracker {
public:
    /// State for A = ∅ (log weights = log prior).
    explicit PosteriorTracker(const LearnerModel& model);

    [[nodiscard]] std::span<const double> log_weights() const noexcept { return log_weights_; }
    /// Example indices in the order they were shown.
    [[nodiscard]] const std::vector<std::size_t>& shown() const noexcept { return shown_; }
    [[nodiscard]] bool has_shown(std::size_t example_index) const noexcept {
        return example_index < shown_mask_.size() && shown_mask_[example_index] != 0;
    }
    [[nodiscard]] double log_normalizer() const noexcept { return log_sum_exp(log_weights_); }

    /// In-place posterior update with one more example; throws UsageError on a
    /// repeat or an out-of-range index.
    void observe(const LearnerModel& model, std::size_t example_index);

    bool operator==(const PosteriorTracker&) const = default;

private:
    std::vector<double> log_weights_;
    std::vector<std::size_t> shown_;
    std::vector<std::uint8_t> shown_mask_;
};

[[nodiscard]] PosteriorTracker update_tracker(const PosteriorTracker& tracker,
                                              const LearnerModel& model,
                                              std::string_view example_id);
[[nodiscard]] PosteriorTracker update_tracker(const PosteriorTracker& tracker,
                                              const LearnerModel& model,
                                              std::size_t example_index);

/// P(h | A) = Q(h | A) / Z(A).
[[nodiscard]] std::vector<double> normalized_posterior(const PosteriorTracker& tracker);

/// E[err_L | A] = Σ_h P(h | A)·err(h, h*).
[[nodiscard]] double expected_error(const PosteriorTracker& tracker, const LearnerModel& model);

/// Binary entropy of the posterior-predicted label of x:
/// p = Σ_h P(h | A)·1[sgn(h(x)) = +1].
[[nodiscard]] double difficulty(const PosteriorTracker& tracker, const LearnerModel& model,
                                std::span<const double> features);
[[nodiscard]] double difficulty(const PosteriorTracker& tracker, const LearnerModel& model,
                                std::size_t example_index);

/// Posterior-expected entropy of the label a learner holding h would
/// assign to x: Σ_h P(h | A)·H(σ(α·h(x))), with α the model's.
[[nodiscard]] double expected_entropy(const PosteriorTracker& tracker, const LearnerModel& model,
                                      std::span<const double> features);
[[nodiscard]] double expected_entropy(const PosteriorTracker& tracker, const LearnerModel& model,
                                      std::size_t example_index);

}  // namespace crowdteach
