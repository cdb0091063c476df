#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdteach/core.hpp"

namespace crowdteach {

enum class TeachStatus { tolerance_met, exhausted, unreachable };

[[nodiscard]] std::string_view to_string(TeachStatus status) noexcept;
/// Throws ParseError on an unknown name.
[[nodiscard]] TeachStatus teach_status_from_string(std::string_view name);

struct TeachConfig {
    /// Target expected learner error ε, in (0, 1).
    double epsilon = 0.05;
    std::optional<std::size_t> max_len;
    /// α assumed by the teacher; defaults to the problem's α.
    std::optional<double> teacher_alpha;
};

struct StepDiagnostics {
    /// F(A) after adding the step's example.
    double f_value = 0.0;
    double marginal_gain = 0.0;
    /// core difficulty of the picked example under the pre-update posterior.
    double difficulty = 0.0;
    /// (E - F(A)) / P0(h*), an upper bound on E[err_L | A].
    double expected_error_upper_bound = 0.0;

    bool operator==(const StepDiagnostics&) const = default;
};

struct TeachingSequence {
    std::string policy;
    std::vector<std::string> example_ids;
    std::vector<StepDiagnostics> per_step;
    TeachStatus status = TeachStatus::exhausted;

    bool operator==(const TeachingSequence&) const = default;
};

/// F(A) = Σ_h (P0(h) - Q(h | A))·err(h, h*), evaluated from the tracker's
/// log weights.
[[nodiscard]] double surrogate_F(const PosteriorTracker& tracker, const LearnerModel& model);
/// F for a set of example indices / ids (no repeats).
[[nodiscard]] double surrogate_F(const LearnerModel& model, std::span<const std::size_t> set);
[[nodiscard]] double surrogate_F(const LearnerModel& model, std::span<const std::string> ids);

/// F(A ∪ {x}) - F(A) = Σ_{h inconsistent with x} Q(h | A)·err(h, h*)·(1 - P(y|h, x)).
/// Zero if x is already in A.
[[nodiscard]] double marginal_gain(const PosteriorTracker& tracker, const LearnerModel& model,
                                   std::size_t example_index);

/// STRICT: greedy on F until F(A) ≥ E - P0(h*)·ε. Ties go to the lowest
/// example index.
[[nodiscard]] TeachingSequence strict_teach(const TeachingProblem& problem,
                                            const TeachConfig& config);
/// Variant taking the teacher's model directly (its α is the teacher α).
[[nodiscard]] TeachingSequence strict_teach(const LearnerModel& teacher, double epsilon,
                                            std::optional<std::size_t> max_len);

/// Noise-free greedy weighted coverage: each pick eliminates the largest
/// P0·err mass of still-surviving hypotheses; after full elimination the
/// remaining picks are uniform without replacement. Stops at min(max_len, |X|).
[[nodiscard]] TeachingSequence setcover_teach(const TeachingProblem& problem,
                                              std::size_t max_len, std::uint64_t seed);

/// Uniform sample without replacement. Throws UsageError if max_len > |X|.
[[nodiscard]] TeachingSequence random_teach(const TeachingProblem& problem, std::size_t max_len,
                                            std::uint64_t seed);

struct ErrorCertificate {
    double upper = 0.0;
    double lower = 0.0;
};

/// Bracket on E[err_L | A]: lower = max(0, E - F(A)), upper = (E - F(A)) / P0(h*).
[[nodiscard]] ErrorCertificate error_certificate(const LearnerModel& model,
                                                 std::span<const std::size_t> set);
[[nodiscard]] ErrorCertificate error_certificate(const PosteriorTracker& tracker,
                                                 const LearnerModel& model);

/// Fills per-step diagnostics for an arbitrary sequence under `model`.
[[nodiscard]] std::vector<StepDiagnostics> diagnose_sequence(const LearnerModel& model,
                                                             std::span<const std::size_t> sequence);

/// Converts ids to teaching-set indices (throws UsageError on unknown ids).
[[nodiscard]] std::vector<std::size_t> to_indices(const LearnerModel& model,
                                                  std::span<const std::string> ids);

}  // namespace crowdteach
