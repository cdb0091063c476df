#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdteach/core.hpp"
#include "crowdteach/teach.hpp"

namespace crowdteach {

enum class PolicyKind { strict, setcover, random, rgtp };

[[nodiscard]] std::string_view to_string(PolicyKind kind) noexcept;
/// Throws UsageError on an unknown name.
[[nodiscard]] PolicyKind policy_from_string(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::strict;
    /// STRICT / RGTP tolerance. The default is small enough that STRICT
    /// normally runs to the requested length.
    double epsilon = 1e-6;
    /// STRICT teacher α; defaults to the problem's α.
    std::optional<double> teacher_alpha;
    /// RGTP conservative weight.
    double w_o = 0.5;
    /// Seed for randomized policies.
    std::uint64_t seed = 0;
};

/// Runs the policy, capped at max_len examples.
[[nodiscard]] TeachingSequence run_policy(const TeachingProblem& problem, const PolicySpec& spec,
                                          std::size_t max_len);

struct ReportRow {
    std::string policy;
    std::size_t teaching_length = 0;
    /// α values assigned round-robin to the population.
    std::vector<double> learner_alphas;
    double teacher_alpha = 0.0;
    std::size_t n_learners = 0;
    double mean_test_error = 0.0;
    double std_test_error = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const ReportRow&) const = default;
};

struct SimulationReport {
    std::vector<ReportRow> rows;

    bool operator==(const SimulationReport&) const = default;
};

/// Final test error of each learner i, who has α = learner_alphas[i % k] and
/// seed derive_seed(master_seed, i), after being taught `sequence`.
/// The problem must carry a nonempty test set.
[[nodiscard]] std::vector<double> population_test_errors(const TeachingProblem& problem,
                                                         std::span<const std::string> sequence,
                                                         std::size_t n_learners,
                                                         std::span<const double> learner_alphas,
                                                         std::uint64_t master_seed);

/// One row per requested length: the policy's sequence truncated to that
/// length, taught to the same simulated population.
[[nodiscard]] SimulationReport simulate_population(const TeachingProblem& problem,
                                                   const PolicySpec& spec,
                                                   std::span<const std::size_t> lengths,
                                                   std::size_t n_learners,
                                                   std::span<const double> learner_alphas,
                                                   std::uint64_t master_seed);

/// Σ_h P0(h)·(test error of h): expected test error of an untaught learner.
[[nodiscard]] double prior_expected_test_error(const TeachingProblem& problem);

struct Lemma1Result {
    double total_variation = 0.0;
    std::vector<double> empirical;
    /// P_{t-1} from the posterior tracker.
    std::vector<double> exact;
};

/// Compares the empirical distribution of h_t over independent rollouts with
/// P_{t-1}. Requires 1 ≤ t ≤ |sequence| + 1.
[[nodiscard]] Lemma1Result lemma1_check(const TeachingProblem& problem,
                                        std::span<const std::string> sequence, std::size_t t,
                                        std::size_t n_rollouts, std::uint64_t seed);

enum class DifficultyMeasure {
    /// core difficulty: entropy of the posterior-predicted label.
    label_entropy,
    /// core expected_entropy: posterior mean of each hypothesis's own label entropy.
    expected_entropy,
};

[[nodiscard]] std::string_view to_string(DifficultyMeasure measure) noexcept;
/// Accepts "label" and "expected"; throws UsageError otherwise.
[[nodiscard]] DifficultyMeasure difficulty_measure_from_string(std::string_view name);

/// Difficulty of each picked example just before it is shown.
[[nodiscard]] std::vector<double> difficulty_curve(
    const LearnerModel& model, std::span<const std::string> sequence,
    DifficultyMeasure measure = DifficultyMeasure::label_entropy);

struct WelchResult {
    double t = 0.0;
    double degrees_of_freedom = 0.0;
    double p_two_tailed = 1.0;
};

/// Welch's unequal-variance t-test. Throws UsageError if a sample has fewer
/// than two values or both variances are zero.
[[nodiscard]] WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct MeanStd {
    double mean = 0.0;
    /// Sample standard deviation (n - 1); 0 for a single value.
    double stddev = 0.0;
};
[[nodiscard]] MeanStd mean_std(std::span<const double> values);

/// Columns: policy,teaching_length,learner_alpha,teacher_alpha,n_learners,
/// mean_test_error,std_test_error,seed. learner_alpha lists the population's
/// α values joined by '|'.
[[nodiscard]] std::string report_to_csv(const SimulationReport& report);
[[nodiscard]] SimulationReport report_from_csv(std::string_view text);
void write_report_csv(const SimulationReport& report, const std::string& path);
[[nodiscard]] SimulationReport read_report_csv(const std::string& path);

/// Two columns: step,difficulty (steps are 1-based).
void write_difficulty_csv(std::span<const double> curve, const std::string& path);

}  // namespace crowdteach
