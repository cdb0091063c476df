#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdteach/core.hpp"
#include "crowdteach/rng.hpp"
#include "crowdteach/teach.hpp"

namespace crowdteach {

/// Examples of the teaching set that every hypothesis labels identically:
/// the realized trace of one polytope of the hypothesis arrangement.
struct Cell {
    /// sgn(h(x)) for each hypothesis, shared by all members.
    std::vector<std::int8_t> signature;
    /// Teaching-set indices, ascending.
    std::vector<std::size_t> members;

    bool operator==(const Cell&) const = default;
};

struct RGTPConfig {
    /// Conservative weight the teacher applies to inconsistent hypotheses.
    double w_o = 0.5;
    /// Stop once 1 - p(h*) ≤ epsilon.
    double epsilon = 0.1;
    /// Defaults to |X|.
    std::optional<std::size_t> max_len;
};

enum class RgtpCase {
    /// Two neighboring cells of opposite belief polarity.
    bipolar_pair,
    /// No bipolar pair; the least-polarized cell was used.
    least_polarized,
};

struct RgtpChoice {
    std::size_t example_index = 0;
    RgtpCase kind = RgtpCase::least_polarized;
    /// Cell the example came from.
    std::size_t cell = 0;
    /// For a bipolar pair, the two candidate cells (cell is one of them).
    std::optional<std::pair<std::size_t, std::size_t>> pair;
};

struct RgtpStepInfo {
    RgtpChoice choice;
    /// E[η_{t+1} / η_t] over the policy's randomization, given p_t.
    double expected_eta_ratio = 0.0;
    /// η_{t+1} / η_t actually realized.
    double realized_eta_ratio = 0.0;
    /// The pick came from a bipolar pair or a cell of zero belief polarity,
    /// i.e. a situation the (3 + w_o)/4 decay argument covers.
    bool bound_applies = false;
};

struct BeliefTrace {
    /// p^(0) .. p^(T).
    std::vector<std::vector<double>> belief_path;
    /// η_0 .. η_T, η = (1 - p(h*)) / p(h*).
    std::vector<double> eta_path;
    std::vector<std::string> chosen;
    std::vector<RgtpStepInfo> steps;
};

struct RgtpResult {
    TeachingSequence sequence;
    BeliefTrace trace;
};

/// Partition of the teaching set by hypothesis sign signature. Cells are
/// ordered by their first member.
[[nodiscard]] std::vector<Cell> build_cells(const LearnerModel& model);

/// True iff the signatures differ in exactly one hypothesis. Throws
/// UsageError for identical or incompatible signatures.
[[nodiscard]] bool neighbors(const Cell& a, const Cell& b);

/// λ: the smallest realized cell size.
[[nodiscard]] std::size_t richness(std::span<const Cell> cells);
[[nodiscard]] std::size_t richness(const LearnerModel& model);

/// Σ_h p(h)·sgn(h(P)).
[[nodiscard]] double cell_polarity(std::span<const double> belief, const Cell& cell);

/// True when every hypothesis gives the cell the same label.
[[nodiscard]] bool unanimous(const Cell& cell) noexcept;

/// One RGTP selection. `shown` (indexed by example, may be empty) marks
/// examples already used; cells with no unused member are skipped. Returns
/// nullopt when no cell carries any disagreement.
[[nodiscard]] std::optional<RgtpChoice> rgtp_step(std::span<const double> belief,
                                                  std::span<const Cell> cells,
                                                  std::span<const std::uint8_t> shown, Rng& rng);

/// p'(h) ∝ p(h)·w_o^{[h mislabels x]}.
[[nodiscard]] std::vector<double> rgtp_teacher_update(std::span<const double> belief,
                                                      std::size_t example_index,
                                                      const LearnerModel& model, double w_o);

/// η = (1 - p(h*)) / p(h*).
[[nodiscard]] double eta(std::span<const double> belief, std::size_t target_index);

/// Exact E[η_{t+1} / η_t | p_t] for a choice (the pair is averaged 50/50).
[[nodiscard]] double expected_eta_ratio(std::span<const double> belief,
                                        std::span<const Cell> cells, const RgtpChoice& choice,
                                        const LearnerModel& model, double w_o);

/// Runs RGTP from the prior. Status is unreachable if no informative
/// cell remains while above tolerance.
[[nodiscard]] RgtpResult rgtp_teach(const TeachingProblem& problem, const RGTPConfig& config,
                                    std::uint64_t seed);

/// ((1-ε)(1-p0*) / (ε·p0*))·exp(-m(1 - w_o)/4).
[[nodiscard]] double rgtp_tail_bound(double epsilon, double prior_target, double w_o,
                                     std::size_t m);
/// 8·ln²(2/ε).
[[nodiscard]] double rich_teaching_length(double epsilon);

/// CSV with header `step,p_target,eta`.
void write_belief_csv(const BeliefTrace& trace, std::size_t target_index,
                      const std::string& path);

}  // namespace crowdteach
