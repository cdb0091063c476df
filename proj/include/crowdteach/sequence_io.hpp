#pragma once

#include <string>
#include <string_view>

#include "crowdteach/teach.hpp"

namespace crowdteach {

/// Sequence file (JSON):
///
///   {
///     "policy": "strict",
///     "status": "tolerance_met" | "exhausted" | "unreachable",
///     "example_ids": ["train-012", ...],
///     "per_step": [{"F": 0.31, "gain": 0.31, "difficulty": 0.12,
///                   "error_upper_bound": 0.4}, ...]
///   }
///
/// `error_upper_bound` is optional on input; unknown fields are ignored.
[[nodiscard]] std::string serialize_sequence(const TeachingSequence& sequence);
[[nodiscard]] TeachingSequence parse_sequence(std::string_view text);

[[nodiscard]] TeachingSequence load_sequence(const std::string& path);
void save_sequence(const TeachingSequence& sequence, const std::string& path);

}  // namespace crowdteach
