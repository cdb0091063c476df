#pragma once

#include <string>
#include <string_view>

#include "crowdteach/core.hpp"

namespace crowdteach {

/// Problem file (UTF-8 JSON):
///
///   {
///     "alpha": 2.0,
///     "examples": [{"id": "a", "x": [0.1, 0.2], "y": 1, "asset": "img/a.png"}, ...],
///     "hypotheses": [{"w": [1.0, 0.0], "b": 0.0}, ...],
///     "prior": [0.5, 0.5],
///     "target_index": 0,
///     "test_examples": [...]          // optional, same shape as examples
///   }
///
/// Unknown fields are ignored. Numbers are written with round-trip precision.

/// Parses and validates. Throws ParseError (with line or field path) on
/// malformed input and ValidationError when the problem invariants fail.
[[nodiscard]] TeachingProblem parse_problem(std::string_view text);
[[nodiscard]] std::string serialize_problem(const TeachingProblem& problem);

/// File wrappers; IoError when the file cannot be read or written.
[[nodiscard]] TeachingProblem load_problem(const std::string& path);
void save_problem(const TeachingProblem& problem, const std::string& path);

/// Whole-file read/write helpers shared by the file formats.
[[nodiscard]] std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace crowdteach
