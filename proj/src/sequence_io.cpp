#include "crowdteach/sequence_io.hpp"

#include <unordered_set>

#include <json.hpp>

#include "crowdteach/error.hpp"
#include "crowdteach/problem_io.hpp"
#include "json_fields.hpp"

namespace crowdteach {

using json = nlohmann::ordered_json;

std::string serialize_sequence(const TeachingSequence& sequence) {
    json root;
    root["policy"] = sequence.policy;
    root["status"] = std::string(to_string(sequence.status));
    root["example_ids"] = sequence.example_ids;
    json steps = json::array();
    for (const auto& s : sequence.per_step) {
        json o;
        o["F"] = s.f_value;
        o["gain"] = s.marginal_gain;
        o["difficulty"] = s.difficulty;
        o["error_upper_bound"] = s.expected_error_upper_bound;
        steps.push_back(std::move(o));
    }
    root["per_step"] = std::move(steps);
    return root.dump(2) + "\n";
}

TeachingSequence parse_sequence(std::string_view text) {
    using detail::field;
    using detail::require_number;
    using detail::require_string;

    const json root = detail::parse_json(text);
    if (!root.is_object()) throw ParseError("line 1: top level must be an object");

    TeachingSequence seq;
    seq.policy = require_string(field(root, "policy", ""), "policy");
    seq.status = teach_status_from_string(require_string(field(root, "status", ""), "status"));

    const json& ids = field(root, "example_ids", "");
    detail::require_array(ids, "example_ids");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string path = "example_ids[" + std::to_string(i) + "]";
        const std::string& id = require_string(ids[i], path);
        if (!seen.insert(id).second) throw ParseError(path + ": repeated example id '" + id + "'");
        seq.example_ids.push_back(id);
    }

    if (auto it = root.find("per_step"); it != root.end()) {
        detail::require_array(*it, "per_step");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string here = "per_step[" + std::to_string(i) + "]";
            const json& s = (*it)[i];
            if (!s.is_object()) throw ParseError(here + ": expected an object");
            StepDiagnostics d;
            d.f_value = require_number(field(s, "F", here), here + ".F");
            d.marginal_gain = require_number(field(s, "gain", here), here + ".gain");
            d.difficulty = require_number(field(s, "difficulty", here), here + ".difficulty");
            if (auto b = s.find("error_upper_bound"); b != s.end()) {
                d.expected_error_upper_bound = require_number(*b, here + ".error_upper_bound");
            }
            seq.per_step.push_back(d);
        }
        if (seq.per_step.size() != seq.example_ids.size()) {
            throw ParseError("per_step: length differs from example_ids");
        }
    }
    return seq;
}

TeachingSequence load_sequence(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_sequence(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_sequence(const TeachingSequence& sequence, const std::string& path) {
    write_text_file(path, serialize_sequence(sequence));
}

}  // namespace crowdteach
