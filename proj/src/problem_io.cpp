#include "crowdteach/problem_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crowdteach/error.hpp"
#include "json_fields.hpp"

namespace crowdteach {

namespace {

using json = nlohmann::ordered_json;
using detail::field;
using detail::require_array;
using detail::require_integer;
using detail::require_number;

std::vector<double> number_array(const json& j, const std::string& path) {
    require_array(j, path);
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(require_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<Example> parse_examples(const json& j, const std::string& path) {
    require_array(j, path);
    std::vector<Example> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string here = path + "[" + std::to_string(i) + "]";
        const json& e = j[i];
        if (!e.is_object()) throw ParseError(here + ": expected an object");
        Example ex;
        const json& id = field(e, "id", here);
        if (!id.is_string()) throw ParseError(here + ".id: expected a string");
        ex.id = id.get<std::string>();
        ex.features = number_array(field(e, "x", here), here + ".x");
        const long long y = require_integer(field(e, "y", here), here + ".y");
        if (y != 1 && y != -1) throw ParseError(here + ".y: expected -1 or 1");
        ex.label = label_from_int(y);
        if (auto it = e.find("asset"); it != e.end() && !it->is_null()) {
            if (!it->is_string()) throw ParseError(here + ".asset: expected a string");
            ex.asset = it->get<std::string>();
        }
        out.push_back(std::move(ex));
    }
    return out;
}

json examples_to_json(const std::vector<Example>& examples) {
    json arr = json::array();
    for (const auto& e : examples) {
        json o;
        o["id"] = e.id;
        o["x"] = e.features;
        o["y"] = to_int(e.label);
        if (e.asset) o["asset"] = *e.asset;
        arr.push_back(std::move(o));
    }
    return arr;
}

}  // namespace

TeachingProblem parse_problem(std::string_view text) {
    const json root = detail::parse_json(text);
    if (!root.is_object()) throw ParseError("line 1: top level must be an object");

    TeachingProblem p;
    p.alpha = require_number(field(root, "alpha", ""), "alpha");
    p.teaching_set = parse_examples(field(root, "examples", ""), "examples");

    const json& hyps = field(root, "hypotheses", "");
    require_array(hyps, "hypotheses");
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        const std::string here = "hypotheses[" + std::to_string(i) + "]";
        if (!hyps[i].is_object()) throw ParseError(here + ": expected an object");
        Hypothesis h;
        h.weights = number_array(field(hyps[i], "w", here), here + ".w");
        h.offset = require_number(field(hyps[i], "b", here), here + ".b");
        p.hypothesis_class.hypotheses.push_back(std::move(h));
    }
    p.hypothesis_class.prior = number_array(field(root, "prior", ""), "prior");
    const long long target = require_integer(field(root, "target_index", ""), "target_index");
    if (target < 0) throw ParseError("target_index: must be non-negative");
    p.hypothesis_class.target_index = static_cast<std::size_t>(target);
    if (auto it = root.find("test_examples"); it != root.end() && !it->is_null()) {
        p.test_set = parse_examples(*it, "test_examples");
    }
    validate(p);
    return p;
}

std::string serialize_problem(const TeachingProblem& problem) {
    json root;
    root["alpha"] = problem.alpha;
    root["examples"] = examples_to_json(problem.teaching_set);
    json hyps = json::array();
    for (const auto& h : problem.hypothesis_class.hypotheses) {
        json o;
        o["w"] = h.weights;
        o["b"] = h.offset;
        hyps.push_back(std::move(o));
    }
    root["hypotheses"] = std::move(hyps);
    root["prior"] = problem.hypothesis_class.prior;
    root["target_index"] = problem.hypothesis_class.target_index;
    if (problem.test_set) root["test_examples"] = examples_to_json(*problem.test_set);
    return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path + "'");
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

TeachingProblem load_problem(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return parse_problem(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_problem(const TeachingProblem& problem, const std::string& path) {
    write_text_file(path, serialize_problem(problem));
}

}  // namespace crowdteach
