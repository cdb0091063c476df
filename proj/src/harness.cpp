#include "crowdteach/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "crowdteach/error.hpp"
#include "crowdteach/learner.hpp"
#include "crowdteach/parallel.hpp"
#include "crowdteach/problem_io.hpp"
#include "crowdteach/rgtp.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach {

std::size_t configured_threads() {
    if (const char* env = std::getenv("CROWDTEACH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
        case PolicyKind::strict: return "strict";
        case PolicyKind::setcover: return "setcover";
        case PolicyKind::random: return "random";
        case PolicyKind::rgtp: return "rgtp";
    }
    return "strict";
}

PolicyKind policy_from_string(std::string_view name) {
    if (name == "strict") return PolicyKind::strict;
    if (name == "setcover") return PolicyKind::setcover;
    if (name == "random") return PolicyKind::random;
    if (name == "rgtp") return PolicyKind::rgtp;
    throw UsageError("unknown policy '" + std::string(name) + "'");
}

TeachingSequence run_policy(const TeachingProblem& problem, const PolicySpec& spec,
                            std::size_t max_len) {
    if (max_len == 0) {
        TeachingSequence empty;
        empty.policy = std::string(to_string(spec.kind));
        return empty;
    }
    switch (spec.kind) {
        case PolicyKind::strict: {
            const LearnerModel teacher(problem, spec.teacher_alpha.value_or(problem.alpha));
            return strict_teach(teacher, spec.epsilon, max_len);
        }
        case PolicyKind::setcover: return setcover_teach(problem, max_len, spec.seed);
        case PolicyKind::random: return random_teach(problem, max_len, spec.seed);
        case PolicyKind::rgtp: {
            RGTPConfig config;
            config.w_o = spec.w_o;
            config.epsilon = spec.epsilon;
            config.max_len = max_len;
            return rgtp_teach(problem, config, spec.seed).sequence;
        }
    }
    throw UsageError("unknown policy");
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd r;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

std::vector<double> population_test_errors(const TeachingProblem& problem,
                                           std::span<const std::string> sequence,
                                           std::size_t n_learners,
                                           std::span<const double> learner_alphas,
                                           std::uint64_t master_seed) {
    if (n_learners < 1) throw UsageError("need at least one learner");
    if (learner_alphas.empty()) throw UsageError("need at least one learner alpha");
    if (!problem.test_set || problem.test_set->empty()) {
        throw UsageError("population simulation needs a test set");
    }
    std::vector<LearnerModel> models;
    models.reserve(learner_alphas.size());
    for (double a : learner_alphas) models.emplace_back(problem, a);
    const auto indices = to_indices(models.front(), sequence);

    std::vector<double> errors(n_learners);
    parallel_for(n_learners, [&](std::size_t i) {
        const auto& model = models[i % models.size()];
        errors[i] = *rollout(model, indices, derive_seed(master_seed, i)).final_test_error;
    });
    return errors;
}

SimulationReport simulate_population(const TeachingProblem& problem, const PolicySpec& spec,
                                     std::span<const std::size_t> lengths,
                                     std::size_t n_learners,
                                     std::span<const double> learner_alphas,
                                     std::uint64_t master_seed) {
    validate(problem);
    const std::size_t longest =
        lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
    if (longest > problem.teaching_set.size()) {
        throw UsageError("teaching length " + std::to_string(longest) +
                         " exceeds teaching set size " +
                         std::to_string(problem.teaching_set.size()));
    }
    const auto sequence = run_policy(problem, spec, longest);
    const double teacher_alpha = spec.kind == PolicyKind::strict
                                     ? spec.teacher_alpha.value_or(problem.alpha)
                                     : problem.alpha;

    SimulationReport report;
    for (std::size_t length : lengths) {
        const std::size_t used = std::min(length, sequence.example_ids.size());
        const std::span<const std::string> prefix(sequence.example_ids.data(), used);
        const auto errors =
            population_test_errors(problem, prefix, n_learners, learner_alphas, master_seed);
        const auto stats = mean_std(errors);
        ReportRow row;
        row.policy = sequence.policy;
        row.teaching_length = length;
        row.learner_alphas.assign(learner_alphas.begin(), learner_alphas.end());
        row.teacher_alpha = teacher_alpha;
        row.n_learners = n_learners;
        row.mean_test_error = stats.mean;
        row.std_test_error = stats.stddev;
        row.seed = master_seed;
        report.rows.push_back(std::move(row));
    }
    return report;
}

double prior_expected_test_error(const TeachingProblem& problem) {
    if (!problem.test_set || problem.test_set->empty()) {
        throw UsageError("problem has no test set");
    }
    const auto& hc = problem.hypothesis_class;
    double e = 0.0;
    for (std::size_t h = 0; h < hc.hypotheses.size(); ++h) {
        e += hc.prior[h] * labeling_error(hc.hypotheses[h], *problem.test_set);
    }
    return e;
}

Lemma1Result lemma1_check(const TeachingProblem& problem, std::span<const std::string> sequence,
                          std::size_t t, std::size_t n_rollouts, std::uint64_t seed) {
    if (t < 1 || t > sequence.size() + 1) {
        throw UsageError("step t must satisfy 1 <= t <= sequence length + 1");
    }
    if (n_rollouts < 1) throw UsageError("need at least one rollout");
    const LearnerModel model(problem);
    const auto all = to_indices(model, sequence);
    const std::span<const std::size_t> prefix(all.data(), t - 1);

    std::vector<std::size_t> landed(n_rollouts);
    parallel_for(n_rollouts, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        LearnerState state = init_learner(model, rng);
        for (std::size_t x : prefix) learner_observe_in_place(state, model, x, rng);
        landed[r] = state.current_index;
    });

    Lemma1Result result;
    std::vector<std::size_t> counts(model.num_hypotheses(), 0);
    for (std::size_t h : landed) ++counts[h];
    result.empirical.resize(counts.size());
    for (std::size_t h = 0; h < counts.size(); ++h) {
        result.empirical[h] = static_cast<double>(counts[h]) / static_cast<double>(n_rollouts);
    }
    PosteriorTracker tracker(model);
    for (std::size_t x : prefix) tracker.observe(model, x);
    result.exact = normalized_posterior(tracker);
    double tv = 0.0;
    for (std::size_t h = 0; h < counts.size(); ++h) {
        tv += std::abs(result.empirical[h] - result.exact[h]);
    }
    result.total_variation = 0.5 * tv;
    return result;
}

std::string_view to_string(DifficultyMeasure measure) noexcept {
    return measure == DifficultyMeasure::label_entropy ? "label" : "expected";
}

DifficultyMeasure difficulty_measure_from_string(std::string_view name) {
    if (name == "label") return DifficultyMeasure::label_entropy;
    if (name == "expected") return DifficultyMeasure::expected_entropy;
    throw UsageError("unknown difficulty measure '" + std::string(name) + "'");
}

std::vector<double> difficulty_curve(const LearnerModel& model,
                                     std::span<const std::string> sequence,
                                     DifficultyMeasure measure) {
    const auto indices = to_indices(model, sequence);
    std::vector<double> curve;
    curve.reserve(indices.size());
    PosteriorTracker tracker(model);
    for (std::size_t x : indices) {
        curve.push_back(measure == DifficultyMeasure::label_entropy
                            ? difficulty(tracker, model, x)
                            : expected_entropy(tracker, model, x));
        tracker.observe(model, x);
    }
    return curve;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw UsageError("Welch's t-test needs at least two values per sample");
    }
    const auto sa = mean_std(a);
    const auto sb = mean_std(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sa.stddev * sa.stddev / na;
    const double vb = sb.stddev * sb.stddev / nb;
    if (va + vb == 0.0) throw UsageError("Welch's t-test needs nonzero variance");

    WelchResult r;
    r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
    r.degrees_of_freedom =
        (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t_distribution<double> dist(r.degrees_of_freedom);
    r.p_two_tailed = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.p_two_tailed = std::min(1.0, r.p_two_tailed);
    return r;
}

// ─── CSV ──────────────────────────────────────────────────────

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError("line " + std::to_string(line) + ": bad number in column " + column);
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& s, std::size_t line, const char* column) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError("line " + std::to_string(line) + ": bad integer in column " + column);
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

constexpr const char* kReportHeader =
    "policy,teaching_length,learner_alpha,teacher_alpha,n_learners,mean_test_error,"
    "std_test_error,seed";

}  // namespace

std::string report_to_csv(const SimulationReport& report) {
    std::string out = kReportHeader;
    out += '\n';
    for (const auto& r : report.rows) {
        std::string alphas;
        for (std::size_t i = 0; i < r.learner_alphas.size(); ++i) {
            if (i) alphas += '|';
            alphas += format_double(r.learner_alphas[i]);
        }
        out += r.policy + ',' + std::to_string(r.teaching_length) + ',' + alphas + ',' +
               format_double(r.teacher_alpha) + ',' + std::to_string(r.n_learners) + ',' +
               format_double(r.mean_test_error) + ',' + format_double(r.std_test_error) + ',' +
               std::to_string(r.seed) + '\n';
    }
    return out;
}

SimulationReport report_from_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader) {
        throw ParseError("line 1: unexpected report header");
    }
    SimulationReport report;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 8) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 8 columns");
        }
        ReportRow r;
        r.policy = cols[0];
        r.teaching_length = parse_unsigned(cols[1], lineno, "teaching_length");
        if (!cols[2].empty()) {
            for (const auto& a : split(cols[2], '|')) {
                r.learner_alphas.push_back(parse_double(a, lineno, "learner_alpha"));
            }
        }
        r.teacher_alpha = parse_double(cols[3], lineno, "teacher_alpha");
        r.n_learners = parse_unsigned(cols[4], lineno, "n_learners");
        r.mean_test_error = parse_double(cols[5], lineno, "mean_test_error");
        r.std_test_error = parse_double(cols[6], lineno, "std_test_error");
        r.seed = parse_unsigned(cols[7], lineno, "seed");
        report.rows.push_back(std::move(r));
    }
    return report;
}

void write_report_csv(const SimulationReport& report, const std::string& path) {
    write_text_file(path, report_to_csv(report));
}

SimulationReport read_report_csv(const std::string& path) {
    return report_from_csv(read_text_file(path));
}

void write_difficulty_csv(std::span<const double> curve, const std::string& path) {
    std::string out = "step,difficulty\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += std::to_string(i + 1) + ',' + format_double(curve[i]) + '\n';
    }
    write_text_file(path, out);
}

}  // namespace crowdteach
