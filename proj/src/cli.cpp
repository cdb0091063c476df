#include "crowdteach/cli.hpp"

#include <cmath>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdteach/datagen.hpp"
#include "crowdteach/error.hpp"
#include "crowdteach/harness.hpp"
#include "crowdteach/problem_io.hpp"
#include "crowdteach/rgtp.hpp"
#include "crowdteach/sequence_io.hpp"
#include "crowdteach/service.hpp"
#include "crowdteach/teach.hpp"

namespace crowdteach {

namespace {

constexpr const char* kProblemFormat = R"(
Problem file (JSON):
  {"alpha": 2.0,
   "examples": [{"id": "train-000", "x": [0.1, 0.2], "y": 1, "asset": "img.png"}, ...],
   "hypotheses": [{"w": [1.0, 0.0], "b": 0.0}, ...],
   "prior": [0.5, 0.5, ...],
   "target_index": 0,
   "test_examples": [ ...same shape as examples... ]}
  "asset" and "test_examples" are optional; y is -1 or 1.)";

constexpr const char* kSequenceFormat = R"(
Sequence file (JSON):
  {"policy": "strict", "status": "tolerance_met|exhausted|unreachable",
   "example_ids": ["train-004", ...],
   "per_step": [{"F": 0.21, "gain": 0.21, "difficulty": 0.9, "error_upper_bound": 0.3}, ...]})";

constexpr const char* kReportFormat = R"(
Report file (CSV, header then one row per length):
  policy,teaching_length,learner_alpha,teacher_alpha,n_learners,mean_test_error,std_test_error,seed
  learner_alpha lists the population's alpha values joined by '|'.)";

constexpr const char* kCurveFormat = R"(
Difficulty curve (CSV): step,difficulty   (1-based steps)
Belief trace (CSV):     step,p_target,eta (step 0 is the initial belief))";

constexpr const char* kEnvironment = R"(
Environment: CROWDTEACH_THREADS caps worker threads (unset or 0 = automatic).)";

const std::vector<std::string> kPolicies{"strict", "setcover", "random", "rgtp"};

HttpService* g_running_service = nullptr;

void stop_service(int) {
    if (g_running_service != nullptr) g_running_service->stop();
}

struct GenerateArgs {
    std::string out;
    double alpha = 2.0;
    std::size_t train_per_class = 80;
    std::size_t test_per_class = 20;
    std::size_t clusters = 8;
    std::size_t per_cluster = 12;
};

struct TeachArgs {
    std::string problem;
    std::string policy;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    double w_o = 0.5;
    std::optional<std::size_t> max_len;
    std::string out;
    std::optional<std::string> trace_out;
    std::optional<std::string> difficulty_out;
    std::string difficulty_measure = "label";
};

struct SimulateArgs {
    std::string problem;
    std::string policy;
    std::vector<std::size_t> lengths;
    std::size_t learners = 100;
    std::vector<double> learner_alphas;
    double epsilon = 1e-6;
    std::optional<double> alpha;
    double w_o = 0.5;
    std::string out;
};

struct Lemma1Args {
    std::string problem;
    std::string sequence;
    std::size_t step = 1;
    std::size_t rollouts = 50000;
};

struct ServeArgs {
    std::string problem;
    std::vector<std::string> sequences;
    std::size_t test_len = 10;
    std::string host = "0.0.0.0";
    int port = 8080;
    std::optional<std::string> assets_dir;
    std::optional<std::string> log;
    bool features = false;
    std::string positive_name = "Positive";
    std::string negative_name = "Negative";
};

int run_generate(const GenerateArgs& a, std::uint64_t seed, std::ostream& out) {
    VWParams data;
    data.n_train_per_class = a.train_per_class;
    data.n_test_per_class = a.test_per_class;
    HypothesisGenParams hyp;
    hyp.n_clusters = a.clusters;
    hyp.per_cluster = a.per_cluster;
    const TeachingProblem problem = make_vw_problem(data, hyp, a.alpha, seed);
    save_problem(problem, a.out);
    out << "wrote " << a.out << ": " << problem.teaching_set.size() << " teaching examples, "
        << problem.hypothesis_class.hypotheses.size() << " hypotheses, target "
        << problem.hypothesis_class.target_index << "\n";
    return kExitOk;
}

int run_teach(const TeachArgs& a, std::uint64_t seed, std::ostream& out) {
    const TeachingProblem problem = load_problem(a.problem);
    const PolicyKind kind = policy_from_string(a.policy);
    if (a.max_len && *a.max_len == 0) throw UsageError("--max-len: must be at least 1");
    if (a.trace_out && kind != PolicyKind::rgtp) {
        throw UsageError("--trace-out: only available with --policy rgtp");
    }

    TeachingSequence seq;
    switch (kind) {
        case PolicyKind::strict: {
            TeachConfig config;
            config.epsilon = a.epsilon.value_or(0.05);
            config.max_len = a.max_len;
            config.teacher_alpha = a.alpha;
            seq = strict_teach(problem, config);
            break;
        }
        case PolicyKind::setcover:
            seq = setcover_teach(problem, a.max_len.value_or(problem.teaching_set.size()), seed);
            break;
        case PolicyKind::random:
            seq = random_teach(problem, a.max_len.value_or(problem.teaching_set.size()), seed);
            break;
        case PolicyKind::rgtp: {
            RGTPConfig config;
            config.epsilon = a.epsilon.value_or(0.1);
            config.w_o = a.w_o;
            config.max_len = a.max_len;
            const RgtpResult result = rgtp_teach(problem, config, seed);
            seq = result.sequence;
            if (a.trace_out) {
                write_belief_csv(result.trace, problem.hypothesis_class.target_index,
                                 *a.trace_out);
            }
            break;
        }
    }
    save_sequence(seq, a.out);
    if (a.difficulty_out) {
        const LearnerModel model(problem);
        const auto curve = difficulty_curve(model, seq.example_ids,
                                            difficulty_measure_from_string(a.difficulty_measure));
        write_difficulty_csv(curve, *a.difficulty_out);
    }
    out << "wrote " << a.out << ": " << seq.example_ids.size() << " examples, status "
        << to_string(seq.status) << "\n";
    return kExitOk;
}

int run_simulate(const SimulateArgs& a, std::uint64_t seed, std::ostream& out) {
    const TeachingProblem problem = load_problem(a.problem);
    PolicySpec spec;
    spec.kind = policy_from_string(a.policy);
    spec.epsilon = a.epsilon;
    spec.teacher_alpha = a.alpha;
    spec.w_o = a.w_o;
    spec.seed = seed;
    if (a.learners == 0) throw UsageError("--learners: must be at least 1");
    std::vector<double> alphas = a.learner_alphas;
    if (alphas.empty()) alphas.push_back(problem.alpha);
    for (double v : alphas) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw UsageError("--learner-alphas: values must be positive and finite");
        }
    }
    if (!problem.test_set || problem.test_set->empty()) {
        throw ValidationError(a.problem + ": simulation requires test_examples");
    }
    for (std::size_t len : a.lengths) {
        if (len > problem.teaching_set.size()) {
            throw UsageError("--lengths: " + std::to_string(len) + " exceeds the " +
                             std::to_string(problem.teaching_set.size()) + " teaching examples");
        }
    }
    const SimulationReport report =
        simulate_population(problem, spec, a.lengths, a.learners, alphas, seed);
    write_report_csv(report, a.out);
    out << "wrote " << a.out << ": " << report.rows.size() << " rows\n";
    return kExitOk;
}

int run_lemma1(const Lemma1Args& a, std::uint64_t seed, std::ostream& out) {
    const TeachingProblem problem = load_problem(a.problem);
    const TeachingSequence seq = load_sequence(a.sequence);
    if (a.rollouts == 0) throw UsageError("--rollouts: must be at least 1");
    if (a.step == 0 || a.step > seq.example_ids.size() + 1) {
        throw UsageError("--step: must lie in [1, " + std::to_string(seq.example_ids.size() + 1) +
                         "]");
    }
    const Lemma1Result r = lemma1_check(problem, seq.example_ids, a.step, a.rollouts, seed);
    out.precision(17);
    out << "step " << a.step << " rollouts " << a.rollouts << " total_variation "
        << r.total_variation << "\n";
    out << "hypothesis,empirical,exact\n";
    for (std::size_t h = 0; h < r.exact.size(); ++h) {
        out << h << "," << r.empirical[h] << "," << r.exact[h] << "\n";
    }
    return kExitOk;
}

int run_serve(const ServeArgs& a, std::ostream& out) {
    ServiceConfig config;
    config.problem = load_problem(a.problem);
    for (const auto& spec : a.sequences) {
        std::string name;
        std::string path;
        if (const auto eq = spec.find('='); eq != std::string::npos) {
            name = spec.substr(0, eq);
            path = spec.substr(eq + 1);
        } else {
            path = spec;
            name = std::filesystem::path(spec).stem().string();
        }
        if (name.empty()) throw UsageError("--sequence: empty group name in '" + spec + "'");
        if (config.groups.contains(name)) {
            throw UsageError("--sequence: group '" + name + "' given twice");
        }
        config.groups[name] = load_sequence(path).example_ids;
    }
    config.test_len = a.test_len;
    config.serve_features = a.features;
    config.log_path = a.log;
    config.positive_name = a.positive_name;
    config.negative_name = a.negative_name;

    SessionStore store(std::move(config));
    HttpService service(store, a.assets_dir);
    out << "serving on " << a.host << ":" << a.port << " (groups:";
    for (const auto& g : store.group_names()) out << " " << g;
    out << ")\n";
    out.flush();

    g_running_service = &service;
    auto old_int = std::signal(SIGINT, stop_service);
    auto old_term = std::signal(SIGTERM, stop_service);
    const bool ok = service.listen(a.host, a.port);
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    g_running_service = nullptr;
    if (!ok) throw IoError("cannot listen on " + a.host + ":" + std::to_string(a.port));
    return kExitOk;
}

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Machine-teaching toolkit: generate problems, compute teaching sequences, "
                 "simulate learners, and serve teach-then-test sessions."};
    app.footer(std::string(kProblemFormat) + "\n" + kSequenceFormat + "\n" + kReportFormat + "\n" +
               kCurveFormat + "\n" + kEnvironment);
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Master seed (unsigned 64-bit)")->capture_default_str();

    // generate vw
    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic problem file");
    generate->require_subcommand(1);
    generate->footer(kProblemFormat);
    auto* vw = generate->add_subcommand("vw", "Two-Gaussian wasp/weevil-style 2D problem");
    vw->footer(kProblemFormat);
    vw->add_option("--out", gen.out, "Output problem file")->required();
    vw->add_option("--alpha", gen.alpha, "Learner noise parameter stored in the problem")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    vw->add_option("--train-per-class", gen.train_per_class, "Teaching examples per class")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    vw->add_option("--test-per-class", gen.test_per_class, "Test examples per class")
        ->capture_default_str();
    vw->add_option("--clusters", gen.clusters, "Hypothesis clusters")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    vw->add_option("--per-cluster", gen.per_cluster, "Hypotheses per cluster")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // teach
    TeachArgs teach;
    auto* teach_cmd = app.add_subcommand("teach", "Compute a teaching sequence");
    teach_cmd->footer(std::string(kProblemFormat) + "\n" + kSequenceFormat + "\n" + kCurveFormat);
    teach_cmd->add_option("--problem", teach.problem, "Problem file")->required();
    teach_cmd->add_option("--policy", teach.policy, "strict|setcover|random|rgtp")
        ->required()
        ->check(CLI::IsMember(kPolicies));
    teach_cmd->add_option("--epsilon", teach.epsilon,
                          "Tolerance (default 0.05 for strict, 0.1 for rgtp)")
        ->check(CLI::Range(0.0, 1.0));
    teach_cmd->add_option("--alpha", teach.alpha, "Teacher alpha for strict (default: problem alpha)")
        ->check(CLI::PositiveNumber);
    teach_cmd->add_option("--wo", teach.w_o, "RGTP conservative weight in (0, 1)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    teach_cmd->add_option("--max-len", teach.max_len, "Maximum sequence length");
    teach_cmd->add_option("--out", teach.out, "Output sequence file")->required();
    teach_cmd->add_option("--trace-out", teach.trace_out, "RGTP belief trace CSV");
    teach_cmd->add_option("--difficulty-out", teach.difficulty_out, "Difficulty curve CSV");
    teach_cmd
        ->add_option("--difficulty-measure", teach.difficulty_measure,
                     "label (entropy of the posterior-predicted label) or expected "
                     "(posterior-expected entropy of each hypothesis's noisy label)")
        ->capture_default_str()
        ->check(CLI::IsMember({"label", "expected"}));

    // simulate
    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Teach a simulated learner population");
    simulate->footer(std::string(kProblemFormat) + "\n" + kReportFormat + "\n" + kEnvironment);
    simulate->add_option("--problem", sim.problem, "Problem file with test_examples")->required();
    simulate->add_option("--policy", sim.policy, "strict|setcover|random|rgtp")
        ->required()
        ->check(CLI::IsMember(kPolicies));
    simulate->add_option("--lengths", sim.lengths, "Teaching lengths, comma separated")
        ->required()
        ->delimiter(',');
    simulate->add_option("--learners", sim.learners, "Population size")->capture_default_str();
    simulate->add_option("--learner-alphas", sim.learner_alphas,
                         "Learner alphas assigned round-robin (default: problem alpha)")
        ->delimiter(',');
    simulate->add_option("--epsilon", sim.epsilon, "STRICT/RGTP tolerance")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--alpha", sim.alpha, "Teacher alpha for strict")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--wo", sim.w_o, "RGTP conservative weight")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--out", sim.out, "Output report CSV")->required();

    // lemma1
    Lemma1Args lem;
    auto* lemma1 = app.add_subcommand(
        "lemma1", "Compare the simulated distribution of h_t with the posterior P_{t-1}");
    lemma1->footer(std::string(kProblemFormat) + "\n" + kSequenceFormat + "\n" + kEnvironment);
    lemma1->add_option("--problem", lem.problem, "Problem file")->required();
    lemma1->add_option("--sequence", lem.sequence, "Sequence file")->required();
    lemma1->add_option("--step", lem.step, "Step t (1-based)")->capture_default_str();
    lemma1->add_option("--rollouts", lem.rollouts, "Independent learner rollouts")
        ->capture_default_str();

    // serve
    ServeArgs srv;
    auto* serve = app.add_subcommand("serve", "Serve teach-then-test sessions over HTTP");
    serve->footer(std::string(kProblemFormat) + "\n" + kSequenceFormat + R"(
Groups: each --sequence NAME=PATH defines a group; a bare PATH uses the file
stem as NAME. Group "none" (no teaching) is always available.
Log (--log): one JSON object per line, {"event": "create"|"answer", ...};
an existing log is replayed at startup.)");
    serve->add_option("--problem", srv.problem, "Problem file with test_examples")->required();
    serve->add_option("--sequence", srv.sequences, "Group sequence, NAME=PATH (repeatable)");
    serve->add_option("--test-len", srv.test_len, "Test items per session")->capture_default_str();
    serve->add_option("--host", srv.host, "Bind address")->capture_default_str();
    serve->add_option("--port", srv.port, "TCP port")
        ->capture_default_str()
        ->check(CLI::Range(1, 65535));
    serve->add_option("--assets-dir", srv.assets_dir, "Directory of static files and assets");
    serve->add_option("--log", srv.log, "Append-only session log");
    serve->add_flag("--features", srv.features, "Include feature vectors in served items");
    serve->add_option("--positive-name", srv.positive_name, "Display name of label +1")
        ->capture_default_str();
    serve->add_option("--negative-name", srv.negative_name, "Display name of label -1")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << one_line(e.what()) << "\n";
        return kExitValidation;
    }

    try {
        if (vw->parsed()) return run_generate(gen, seed, out);
        if (teach_cmd->parsed()) return run_teach(teach, seed, out);
        if (simulate->parsed()) return run_simulate(sim, seed, out);
        if (lemma1->parsed()) return run_lemma1(lem, seed, out);
        if (serve->parsed()) return run_serve(srv, out);
    } catch (const IoError& e) {
        err << "error: " << one_line(e.what()) << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << "\n";
        return kExitValidation;
    }
    err << "error: no command given\n";
    return kExitValidation;
}

}  // namespace crowdteach
