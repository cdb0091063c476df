#include "crowdteach/rgtp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "crowdteach/error.hpp"

namespace crowdteach {

std::vector<Cell> build_cells(const LearnerModel& model) {
    const std::size_t nh = model.num_hypotheses();
    std::map<std::vector<std::int8_t>, std::size_t> lookup;
    std::vector<Cell> cells;
    std::vector<std::int8_t> sig(nh);
    for (std::size_t x = 0; x < model.num_examples(); ++x) {
        for (std::size_t h = 0; h < nh; ++h) sig[h] = model.predicts_positive(h, x) ? 1 : -1;
        auto [it, inserted] = lookup.emplace(sig, cells.size());
        if (inserted) cells.push_back(Cell{sig, {}});
        cells[it->second].members.push_back(x);
    }
    return cells;
}

bool neighbors(const Cell& a, const Cell& b) {
    if (a.signature.size() != b.signature.size()) {
        throw UsageError("neighbors: cells come from different hypothesis classes");
    }
    std::size_t diff = 0;
    for (std::size_t h = 0; h < a.signature.size(); ++h) diff += a.signature[h] != b.signature[h];
    if (diff == 0) throw UsageError("neighbors: cells must be distinct");
    return diff == 1;
}

std::size_t richness(std::span<const Cell> cells) {
    if (cells.empty()) return 0;
    std::size_t lambda = std::numeric_limits<std::size_t>::max();
    for (const auto& c : cells) lambda = std::min(lambda, c.members.size());
    return lambda;
}

std::size_t richness(const LearnerModel& model) { return richness(build_cells(model)); }

double cell_polarity(std::span<const double> belief, const Cell& cell) {
    double s = 0.0;
    for (std::size_t h = 0; h < belief.size(); ++h) s += belief[h] * cell.signature[h];
    return s;
}

bool unanimous(const Cell& cell) noexcept {
    return std::all_of(cell.signature.begin(), cell.signature.end(),
                       [&](std::int8_t s) { return s == cell.signature.front(); });
}

namespace {

bool available(const Cell& cell, std::span<const std::uint8_t> shown) {
    if (shown.empty()) return true;
    return std::any_of(cell.members.begin(), cell.members.end(),
                       [&](std::size_t x) { return shown[x] == 0; });
}

std::size_t pick_member(const Cell& cell, std::span<const std::uint8_t> shown, Rng& rng) {
    if (shown.empty()) return cell.members[rng.index(cell.members.size())];
    std::vector<std::size_t> unused;
    for (std::size_t x : cell.members) {
        if (shown[x] == 0) unused.push_back(x);
    }
    return unused[rng.index(unused.size())];
}

}  // namespace

std::optional<RgtpChoice> rgtp_step(std::span<const double> belief, std::span<const Cell> cells,
                                    std::span<const std::uint8_t> shown, Rng& rng) {
    std::vector<std::size_t> live;
    std::vector<double> polarity;
    bool informative = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (!available(cells[c], shown)) continue;
        live.push_back(c);
        polarity.push_back(cell_polarity(belief, cells[c]));
        informative = informative || !unanimous(cells[c]);
    }
    if (!informative) return std::nullopt;

    for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = i + 1; j < live.size(); ++j) {
            const bool opposite = (polarity[i] > 0.0 && polarity[j] < 0.0) ||
                                  (polarity[i] < 0.0 && polarity[j] > 0.0);
            if (!opposite || !neighbors(cells[live[i]], cells[live[j]])) continue;
            RgtpChoice choice;
            choice.kind = RgtpCase::bipolar_pair;
            choice.pair = std::pair{live[i], live[j]};
            choice.cell = rng.index(2) == 0 ? live[i] : live[j];
            choice.example_index = pick_member(cells[choice.cell], shown, rng);
            return choice;
        }
    }

    std::size_t best = cells.size();
    double best_abs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < live.size(); ++i) {
        if (unanimous(cells[live[i]])) continue;
        const double a = std::abs(polarity[i]);
        if (a < best_abs) {
            best_abs = a;
            best = live[i];
        }
    }
    RgtpChoice choice;
    choice.kind = RgtpCase::least_polarized;
    choice.cell = best;
    choice.example_index = pick_member(cells[best], shown, rng);
    return choice;
}

std::vector<double> rgtp_teacher_update(std::span<const double> belief,
                                        std::size_t example_index, const LearnerModel& model,
                                        double w_o) {
    if (!(w_o > 0.0 && w_o < 1.0)) throw UsageError("w_o must lie in (0, 1)");
    if (belief.size() != model.num_hypotheses()) throw UsageError("belief size mismatch");
    std::vector<double> next(belief.begin(), belief.end());
    double z = 0.0;
    bool changed = false;
    for (std::size_t h = 0; h < next.size(); ++h) {
        if (model.inconsistent(h, example_index) && next[h] > 0.0) {
            next[h] *= w_o;
            changed = true;
        }
        z += next[h];
    }
    if (!changed) return next;
    for (double& p : next) p /= z;
    return next;
}

double eta(std::span<const double> belief, std::size_t target_index) {
    const double p = belief[target_index];
    return (1.0 - p) / p;
}

namespace {

/// γ = Σ_h p(h)·w_o^{[h mislabels the cell]}; the cell's label is h*'s.
double normalizer_for_cell(std::span<const double> belief, const Cell& cell,
                           std::size_t target, double w_o) {
    const std::int8_t truth = cell.signature[target];
    double g = 0.0;
    for (std::size_t h = 0; h < belief.size(); ++h) {
        g += belief[h] * (cell.signature[h] == truth ? 1.0 : w_o);
    }
    return g;
}

}  // namespace

double expected_eta_ratio(std::span<const double> belief, std::span<const Cell> cells,
                          const RgtpChoice& choice, const LearnerModel& model, double w_o) {
    const std::size_t target = model.target_index();
    double gamma = 0.0;
    if (choice.pair) {
        gamma = 0.5 * (normalizer_for_cell(belief, cells[choice.pair->first], target, w_o) +
                       normalizer_for_cell(belief, cells[choice.pair->second], target, w_o));
    } else {
        gamma = normalizer_for_cell(belief, cells[choice.cell], target, w_o);
    }
    const double p = belief[target];
    return (gamma - p) / (1.0 - p);
}

RgtpResult rgtp_teach(const TeachingProblem& problem, const RGTPConfig& config,
                      std::uint64_t seed) {
    if (!(config.w_o > 0.0 && config.w_o < 1.0)) throw UsageError("w_o must lie in (0, 1)");
    if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
        throw UsageError("epsilon must lie in (0, 1)");
    }
    if (config.max_len && *config.max_len < 1) throw UsageError("max_len must be at least 1");

    const LearnerModel model(problem);
    const auto cells = build_cells(model);
    const std::size_t target = model.target_index();
    const std::size_t cap = config.max_len.value_or(model.num_examples());
    Rng rng(seed);

    RgtpResult result;
    auto& trace = result.trace;
    auto& seq = result.sequence;
    seq.policy = "rgtp";

    std::vector<double> belief(model.prior().begin(), model.prior().end());
    std::vector<std::uint8_t> shown(model.num_examples(), 0);
    std::vector<std::size_t> order;
    trace.belief_path.push_back(belief);
    trace.eta_path.push_back(eta(belief, target));

    seq.status = TeachStatus::tolerance_met;
    while (1.0 - belief[target] > config.epsilon) {
        if (order.size() >= cap || order.size() >= model.num_examples()) {
            seq.status = TeachStatus::exhausted;
            break;
        }
        const auto choice = rgtp_step(belief, cells, shown, rng);
        if (!choice) {
            seq.status = TeachStatus::unreachable;
            break;
        }
        RgtpStepInfo info;
        info.choice = *choice;
        info.expected_eta_ratio = expected_eta_ratio(belief, cells, *choice, model, config.w_o);
        info.bound_applies = choice->kind == RgtpCase::bipolar_pair ||
                             cell_polarity(belief, cells[choice->cell]) == 0.0;

        const double eta_before = trace.eta_path.back();
        belief = rgtp_teacher_update(belief, choice->example_index, model, config.w_o);
        const double eta_after = eta(belief, target);
        info.realized_eta_ratio = eta_before > 0.0 ? eta_after / eta_before : 0.0;

        shown[choice->example_index] = 1;
        order.push_back(choice->example_index);
        trace.chosen.push_back(model.example(choice->example_index).id);
        trace.belief_path.push_back(belief);
        trace.eta_path.push_back(eta_after);
        trace.steps.push_back(info);
    }

    seq.example_ids = trace.chosen;
    seq.per_step = diagnose_sequence(model, order);
    return result;
}

double rgtp_tail_bound(double epsilon, double prior_target, double w_o, std::size_t m) {
    return (1.0 - epsilon) * (1.0 - prior_target) / (epsilon * prior_target) *
           std::exp(-static_cast<double>(m) * (1.0 - w_o) / 4.0);
}

double rich_teaching_length(double epsilon) {
    const double l = std::log(2.0 / epsilon);
    return 8.0 * l * l;
}

void write_belief_csv(const BeliefTrace& trace, std::size_t target_index,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "step,p_target,eta\n";
    for (std::size_t t = 0; t < trace.belief_path.size(); ++t) {
        out << t << ',' << trace.belief_path[t][target_index] << ',' << trace.eta_path[t]
            << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace crowdteach
