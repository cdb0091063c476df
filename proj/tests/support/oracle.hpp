#pragma once

// Straight-line reference computations in the plain probability domain.
// They share no code with the library beyond the problem types and serve as
// the independent side of oracle comparisons.

#include <cmath>
#include <cstddef>
#include <vector>

#include "crowdteach/core.hpp"

namespace crowdteach::oracle {

inline double dot_score(const Hypothesis& h, const std::vector<double>& x) {
    double s = h.offset;
    for (std::size_t i = 0; i < x.size(); ++i) s += h.weights[i] * x[i];
    return s;
}

inline int sign_of(double s) { return s >= 0.0 ? 1 : -1; }

inline int label_value(Label y) { return y == Label::positive ? 1 : -1; }

/// err(h, h*): fraction of teaching examples on which the two disagree.
inline double error(const TeachingProblem& p, std::size_t h) {
    const auto& hs = p.hypothesis_class.hypotheses;
    const auto& target = hs[p.hypothesis_class.target_index];
    std::size_t bad = 0;
    for (const auto& e : p.teaching_set) {
        if (sign_of(dot_score(hs[h], e.features)) != sign_of(dot_score(target, e.features))) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(p.teaching_set.size());
}

/// Q(h | A) = P0(h)·Π_{x ∈ A, h inconsistent with x} 1 / (1 + exp(-α·h(x)·y)).
inline std::vector<double> unnormalized(const TeachingProblem& p, double alpha,
                                        const std::vector<std::size_t>& shown) {
    const auto& hs = p.hypothesis_class.hypotheses;
    std::vector<double> q = p.hypothesis_class.prior;
    for (std::size_t h = 0; h < hs.size(); ++h) {
        for (std::size_t x : shown) {
            const auto& e = p.teaching_set[x];
            const double s = dot_score(hs[h], e.features);
            const int y = label_value(e.label);
            if (sign_of(s) != y) q[h] *= 1.0 / (1.0 + std::exp(-alpha * s * y));
        }
    }
    return q;
}

inline std::vector<double> posterior(const TeachingProblem& p, double alpha,
                                     const std::vector<std::size_t>& shown) {
    auto q = unnormalized(p, alpha, shown);
    double z = 0.0;
    for (double v : q) z += v;
    for (auto& v : q) v /= z;
    return q;
}

inline double prior_expected_error(const TeachingProblem& p) {
    double e = 0.0;
    for (std::size_t h = 0; h < p.hypothesis_class.hypotheses.size(); ++h) {
        e += p.hypothesis_class.prior[h] * error(p, h);
    }
    return e;
}

inline double expected_error(const TeachingProblem& p, double alpha,
                             const std::vector<std::size_t>& shown) {
    const auto post = posterior(p, alpha, shown);
    double e = 0.0;
    for (std::size_t h = 0; h < post.size(); ++h) e += post[h] * error(p, h);
    return e;
}

/// F(A) = Σ_h (P0(h) - Q(h | A))·err(h, h*).
inline double surrogate(const TeachingProblem& p, double alpha,
                        const std::vector<std::size_t>& shown) {
    const auto q = unnormalized(p, alpha, shown);
    double f = 0.0;
    for (std::size_t h = 0; h < q.size(); ++h) {
        f += (p.hypothesis_class.prior[h] - q[h]) * error(p, h);
    }
    return f;
}

/// Members of the subset encoded by `mask` over n elements.
inline std::vector<std::size_t> subset(unsigned mask, std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) out.push_back(i);
    }
    return out;
}

}  // namespace crowdteach::oracle
