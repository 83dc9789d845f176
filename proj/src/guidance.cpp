#include "prg/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prg {

TransitionMatrix build_transition_matrix(const SquareMatrix& tracking, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    const std::size_t k = tracking.dim();
    if (k < 2) throw std::invalid_argument("transition matrix needs k >= 2");
    TransitionMatrix h{SquareMatrix(k), alpha};
    const double uniform = 1.0 / static_cast<double>(k - 1);
    for (std::size_t i = 0; i < k; ++i) {
        const double sum = tracking.row_sum(i);
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            h.rows.at(i, j) = sum > 0.0 ? tracking.at(i, j) / sum : uniform;
        }
        h.rows.at(i, i) = alpha * uniform;
    }
    return h;
}

RescaledTransitionMatrix class_rescale(const TransitionMatrix& h, const PredictionCounts& l) {
    const std::size_t k = h.rows.dim();
    if (l.counts.size() != k) throw std::invalid_argument("class_rescale dimension mismatch");
    std::vector<double> clamped(k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        clamped[j] = std::max(1.0, l.counts[j]);
        total += clamped[j];
    }
    RescaledTransitionMatrix out{SquareMatrix(k)};
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out.rows.at(i, j) = h.rows.at(i, j) * total / clamped[j];
    return out;
}

namespace {

RescaleResult hadamard_normalize(const ProbVector& p, const std::vector<double>& weights) {
    std::vector<double> out(p.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = weights[i] * p[i];
        sum += out[i];
    }
    if (sum <= 0.0) return {p, true};  // degenerate product: pass through
    for (double& v : out) v /= sum;
    return {std::move(out), false};
}

}  // namespace

RescaleResult prg_rescale(const ProbVector& p, std::size_t guide_class,
                          const RescaledTransitionMatrix& hp, unsigned steps) {
    const std::size_t k = hp.rows.dim();
    if (p.size() != k) throw std::invalid_argument("prg_rescale dimension mismatch");
    if (guide_class >= k) throw std::out_of_range("guide class out of range");
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    const SquareMatrix powered = steps > 1 ? hp.rows.power(steps) : hp.rows;
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) row[j] = powered.at(guide_class, j);
    return hadamard_normalize(p, row);
}

RescaleResult eta_rescale(const ProbVector& p, const RectifyingWeights& w) {
    if (w.excluded) return {p, false};
    if (w.eta.size() != p.size()) throw std::invalid_argument("eta_rescale dimension mismatch");
    return hadamard_normalize(p, w.eta);
}

RectifyingWeights confidence_eta(const ProbVector& p, double tau) {
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in (0,1]");
    RectifyingWeights w;
    const std::size_t top = argmax(p);
    if (p[top] < tau) {
        w.eta.assign(p.size(), 0.0);
        w.excluded = true;
        return w;
    }
    w.eta.assign(p.size(), 0.0);
    w.eta[top] = 1.0 / p[top];
    return w;
}

RectifyingWeights distribution_alignment_eta(const ProbVector& prior, const ProbVector& running) {
    if (prior.size() != running.size()) throw std::invalid_argument("distribution_alignment dimension mismatch");
    RectifyingWeights w;
    w.eta.resize(prior.size());
    for (std::size_t i = 0; i < prior.size(); ++i)
        w.eta[i] = prior[i] / std::max(running[i], 1e-6);
    return w;
}

std::vector<double> rescaled_ce_gradient(const ProbVector& p, const ProbVector& p_tilde) {
    if (p.size() != p_tilde.size()) throw std::invalid_argument("gradient dimension mismatch");
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] - p_tilde[i];
    return g;
}

}  // namespace prg
