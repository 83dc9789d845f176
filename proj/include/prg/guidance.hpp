#pragma once

#include <cstddef>
#include <vector>

#include "prg/matrix.hpp"
#include "prg/tracking.hpp"

namespace prg {

/// Markov transition matrix over classes: row-normalized tracking counts
/// with diagonal alpha/(k-1). Rows are not renormalized after the diagonal
/// is inserted.
struct TransitionMatrix {
    SquareMatrix rows;
    double alpha = 1.0;
};

struct RescaledTransitionMatrix {
    SquareMatrix rows;
};

/// Per-sample rectifying weights; excluded marks a sample dropped from the
/// unlabeled loss (eta is then the zero vector).
struct RectifyingWeights {
    std::vector<double> eta;
    bool excluded = false;
};

/// Rows of C with positive sum are divided by that sum; all-zero rows fall
/// back to the uniform off-diagonal 1/(k-1). Then every diagonal entry is
/// set to alpha/(k-1).
TransitionMatrix build_transition_matrix(const SquareMatrix& tracking, double alpha);

/// Eq-style class-distribution rescale: each column j is divided by the
/// fraction L_j / sum(L), with L_j clamped below at 1.
RescaledTransitionMatrix class_rescale(const TransitionMatrix& h, const PredictionCounts& l);

/// Result of a Hadamard rescale. fell_back is set when the product was
/// identically zero and the input passed through unchanged.
struct RescaleResult {
    ProbVector p;
    bool fell_back = false;
};

/// Selects row guide_class of H' (raised to the steps-th power when
/// steps > 1), Hadamard-multiplies with p and renormalizes.
RescaleResult prg_rescale(const ProbVector& p, std::size_t guide_class,
                          const RescaledTransitionMatrix& hp, unsigned steps = 1);

/// Generic eta rescale; the excluded flag passes through.
RescaleResult eta_rescale(const ProbVector& p, const RectifyingWeights& w);

/// Confidence-threshold eta: 1/p at the argmax when max(p) >= tau,
/// excluded otherwise.
RectifyingWeights confidence_eta(const ProbVector& p, double tau);

/// Distribution-alignment eta: prior / running, with running clamped
/// below at 1e-6.
RectifyingWeights distribution_alignment_eta(const ProbVector& prior, const ProbVector& running);

/// Logit gradient of -sum p_tilde * log softmax(o) at p = softmax(o), with
/// p_tilde held fixed: equals p - p_tilde.
std::vector<double> rescaled_ce_gradient(const ProbVector& p, const ProbVector& p_tilde);

}  // namespace prg
