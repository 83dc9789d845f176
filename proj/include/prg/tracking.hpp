#pragma once

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "prg/matrix.hpp"

namespace prg {

/// Per-unlabeled-sample memory of the last hard class prediction.
/// Slots start unassigned; the first prediction is recorded without
/// counting a transition.
class LabelBank {
public:
    explicit LabelBank(std::size_t n_unlabeled, int k)
        : k_(k), slots_(n_unlabeled, kUnassigned) {}

    std::size_t size() const { return slots_.size(); }
    int num_classes() const { return k_; }

    bool assigned(std::size_t idx) const { return slot(idx) != kUnassigned; }
    int label(std::size_t idx) const { return slot(idx); }

    /// Records the prediction; returns the (from, to) transition if the
    /// stored label changes to a different class.
    std::optional<std::pair<int, int>> observe(std::size_t idx, int predicted);

private:
    int slot(std::size_t idx) const {
        if (idx >= slots_.size()) throw std::out_of_range("label bank index out of range");
        return slots_[idx];
    }

    static constexpr int kUnassigned = -1;
    int k_;
    std::vector<int> slots_;
};

/// k x k transition counts of one batch; diagonal identically zero.
struct BatchTransitionMatrix {
    explicit BatchTransitionMatrix(int k) : counts(static_cast<std::size_t>(k) * k, 0), k(k) {}
    std::vector<int> counts;  // row-major
    int k;

    int& at(int i, int j) { return counts[static_cast<std::size_t>(i) * k + j]; }
    int at(int i, int j) const { return counts[static_cast<std::size_t>(i) * k + j]; }
};

/// Builds the batch count matrix from the transition events, and tallies
/// class predictions per class.
std::pair<BatchTransitionMatrix, std::vector<int>> finalize_batch(
    const std::vector<std::pair<int, int>>& events, const std::vector<int>& predictions, int k);

/// Averaged class-prediction counts over the window.
struct PredictionCounts {
    std::vector<double> counts;
};

/// Rolling window of the last N_B batch matrices and prediction tallies.
class TrackingWindow {
public:
    TrackingWindow(int capacity, int k) : capacity_(capacity), k_(k) {
        if (capacity < 1) throw std::invalid_argument("window capacity must be >= 1");
    }

    void push(BatchTransitionMatrix matrix, std::vector<int> pred_counts);

    bool empty() const { return matrices_.empty(); }
    std::size_t size() const { return matrices_.size(); }
    int capacity() const { return capacity_; }
    int num_classes() const { return k_; }

    /// Elementwise mean over the stored matrices; divides by the current
    /// window length (equals N_B once full).
    SquareMatrix averaged_matrix() const;

    PredictionCounts averaged_counts() const;

private:
    int capacity_;
    int k_;
    std::deque<BatchTransitionMatrix> matrices_;
    std::deque<std::vector<int>> pred_counts_;
};

/// |C - C^T|_1 / |C|_1; reported, never asserted on.
double symmetry_score(const SquareMatrix& c);

}  // namespace prg
