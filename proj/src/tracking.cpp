#include "prg/tracking.hpp"

#include <cmath>
#include <stdexcept>

namespace prg {

std::optional<std::pair<int, int>> LabelBank::observe(std::size_t idx, int predicted) {
    if (idx >= slots_.size()) throw std::out_of_range("label bank index out of range");
    if (predicted < 0 || predicted >= k_) throw std::out_of_range("predicted class out of range");
    const int prev = slots_[idx];
    if (prev == kUnassigned) {
        slots_[idx] = predicted;
        return std::nullopt;
    }
    if (prev == predicted) return std::nullopt;
    slots_[idx] = predicted;
    return std::make_pair(prev, predicted);
}

std::pair<BatchTransitionMatrix, std::vector<int>> finalize_batch(
    const std::vector<std::pair<int, int>>& events, const std::vector<int>& predictions, int k) {
    BatchTransitionMatrix m(k);
    for (const auto& [from, to] : events) {
        if (from < 0 || from >= k || to < 0 || to >= k) throw std::out_of_range("event class out of range");
        if (from == to) throw std::invalid_argument("diagonal transition event");
        ++m.at(from, to);
    }
    std::vector<int> tally(static_cast<std::size_t>(k), 0);
    for (int p : predictions) {
        if (p < 0 || p >= k) throw std::out_of_range("prediction class out of range");
        ++tally[static_cast<std::size_t>(p)];
    }
    return {std::move(m), std::move(tally)};
}

void TrackingWindow::push(BatchTransitionMatrix matrix, std::vector<int> pred_counts) {
    if (matrix.k != k_ || pred_counts.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("window push dimension mismatch");
    matrices_.push_back(std::move(matrix));
    pred_counts_.push_back(std::move(pred_counts));
    if (matrices_.size() > static_cast<std::size_t>(capacity_)) {
        matrices_.pop_front();
        pred_counts_.pop_front();
    }
}

SquareMatrix TrackingWindow::averaged_matrix() const {
    if (matrices_.empty()) throw std::logic_error("averaged_matrix on empty window");
    SquareMatrix out(static_cast<std::size_t>(k_));
    for (const auto& m : matrices_)
        for (int i = 0; i < k_; ++i)
            for (int j = 0; j < k_; ++j)
                out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += m.at(i, j);
    const double n = static_cast<double>(matrices_.size());
    for (double& v : out.data()) v /= n;
    return out;
}

PredictionCounts TrackingWindow::averaged_counts() const {
    if (pred_counts_.empty()) throw std::logic_error("averaged_counts on empty window");
    PredictionCounts out;
    out.counts.assign(static_cast<std::size_t>(k_), 0.0);
    for (const auto& tally : pred_counts_)
        for (int i = 0; i < k_; ++i) out.counts[static_cast<std::size_t>(i)] += tally[static_cast<std::size_t>(i)];
    for (double& v : out.counts) v /= static_cast<double>(pred_counts_.size());
    return out;
}

double symmetry_score(const SquareMatrix& c) {
    const std::size_t k = c.dim();
    double asym = 0.0, total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            asym += std::abs(c.at(i, j) - c.at(j, i));
            total += std::abs(c.at(i, j));
        }
    return total > 0.0 ? asym / total : 0.0;
}

}  // namespace prg
