#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace prg {

/// Dense k x k matrix of doubles, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t k, double fill = 0.0) : k_(k), data_(k * k, fill) {}

    std::size_t dim() const { return k_; }
    double& at(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double row_sum(std::size_t i) const {
        double s = 0.0;
        for (std::size_t j = 0; j < k_; ++j) s += at(i, j);
        return s;
    }

    double total() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }

    SquareMatrix multiply(const SquareMatrix& other) const {
        if (other.k_ != k_) throw std::invalid_argument("matrix dimension mismatch");
        SquareMatrix out(k_);
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t l = 0; l < k_; ++l) {
                const double a = at(i, l);
                if (a == 0.0) continue;
                for (std::size_t j = 0; j < k_; ++j) out.at(i, j) += a * other.at(l, j);
            }
        return out;
    }

    SquareMatrix power(unsigned steps) const {
        if (steps == 0) throw std::invalid_argument("matrix power requires steps >= 1");
        SquareMatrix out = *this;
        for (unsigned s = 1; s < steps; ++s) out = out.multiply(*this);
        return out;
    }

    bool operator==(const SquareMatrix& o) const { return k_ == o.k_ && data_ == o.data_; }

private:
    std::size_t k_ = 0;
    std::vector<double> data_;
};

/// A point on the probability simplex. Stored as a plain vector; use
/// validate_prob() to enforce the simplex contract at module boundaries.
using ProbVector = std::vector<double>;

constexpr double kSimplexTol = 1e-9;

inline bool is_prob_vector(const ProbVector& p, double tol = kSimplexTol) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol;
}

inline void validate_prob(const ProbVector& p) {
    if (!is_prob_vector(p)) throw std::invalid_argument("not a valid probability vector");
}

/// Normalize in place to sum 1. Throws if the total mass is zero.
inline void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s <= 0.0) throw std::domain_error("cannot normalize zero-mass vector");
    for (double& x : v) x /= s;
}

/// Lowest index wins on ties.
inline std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace prg
