#include "prg/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace prg {

void ConfusionMatrix::add(int true_class, int predicted_class) {
    if (true_class < 0 || true_class >= k_ || predicted_class < 0 || predicted_class >= k_)
        throw std::out_of_range("confusion matrix class out of range");
    ++counts_[static_cast<std::size_t>(true_class) * k_ + predicted_class];
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (long c : counts_) t += c;
    return t;
}

double accuracy(const ConfusionMatrix& confusion) {
    const long total = confusion.total();
    if (total == 0) throw std::invalid_argument("accuracy of empty confusion matrix");
    long trace = 0;
    for (int i = 0; i < confusion.dim(); ++i) trace += confusion.at(i, i);
    return static_cast<double>(trace) / static_cast<double>(total);
}

double gm_score(const std::vector<double>& per_class_recall) {
    if (per_class_recall.empty()) throw std::invalid_argument("gm_score of empty recall vector");
    double log_sum = 0.0;
    for (double r : per_class_recall) {
        if (r < 0.0 || r > 1.0) throw std::invalid_argument("recall out of [0,1]");
        if (r == 0.0) return 0.0;
        log_sum += std::log(r);
    }
    return std::exp(log_sum / static_cast<double>(per_class_recall.size()));
}

PrecisionRecall per_class_precision_recall(const ConfusionMatrix& confusion) {
    const int k = confusion.dim();
    PrecisionRecall out;
    out.precision.assign(static_cast<std::size_t>(k), 0.0);
    out.recall.assign(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < k; ++j) {
        long col = 0, row = 0;
        for (int i = 0; i < k; ++i) {
            col += confusion.at(i, j);
            row += confusion.at(j, i);
        }
        if (col > 0) out.precision[static_cast<std::size_t>(j)] = static_cast<double>(confusion.at(j, j)) / col;
        if (row > 0) out.recall[static_cast<std::size_t>(j)] = static_cast<double>(confusion.at(j, j)) / row;
    }
    return out;
}

PseudoErrorRates pseudo_label_error_rates(const std::vector<int>& hidden_labels,
                                          const std::vector<int>& accepted_pseudo_labels, int k) {
    if (hidden_labels.size() != accepted_pseudo_labels.size())
        throw std::invalid_argument("pseudo-label vectors differ in length");
    std::vector<long> total(static_cast<std::size_t>(k), 0);
    std::vector<long> wrong(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < hidden_labels.size(); ++i) {
        const int y = hidden_labels[i];
        if (y < 0 || y >= k) throw std::out_of_range("hidden label out of range");
        ++total[static_cast<std::size_t>(y)];
        if (accepted_pseudo_labels[i] != y) ++wrong[static_cast<std::size_t>(y)];
    }
    PseudoErrorRates out;
    out.rates.assign(static_cast<std::size_t>(k), 1.0);
    out.no_coverage.assign(static_cast<std::size_t>(k), false);
    for (int c = 0; c < k; ++c) {
        if (total[static_cast<std::size_t>(c)] == 0)
            out.no_coverage[static_cast<std::size_t>(c)] = true;
        else
            out.rates[static_cast<std::size_t>(c)] =
                static_cast<double>(wrong[static_cast<std::size_t>(c)]) / total[static_cast<std::size_t>(c)];
    }
    return out;
}

std::string metrics_csv_header(int k) {
    std::string h = "iteration,test_accuracy,gm,accepted_fraction";
    auto block = [&](const char* name) {
        for (int i = 1; i <= k; ++i) h += "," + std::string(name) + "_" + std::to_string(i);
    };
    block("recall");
    block("precision");
    block("pseudo_err");
    h += ",symmetry";
    return h;
}

std::string metrics_csv_row(const MetricRecord& r) {
    char buf[64];
    std::string row = std::to_string(r.iteration);
    auto append = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.6f", v);
        row += buf;
    };
    append(r.test_accuracy);
    append(r.gm);
    append(r.accepted_fraction);
    for (double v : r.recall) append(v);
    for (double v : r.precision) append(v);
    for (double v : r.pseudo_error) append(v);
    append(r.tracking_symmetry);
    return row;
}

}  // namespace prg
