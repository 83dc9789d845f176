#pragma once

#include <string>
#include <vector>

namespace prg {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int k) : k_(k), counts_(static_cast<std::size_t>(k) * k, 0) {}

    void add(int true_class, int predicted_class);
    int at(int i, int j) const { return counts_[static_cast<std::size_t>(i) * k_ + j]; }
    int dim() const { return k_; }
    long total() const;

private:
    int k_;
    std::vector<long> counts_;
};

/// trace / total; throws on an empty matrix.
double accuracy(const ConfusionMatrix& confusion);

/// Geometric mean of per-class recall; 0 if any recall is 0.
double gm_score(const std::vector<double>& per_class_recall);

struct PrecisionRecall {
    std::vector<double> precision;
    std::vector<double> recall;
};

/// Empty rows/columns yield 0 by convention.
PrecisionRecall per_class_precision_recall(const ConfusionMatrix& confusion);

struct PseudoErrorRates {
    std::vector<double> rates;       // classes with no coverage report 1.0
    std::vector<bool> no_coverage;   // flag for the 1.0-by-convention case
};

/// Error rates over accepted pseudo-labels only, grouped by hidden true class.
PseudoErrorRates pseudo_label_error_rates(const std::vector<int>& hidden_labels,
                                          const std::vector<int>& accepted_pseudo_labels, int k);

struct MetricRecord {
    long iteration = 0;
    double test_accuracy = 0.0;
    double gm = 0.0;
    double accepted_fraction = 0.0;
    std::vector<double> recall;
    std::vector<double> precision;
    std::vector<double> pseudo_error;
    double tracking_symmetry = 0.0;
};

std::string metrics_csv_header(int k);

/// Fixed 6-decimal formatting for bit-exact replay comparison.
std::string metrics_csv_row(const MetricRecord& r);

}  // namespace prg
