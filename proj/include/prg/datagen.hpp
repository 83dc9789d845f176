#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prg {

struct InfeasibleSpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Protocol { kCadr, kOurs, kDarp, kBalanced };

enum class Rounding { kRound, kFloor };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

/// Parameters of a labeled/unlabeled split. Which fields are required
/// depends on the protocol; see the count generators below.
struct MnarSpec {
    Protocol protocol = Protocol::kCadr;
    int k = 10;
    double gamma = 20.0;                    // cadr
    int n_labeled = 40;                     // ours
    int n1_labeled = 10;                    // ours / darp / balanced
    double gamma_l = 1.0;                   // darp
    std::optional<double> gamma_u;          // optional unlabeled imbalance
    int m1_unlabeled = 500;                 // unlabeled head-class size
    bool unlabeled_reversed = false;
    Rounding rounding = Rounding::kRound;
};

struct SyntheticSpec {
    int k = 10;
    int dim = 16;
    int per_class_pool = 1000;
    double pair_near_distance = 2.0;
    double far_distance = 6.0;
    double noise_sigma = 1.0;
    int n_test_per_class = 100;
};

struct LabeledSample {
    std::vector<double> features;
    int label = 0;
};

struct UnlabeledSample {
    std::vector<double> features;
    int hidden_label = 0;  // readable only by metrics
    int index = 0;         // stable LabelBank key
};

struct Dataset {
    std::vector<LabeledSample> labeled;
    std::vector<UnlabeledSample> unlabeled;
    std::vector<LabeledSample> test;
    std::vector<int> class_counts_labeled;
    std::vector<int> class_counts_unlabeled;
    int k = 0;
    int dim = 0;
};

/// N_i = round(gamma^((k-i)/(k-1))), clamped >= 1, i = 1..k.
std::vector<int> cadr_label_counts(double gamma, int k, Rounding rounding = Rounding::kRound);

struct OursCounts {
    std::vector<int> counts;
    double gamma = 1.0;
};

/// Finds gamma >= 1 such that sum_i n1 * gamma^(-(i-1)/(k-1)) = n_labeled,
/// then integerizes so the counts sum to n_labeled exactly.
OursCounts ours_label_counts(int n_labeled, int n1, int k, Rounding rounding = Rounding::kRound);

struct DarpCounts {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
};

DarpCounts darp_counts(int n1, double gamma_l, int m1, double gamma_u, int k, bool reversed,
                       Rounding rounding = Rounding::kRound);

/// Per-class labeled and unlabeled counts implied by the full spec.
struct SplitCounts {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    double gamma = 1.0;  // effective labeled ratio (ours protocol)
};

SplitCounts split_counts(const MnarSpec& mnar);

/// Pure function of (syn, mnar, seed): identical inputs give identical output.
Dataset generate_dataset(const SyntheticSpec& syn, const MnarSpec& mnar, std::uint64_t seed);

/// Class mean layout used by generate_dataset; exposed for tests.
std::vector<std::vector<double>> class_means(const SyntheticSpec& syn);

/// CSV dump: labeled.csv / unlabeled.csv / test.csv with header
/// index,label,missing,f1..fD; hidden labels of unlabeled rows go to
/// hidden_labels.csv to preserve the firewall.
void dump_dataset_csv(const Dataset& ds, const std::string& out_dir);

}  // namespace prg
