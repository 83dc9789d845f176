#include "prg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "prg/rng.hpp"

namespace prg {
namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

int integerize(double x, Rounding rounding) {
    int v = rounding == Rounding::kRound ? round_half_up(x) : static_cast<int>(std::floor(x));
    return std::max(1, v);
}

std::vector<double> geometric_profile(double head, double ratio, int k, bool reversed) {
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        const double expo = reversed ? -static_cast<double>(k - i) / (k - 1)
                                     : -static_cast<double>(i - 1) / (k - 1);
        out[static_cast<std::size_t>(i - 1)] = head * std::pow(ratio, expo);
    }
    return out;
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::kCadr: return "cadr";
        case Protocol::kOurs: return "ours";
        case Protocol::kDarp: return "darp";
        case Protocol::kBalanced: return "balanced";
    }
    throw std::logic_error("unknown protocol");
}

Protocol protocol_from_string(const std::string& s) {
    if (s == "cadr") return Protocol::kCadr;
    if (s == "ours") return Protocol::kOurs;
    if (s == "darp") return Protocol::kDarp;
    if (s == "balanced") return Protocol::kBalanced;
    throw std::invalid_argument("unknown protocol: " + s);
}

std::vector<int> cadr_label_counts(double gamma, int k, Rounding rounding) {
    if (gamma < 1.0) throw std::invalid_argument("cadr: gamma must be >= 1");
    if (k < 2) throw std::invalid_argument("cadr: k must be >= 2");
    std::vector<int> counts(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        const double v = std::pow(gamma, static_cast<double>(k - i) / (k - 1));
        counts[static_cast<std::size_t>(i - 1)] = integerize(v, rounding);
    }
    return counts;
}

OursCounts ours_label_counts(int n_labeled, int n1, int k, Rounding rounding) {
    if (k < 2) throw std::invalid_argument("ours: k must be >= 2");
    if (n1 < 1) throw std::invalid_argument("ours: n1 must be >= 1");
    if (n_labeled < n1 + (k - 1) || n_labeled > n1 * k)
        throw InfeasibleSpecError("ours: no feasible nonincreasing profile with head n1");

    auto total = [&](double gamma) {
        double s = 0.0;
        for (double v : geometric_profile(n1, gamma, k, false)) s += v;
        return s;
    };

    // total() is strictly decreasing in gamma; total(1) = n1 * k >= n_labeled.
    double lo = 1.0, hi = 1.0;
    while (total(hi) > n_labeled) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) throw InfeasibleSpecError("ours: no gamma >= 1 satisfies the constraint");
    }
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-13 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) > n_labeled ? lo : hi) = mid;
    }
    const double gamma = 0.5 * (lo + hi);

    const std::vector<double> cont = geometric_profile(n1, gamma, k, false);
    std::vector<int> counts(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) counts[static_cast<std::size_t>(i)] = integerize(cont[static_cast<std::size_t>(i)], rounding);
    counts[0] = n1;

    // Repair rounding-induced sum mismatch, largest fractional remainders first.
    // The head stays pinned at n1 and counts never drop below 1.
    auto remainder = [&](int i) { return cont[static_cast<std::size_t>(i)] - counts[static_cast<std::size_t>(i)]; };
    int diff = n_labeled - std::accumulate(counts.begin(), counts.end(), 0);
    while (diff != 0) {
        int best = -1;
        for (int i = 1; i < k; ++i) {
            if (diff > 0) {
                if (counts[static_cast<std::size_t>(i)] >= n1) continue;
                if (best < 0 || remainder(i) > remainder(best)) best = i;
            } else {
                if (counts[static_cast<std::size_t>(i)] <= 1) continue;
                if (best < 0 || remainder(i) < remainder(best)) best = i;
            }
        }
        if (best < 0) throw InfeasibleSpecError("ours: cannot repair counts to sum n_labeled");
        counts[static_cast<std::size_t>(best)] += diff > 0 ? 1 : -1;
        diff += diff > 0 ? -1 : 1;
    }
    // Restore monotonicity possibly broken by the repair; sum and head are kept.
    std::sort(counts.begin() + 1, counts.end(), std::greater<int>());
    return {counts, gamma};
}

DarpCounts darp_counts(int n1, double gamma_l, int m1, double gamma_u, int k, bool reversed,
                       Rounding rounding) {
    if (gamma_l < 1.0 || gamma_u < 1.0) throw std::invalid_argument("darp: ratios must be >= 1");
    if (k < 2) throw std::invalid_argument("darp: k must be >= 2");
    DarpCounts out;
    for (double v : geometric_profile(n1, gamma_l, k, false)) out.labeled.push_back(integerize(v, rounding));
    for (double v : geometric_profile(m1, gamma_u, k, reversed)) out.unlabeled.push_back(integerize(v, rounding));
    return out;
}

SplitCounts split_counts(const MnarSpec& mnar) {
    SplitCounts out;
    const int k = mnar.k;
    switch (mnar.protocol) {
        case Protocol::kCadr:
            out.labeled = cadr_label_counts(mnar.gamma, k, mnar.rounding);
            out.gamma = mnar.gamma;
            break;
        case Protocol::kOurs: {
            auto oc = ours_label_counts(mnar.n_labeled, mnar.n1_labeled, k, mnar.rounding);
            out.labeled = oc.counts;
            out.gamma = oc.gamma;
            break;
        }
        case Protocol::kDarp: {
            auto dc = darp_counts(mnar.n1_labeled, mnar.gamma_l, mnar.m1_unlabeled,
                                  mnar.gamma_u.value_or(1.0), k, mnar.unlabeled_reversed,
                                  mnar.rounding);
            out.labeled = dc.labeled;
            out.unlabeled = dc.unlabeled;
            out.gamma = mnar.gamma_l;
            return out;
        }
        case Protocol::kBalanced:
            out.labeled.assign(static_cast<std::size_t>(k), mnar.n1_labeled);
            out.gamma = 1.0;
            break;
    }
    if (mnar.gamma_u.has_value()) {
        if (*mnar.gamma_u < 1.0) throw std::invalid_argument("gamma_u must be >= 1");
        for (double v : geometric_profile(mnar.m1_unlabeled, *mnar.gamma_u, k, mnar.unlabeled_reversed))
            out.unlabeled.push_back(integerize(v, mnar.rounding));
    } else {
        out.unlabeled.assign(static_cast<std::size_t>(k), mnar.m1_unlabeled);
    }
    return out;
}

std::vector<std::vector<double>> class_means(const SyntheticSpec& syn) {
    const int k = syn.k;
    const int dim = syn.dim;
    if (dim < 2) throw std::invalid_argument("synthetic: dim must be >= 2");
    const int pairs = (k + 1) / 2;
    if (pairs > dim) throw InfeasibleSpecError("synthetic: too many class pairs for dim");
    const double center_scale = syn.far_distance / std::sqrt(2.0);

    // Each pair owns a centroid block plus a disjoint share of offset axes,
    // so wide blocks survive feature dropout while narrow ones do not. The
    // budget deliberately tiers the pairs: head pairs have labels to spare,
    // interior pairs get the widest offset support, and the tail pair stays
    // minimal so the hardest sparsely-labeled case stays hard.
    std::vector<int> centroid_width(static_cast<std::size_t>(pairs), 1);
    std::vector<int> offset_width(static_cast<std::size_t>(pairs), 0);
    int budget = dim - pairs;
    for (int p = 0; p < pairs && budget > 0; ++p, --budget) offset_width[static_cast<std::size_t>(p)] = 1;
    for (int p = 0; p + 1 < pairs && budget > 0; ++p, --budget) centroid_width[static_cast<std::size_t>(p)] = 2;
    for (int round = 0; budget > 0 && pairs > 3; ++round)
        for (int p = 2; p + 1 < pairs && budget > 0; ++p, --budget)
            ++offset_width[static_cast<std::size_t>(p)];

    std::vector<std::vector<int>> centroid_axes(static_cast<std::size_t>(pairs));
    std::vector<std::vector<int>> offset_axes(static_cast<std::size_t>(pairs));
    int axis = 0;
    for (int p = 0; p < pairs; ++p)
        for (int j = 0; j < centroid_width[static_cast<std::size_t>(p)]; ++j)
            centroid_axes[static_cast<std::size_t>(p)].push_back(axis++);
    for (int p = 0; p < pairs; ++p)
        for (int j = 0; j < offset_width[static_cast<std::size_t>(p)]; ++j)
            offset_axes[static_cast<std::size_t>(p)].push_back(axis++);
    for (int p = 0; p < pairs; ++p)
        if (offset_axes[static_cast<std::size_t>(p)].empty())
            offset_axes[static_cast<std::size_t>(p)] = centroid_axes[static_cast<std::size_t>(p)];

    std::vector<std::vector<double>> means(static_cast<std::size_t>(k),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (int c = 0; c < k; ++c) {
        const int p = c / 2;
        const auto& cax = centroid_axes[static_cast<std::size_t>(p)];
        // Later pairs sit progressively farther out; far_distance is a floor,
        // and the extra margin keeps sparsely labeled pairs from being
        // swallowed by their neighbours.
        const double scale = center_scale * (1.0 + 0.25 * p);
        const double centroid = scale / std::sqrt(static_cast<double>(cax.size()));
        for (int a : cax) means[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = centroid;
        if (c + 1 < k || k % 2 == 0) {
            const auto& oax = offset_axes[static_cast<std::size_t>(p)];
            const double comp =
                0.5 * syn.pair_near_distance / std::sqrt(static_cast<double>(oax.size()));
            const double sign = (c % 2 == 0) ? comp : -comp;
            for (int a : oax) means[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] += sign;
        }
    }
    return means;
}

Dataset generate_dataset(const SyntheticSpec& syn, const MnarSpec& mnar, std::uint64_t seed) {
    if (syn.k != mnar.k) throw std::invalid_argument("synthetic and mnar class counts differ");
    const SplitCounts counts = split_counts(mnar);
    const int k = syn.k;
    const int dim = syn.dim;
    for (int c = 0; c < k; ++c) {
        if (counts.labeled[static_cast<std::size_t>(c)] + counts.unlabeled[static_cast<std::size_t>(c)] >
            syn.per_class_pool)
            throw InfeasibleSpecError("per-class demand exceeds per_class_pool");
    }

    const auto means = class_means(syn);
    StreamRng rng(seed, "data");

    Dataset ds;
    ds.k = k;
    ds.dim = dim;
    ds.class_counts_labeled = counts.labeled;
    ds.class_counts_unlabeled = counts.unlabeled;

    auto draw = [&](int c) {
        std::vector<double> f(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            f[static_cast<std::size_t>(d)] =
                means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                syn.noise_sigma * rng.next_gaussian();
        return f;
    };

    int next_index = 0;
    for (int c = 0; c < k; ++c) {
        // Pool per class, then a partial Fisher-Yates pick without replacement.
        std::vector<std::vector<double>> pool;
        pool.reserve(static_cast<std::size_t>(syn.per_class_pool));
        for (int i = 0; i < syn.per_class_pool; ++i) pool.push_back(draw(c));

        std::vector<int> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        const int need = counts.labeled[static_cast<std::size_t>(c)] +
                         counts.unlabeled[static_cast<std::size_t>(c)];
        for (int i = 0; i < need; ++i) {
            const auto j = i + static_cast<int>(rng.next_below(order.size() - static_cast<std::size_t>(i)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        for (int i = 0; i < counts.labeled[static_cast<std::size_t>(c)]; ++i)
            ds.labeled.push_back({pool[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])], c});
        for (int i = 0; i < counts.unlabeled[static_cast<std::size_t>(c)]; ++i) {
            const int src = order[static_cast<std::size_t>(counts.labeled[static_cast<std::size_t>(c)] + i)];
            ds.unlabeled.push_back({pool[static_cast<std::size_t>(src)], c, next_index++});
        }
    }
    for (int c = 0; c < k; ++c)
        for (int i = 0; i < syn.n_test_per_class; ++i) ds.test.push_back({draw(c), c});
    return ds;
}

namespace {

void write_split(std::ofstream& out, const std::vector<LabeledSample>& rows, int missing) {
    int idx = 0;
    for (const auto& s : rows) {
        out << idx++ << ',' << s.label << ',' << missing;
        for (double f : s.features) out << ',' << std::setprecision(17) << f;
        out << '\n';
    }
}

}  // namespace

void dump_dataset_csv(const Dataset& ds, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto header = [&](std::ofstream& out) {
        out << "index,label,missing";
        for (int d = 1; d <= ds.dim; ++d) out << ",f" << d;
        out << '\n';
    };
    {
        std::ofstream out(fs::path(out_dir) / "labeled.csv");
        header(out);
        write_split(out, ds.labeled, 0);
    }
    {
        std::ofstream out(fs::path(out_dir) / "test.csv");
        header(out);
        write_split(out, ds.test, 0);
    }
    {
        std::ofstream out(fs::path(out_dir) / "unlabeled.csv");
        std::ofstream hidden(fs::path(out_dir) / "hidden_labels.csv");
        out << "index,missing";
        for (int d = 1; d <= ds.dim; ++d) out << ",f" << d;
        out << '\n';
        hidden << "index,label\n";
        for (const auto& s : ds.unlabeled) {
            out << s.index << ",1";
            for (double f : s.features) out << ',' << std::setprecision(17) << f;
            out << '\n';
            hidden << s.index << ',' << s.hidden_label << '\n';
        }
    }
}

}  // namespace prg
