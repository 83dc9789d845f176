#include <doctest.h>

#include <cmath>
#include <numeric>

#include "prg/datagen.hpp"
#include "prg/rng.hpp"

using namespace prg;

TEST_CASE("cadr counts match the geometric profile") {
    CHECK(cadr_label_counts(1.0, 10) == std::vector<int>(10, 1));
    CHECK(cadr_label_counts(20.0, 2) == std::vector<int>{20, 1});
    // Frozen from a high-precision evaluation of gamma^((k-i)/(k-1)).
    CHECK(cadr_label_counts(20.0, 10) == std::vector<int>{20, 14, 10, 7, 5, 4, 3, 2, 1, 1});
}

TEST_CASE("cadr head and tail") {
    for (double gamma : {1.0, 2.5, 7.0, 20.0, 100.0, 333.3}) {
        for (int k : {2, 3, 10, 17}) {
            const auto counts = cadr_label_counts(gamma, k);
            CHECK(counts.front() == static_cast<int>(std::floor(gamma + 0.5)));
            CHECK(counts.back() == 1);
            for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] <= counts[i - 1]);
        }
    }
}

TEST_CASE("cadr rejects invalid parameters") {
    CHECK_THROWS_AS(cadr_label_counts(0.5, 10), std::invalid_argument);
    CHECK_THROWS_AS(cadr_label_counts(20.0, 1), std::invalid_argument);
}

TEST_CASE("ours counts: uniform head forces gamma 1") {
    const auto r = ours_label_counts(40, 4, 10);
    CHECK(r.counts == std::vector<int>(10, 4));
    CHECK(r.gamma == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ours counts: closed form for k=2") {
    const auto r = ours_label_counts(30, 20, 2);
    CHECK(r.counts == std::vector<int>{20, 10});
    CHECK(r.gamma == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("ours counts: bisection case") {
    const auto r = ours_label_counts(40, 10, 10);
    CHECK(std::accumulate(r.counts.begin(), r.counts.end(), 0) == 40);
    CHECK(r.counts.front() == 10);
    for (std::size_t i = 1; i < r.counts.size(); ++i) CHECK(r.counts[i] <= r.counts[i - 1]);
    // Oracle bisection on (1-r^k)/(1-r) = n_L/N_1 gives gamma ~ 10.7837.
    CHECK(r.gamma == doctest::Approx(10.7837).epsilon(1e-3));
}

TEST_CASE("ours counts: infeasible specs rejected") {
    CHECK_THROWS_AS(ours_label_counts(10, 20, 2), InfeasibleSpecError);
    CHECK_THROWS_AS(ours_label_counts(100, 4, 10), InfeasibleSpecError);  // n1*k < n_L
}

TEST_CASE("ours counts sum exactly over randomized feasible specs") {
    StreamRng rng(7, "ours-property");
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(9));
        const int n1 = 1 + static_cast<int>(rng.next_below(50));
        const int lo = n1 + (k - 1);
        const int hi = n1 * k;
        if (lo > hi) continue;
        const int n_labeled = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
        const auto r = ours_label_counts(n_labeled, n1, k);
        CHECK(std::accumulate(r.counts.begin(), r.counts.end(), 0) == n_labeled);
        CHECK(r.counts.front() == n1);
        for (std::size_t i = 1; i < r.counts.size(); ++i) {
            CHECK(r.counts[i] <= r.counts[i - 1]);
            CHECK(r.counts[i] >= 1);
        }
    }
}

TEST_CASE("darp counts") {
    SUBCASE("full-scale example") {
        const auto r = darp_counts(1500, 100.0, 3000, 1.0, 10, false);
        CHECK(r.labeled.back() == 15);
        CHECK(r.labeled.front() == 1500);
        CHECK(r.unlabeled == std::vector<int>(10, 3000));
    }
    SUBCASE("unit ratios") {
        const auto r = darp_counts(10, 1.0, 10, 1.0, 4, false);
        CHECK(r.labeled == std::vector<int>(4, 10));
        CHECK(r.unlabeled == std::vector<int>(4, 10));
    }
    SUBCASE("reversed unlabeled") {
        const auto r = darp_counts(100, 1.0, 100, 100.0, 2, true);
        CHECK(r.unlabeled == std::vector<int>{1, 100});
    }
    SUBCASE("reversed is the exact mirror") {
        const auto fwd = darp_counts(300, 10.0, 500, 25.0, 7, false);
        const auto rev = darp_counts(300, 10.0, 500, 25.0, 7, true);
        auto mirrored = rev.unlabeled;
        std::reverse(mirrored.begin(), mirrored.end());
        CHECK(fwd.unlabeled == mirrored);
    }
    SUBCASE("invalid ratios") {
        CHECK_THROWS_AS(darp_counts(10, 0.9, 10, 1.0, 4, false), std::invalid_argument);
    }
}

namespace {

SyntheticSpec small_synthetic() {
    SyntheticSpec syn;
    syn.k = 4;
    syn.dim = 6;
    syn.per_class_pool = 50;
    syn.n_test_per_class = 5;
    return syn;
}

MnarSpec small_mnar() {
    MnarSpec mnar;
    mnar.protocol = Protocol::kCadr;
    mnar.k = 4;
    mnar.gamma = 5.0;
    mnar.m1_unlabeled = 20;
    return mnar;
}

}  // namespace

TEST_CASE("zero noise puts every sample on its class mean") {
    auto syn = small_synthetic();
    syn.noise_sigma = 0.0;
    const auto ds = generate_dataset(syn, small_mnar(), 3);
    const auto means = class_means(syn);
    for (const auto& s : ds.labeled) CHECK(s.features == means[static_cast<std::size_t>(s.label)]);
    for (const auto& s : ds.test) CHECK(s.features == means[static_cast<std::size_t>(s.label)]);
}

TEST_CASE("protocol counts propagate into the dataset") {
    SyntheticSpec syn;
    syn.k = 10;
    syn.dim = 16;
    syn.per_class_pool = 600;
    syn.n_test_per_class = 10;
    MnarSpec mnar;
    mnar.protocol = Protocol::kCadr;
    mnar.k = 10;
    mnar.gamma = 20.0;
    mnar.m1_unlabeled = 500;
    const auto ds = generate_dataset(syn, mnar, 11);
    CHECK(ds.class_counts_labeled == std::vector<int>{20, 14, 10, 7, 5, 4, 3, 2, 1, 1});
    CHECK(ds.class_counts_unlabeled == std::vector<int>(10, 500));
    CHECK(ds.labeled.size() == 67);
    CHECK(ds.unlabeled.size() == 5000);
}

TEST_CASE("generation is a pure function of (syn, mnar, seed)") {
    const auto a = generate_dataset(small_synthetic(), small_mnar(), 42);
    const auto b = generate_dataset(small_synthetic(), small_mnar(), 42);
    REQUIRE(a.labeled.size() == b.labeled.size());
    for (std::size_t i = 0; i < a.labeled.size(); ++i) {
        CHECK(a.labeled[i].features == b.labeled[i].features);
        CHECK(a.labeled[i].label == b.labeled[i].label);
    }
    REQUIRE(a.unlabeled.size() == b.unlabeled.size());
    for (std::size_t i = 0; i < a.unlabeled.size(); ++i)
        CHECK(a.unlabeled[i].features == b.unlabeled[i].features);

    const auto c = generate_dataset(small_synthetic(), small_mnar(), 43);
    CHECK(a.labeled[0].features != c.labeled[0].features);
}

TEST_CASE("unlabeled indices are unique and dense") {
    const auto ds = generate_dataset(small_synthetic(), small_mnar(), 5);
    std::vector<bool> seen(ds.unlabeled.size(), false);
    for (const auto& s : ds.unlabeled) {
        REQUIRE(s.index >= 0);
        REQUIRE(static_cast<std::size_t>(s.index) < ds.unlabeled.size());
        CHECK(!seen[static_cast<std::size_t>(s.index)]);
        seen[static_cast<std::size_t>(s.index)] = true;
    }
}

TEST_CASE("pool exhaustion is an infeasible spec") {
    auto syn = small_synthetic();
    syn.per_class_pool = 10;
    auto mnar = small_mnar();
    mnar.m1_unlabeled = 100;
    CHECK_THROWS_AS(generate_dataset(syn, mnar, 1), InfeasibleSpecError);
}

TEST_CASE("pair geometry: near within pairs, far across pairs") {
    SyntheticSpec syn;
    syn.k = 10;
    syn.dim = 16;
    const auto means = class_means(syn);
    auto dist = [&](int a, int b) {
        double s = 0.0;
        for (int d = 0; d < syn.dim; ++d) {
            const double diff = means[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)] -
                                means[static_cast<std::size_t>(b)][static_cast<std::size_t>(d)];
            s += diff * diff;
        }
        return std::sqrt(s);
    };
    for (int p = 0; p < 5; ++p)
        CHECK(dist(2 * p, 2 * p + 1) == doctest::Approx(syn.pair_near_distance));
    for (int a = 0; a < 10; ++a)
        for (int b = 0; b < 10; ++b)
            if (a / 2 != b / 2) CHECK(dist(a, b) >= syn.far_distance - syn.pair_near_distance - 1e-12);
}
