#include <doctest.h>

#include <algorithm>

#include "prg/metrics.hpp"
#include "prg/rng.hpp"

using namespace prg;

TEST_CASE("accuracy") {
    ConfusionMatrix perfect(3);
    perfect.add(0, 0);
    perfect.add(1, 1);
    perfect.add(2, 2);
    CHECK(accuracy(perfect) == 1.0);

    ConfusionMatrix wrong(2);
    wrong.add(0, 1);
    wrong.add(0, 1);
    CHECK(accuracy(wrong) == 0.0);

    ConfusionMatrix mixed(2);
    for (int n = 0; n < 3; ++n) mixed.add(0, 0);
    mixed.add(0, 1);
    mixed.add(1, 0);
    for (int n = 0; n < 3; ++n) mixed.add(1, 1);
    CHECK(accuracy(mixed) == doctest::Approx(0.75));

    CHECK_THROWS_AS(accuracy(ConfusionMatrix(4)), std::invalid_argument);
}

TEST_CASE("gm_score") {
    CHECK(gm_score({1.0, 1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(gm_score({1.0, 0.25}) == doctest::Approx(0.5));
    CHECK(gm_score({0.9, 0.8, 0.7}) == doctest::Approx(0.7958114).epsilon(1e-6));
    CHECK(gm_score({0.5, 0.0, 1.0}) == 0.0);
    CHECK_THROWS_AS(gm_score({1.5}), std::invalid_argument);
    CHECK_THROWS_AS(gm_score({}), std::invalid_argument);
}

TEST_CASE("gm lies between the extreme recalls") {
    StreamRng rng(31, "gm-bounds");
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> recalls(2 + rng.next_below(10));
        for (double& r : recalls) r = 0.05 + 0.95 * rng.next_double();
        const double gm = gm_score(recalls);
        CHECK(gm <= *std::max_element(recalls.begin(), recalls.end()) + 1e-12);
        CHECK(gm >= *std::min_element(recalls.begin(), recalls.end()) - 1e-12);
        double mean = 0.0;
        for (double r : recalls) mean += r / static_cast<double>(recalls.size());
        CHECK(gm <= mean + 1e-12);
    }
}

TEST_CASE("per_class_precision_recall") {
    SUBCASE("identity counts") {
        ConfusionMatrix m(3);
        for (int i = 0; i < 3; ++i) m.add(i, i);
        const auto pr = per_class_precision_recall(m);
        CHECK(pr.precision == std::vector<double>{1.0, 1.0, 1.0});
        CHECK(pr.recall == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("empty column gives zero precision") {
        ConfusionMatrix m(2);
        m.add(0, 0);
        m.add(1, 0);
        const auto pr = per_class_precision_recall(m);
        CHECK(pr.precision[1] == 0.0);
        CHECK(pr.recall[1] == 0.0);
        CHECK(pr.precision[0] == doctest::Approx(0.5));
        CHECK(pr.recall[0] == doctest::Approx(1.0));
    }
    SUBCASE("ratio example") {
        ConfusionMatrix m(2);
        for (int n = 0; n < 8; ++n) m.add(0, 0);
        for (int n = 0; n < 2; ++n) m.add(0, 1);
        for (int n = 0; n < 4; ++n) m.add(1, 0);
        for (int n = 0; n < 6; ++n) m.add(1, 1);
        const auto pr = per_class_precision_recall(m);
        CHECK(pr.precision[0] == doctest::Approx(8.0 / 12.0));
        CHECK(pr.precision[1] == doctest::Approx(6.0 / 8.0));
        CHECK(pr.recall[0] == doctest::Approx(0.8));
        CHECK(pr.recall[1] == doctest::Approx(0.6));
    }
}

TEST_CASE("pseudo_label_error_rates") {
    SUBCASE("all correct") {
        const auto r = pseudo_label_error_rates({0, 1, 2}, {0, 1, 2}, 3);
        CHECK(r.rates == std::vector<double>{0.0, 0.0, 0.0});
        CHECK(r.no_coverage == std::vector<bool>{false, false, false});
    }
    SUBCASE("uncovered class reports 1.0 with the flag") {
        const auto r = pseudo_label_error_rates({0, 0}, {0, 1}, 3);
        CHECK(r.rates[1] == 1.0);
        CHECK(r.no_coverage[1]);
        CHECK(r.rates[2] == 1.0);
        CHECK(r.no_coverage[2]);
        CHECK(r.rates[0] == doctest::Approx(0.5));
        CHECK(!r.no_coverage[0]);
    }
    SUBCASE("counting example") {
        const auto r = pseudo_label_error_rates({1, 1, 1}, {1, 1, 0}, 2);
        CHECK(r.rates[1] == doctest::Approx(1.0 / 3.0));
        CHECK(!r.no_coverage[1]);
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(pseudo_label_error_rates({0}, {0, 1}, 2), std::invalid_argument);
    }
}

TEST_CASE("csv header and row format") {
    CHECK(metrics_csv_header(2) ==
          "iteration,test_accuracy,gm,accepted_fraction,recall_1,recall_2,precision_1,precision_2,"
          "pseudo_err_1,pseudo_err_2,symmetry");
    MetricRecord r;
    r.iteration = 1000;
    r.test_accuracy = 0.5;
    r.gm = 0.25;
    r.accepted_fraction = 1.0 / 3.0;
    r.recall = {1.0, 0.0};
    r.precision = {0.125, 0.875};
    r.pseudo_error = {0.0, 1.0};
    r.tracking_symmetry = 0.123456789;
    CHECK(metrics_csv_row(r) ==
          "1000,0.500000,0.250000,0.333333,1.000000,0.000000,0.125000,0.875000,0.000000,1.000000,"
          "0.123457");
}
