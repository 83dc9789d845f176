#include <doctest.h>

#include <cmath>

#include "prg/guidance.hpp"
#include "prg/rng.hpp"

using namespace prg;

namespace {

SquareMatrix make(std::size_t k, std::initializer_list<double> values) {
    SquareMatrix m(k);
    std::size_t i = 0;
    for (double v : values) m.data()[i++] = v;
    return m;
}

ProbVector random_simplex(StreamRng& rng, std::size_t k) {
    ProbVector p(k);
    double sum = 0.0;
    for (double& v : p) {
        v = -std::log(1.0 - rng.next_double());
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

TEST_CASE("build_transition_matrix: row normalize then insert diagonal") {
    const auto h = build_transition_matrix(make(2, {0, 3, 1, 0}), 1.0);
    CHECK(h.rows.at(0, 0) == doctest::Approx(1.0));
    CHECK(h.rows.at(0, 1) == doctest::Approx(1.0));
    CHECK(h.rows.at(1, 0) == doctest::Approx(1.0));
    CHECK(h.rows.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("build_transition_matrix: zero matrix gives the uniform walk") {
    const auto h = build_transition_matrix(SquareMatrix(3), 0.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(h.rows.at(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
}

TEST_CASE("build_transition_matrix: per-row fallback") {
    const auto h = build_transition_matrix(make(3, {0, 4, 0, 0, 0, 0, 2, 2, 0}), 1.0);
    CHECK(h.rows.at(0, 0) == doctest::Approx(0.5));
    CHECK(h.rows.at(0, 1) == doctest::Approx(1.0));
    CHECK(h.rows.at(0, 2) == doctest::Approx(0.0));
    for (std::size_t j = 0; j < 3; ++j) CHECK(h.rows.at(1, j) == doctest::Approx(0.5));
    for (std::size_t j = 0; j < 3; ++j) CHECK(h.rows.at(2, j) == doctest::Approx(0.5));
}

TEST_CASE("build_transition_matrix invariants") {
    StreamRng rng(5, "h-invariants");
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.next_below(8);
        SquareMatrix c(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j && rng.next_double() < 0.6) c.at(i, j) = std::floor(rng.next_double() * 20);
        const double alpha = rng.next_double() * 3;
        const auto h = build_transition_matrix(c, alpha);
        for (std::size_t i = 0; i < k; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < k; ++j)
                if (i != j) off += h.rows.at(i, j);
            CHECK(off == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(h.rows.at(i, i) == doctest::Approx(alpha / static_cast<double>(k - 1)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(build_transition_matrix(SquareMatrix(2), -0.1), std::invalid_argument);
}

TEST_CASE("class_rescale divides by clamped prediction fractions") {
    TransitionMatrix h{make(2, {1, 1, 1, 1}), 1.0};
    SUBCASE("plain counts") {
        const auto hp = class_rescale(h, {{30.0, 10.0}});
        CHECK(hp.rows.at(0, 0) == doctest::Approx(4.0 / 3.0));
        CHECK(hp.rows.at(0, 1) == doctest::Approx(4.0));
    }
    SUBCASE("zero count clamps to 1") {
        const auto hp = class_rescale(h, {{5.0, 0.0}});
        CHECK(hp.rows.at(0, 0) == doctest::Approx(1.2));
        CHECK(hp.rows.at(0, 1) == doctest::Approx(6.0));
    }
    SUBCASE("never zeroes positive mass") {
        const auto hp = class_rescale(h, {{100.0, 1.0}});
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(hp.rows.at(i, j) > 0.0);
    }
}

TEST_CASE("prg_rescale examples") {
    SUBCASE("constant row is the identity") {
        RescaledTransitionMatrix hp{make(2, {3, 3, 3, 3})};
        const auto r = prg_rescale({0.3, 0.7}, 1, hp);
        CHECK(r.p[0] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(r.p[1] == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(!r.fell_back);
    }
    SUBCASE("multiply and normalize") {
        RescaledTransitionMatrix hp{make(3, {1, 0.5, 2, 1, 1, 1, 1, 1, 1})};
        const auto r = prg_rescale({0.6, 0.3, 0.1}, 0, hp);
        CHECK(r.p[0] == doctest::Approx(0.6 / 0.95));
        CHECK(r.p[1] == doctest::Approx(0.15 / 0.95));
        CHECK(r.p[2] == doctest::Approx(0.2 / 0.95));
    }
    SUBCASE("one-hot input stays one-hot") {
        RescaledTransitionMatrix hp{make(2, {0.5, 2, 1, 1})};
        const auto r = prg_rescale({0.0, 1.0}, 1, hp);
        CHECK(r.p == ProbVector{0.0, 1.0});
    }
    SUBCASE("degenerate product falls back to p") {
        RescaledTransitionMatrix hp{make(2, {0, 0, 0, 0})};
        const auto r = prg_rescale({0.4, 0.6}, 0, hp);
        CHECK(r.fell_back);
        CHECK(r.p == ProbVector{0.4, 0.6});
    }
}

TEST_CASE("prg_rescale with steps uses the matrix power") {
    RescaledTransitionMatrix hp{make(2, {0.5, 0.5, 0.25, 0.75})};
    const SquareMatrix sq = hp.rows.multiply(hp.rows);
    const ProbVector p{0.2, 0.8};
    const auto two_step = prg_rescale(p, 0, hp, 2);
    std::vector<double> expected{sq.at(0, 0) * p[0], sq.at(0, 1) * p[1]};
    normalize(expected);
    CHECK(two_step.p[0] == doctest::Approx(expected[0]).epsilon(1e-12));
    CHECK(two_step.p[1] == doctest::Approx(expected[1]).epsilon(1e-12));
}

TEST_CASE("eta_rescale") {
    CHECK(eta_rescale({0.3, 0.7}, {{1.0, 1.0}, false}).p == ProbVector{0.3, 0.7});
    CHECK(eta_rescale({0.3, 0.7}, {{2.0, 2.0}, false}).p == ProbVector{0.3, 0.7});
    const auto r = eta_rescale({0.4, 0.6}, {{1.0, 0.0}, false});
    CHECK(r.p == ProbVector{1.0, 0.0});
    // excluded passes through
    CHECK(eta_rescale({0.4, 0.6}, {{0.0, 0.0}, true}).p == ProbVector{0.4, 0.6});
}

TEST_CASE("confidence_eta") {
    SUBCASE("above threshold selects the argmax with 1/p") {
        const auto w = confidence_eta({0.97, 0.03}, 0.95);
        CHECK(!w.excluded);
        CHECK(w.eta[0] == doctest::Approx(1.0 / 0.97));
        CHECK(w.eta[1] == 0.0);
        const auto r = eta_rescale({0.97, 0.03}, w);
        CHECK(r.p[0] == doctest::Approx(1.0));
        CHECK(r.p[1] == doctest::Approx(0.0));
    }
    SUBCASE("below threshold excludes") {
        const auto w = confidence_eta({0.6, 0.4}, 0.95);
        CHECK(w.excluded);
        CHECK(w.eta == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("tie goes to the lowest class index") {
        const auto w = confidence_eta({0.5, 0.5}, 0.5);
        CHECK(!w.excluded);
        CHECK(w.eta[0] == doctest::Approx(2.0));
        CHECK(w.eta[1] == 0.0);
    }
}

TEST_CASE("distribution_alignment_eta") {
    CHECK(distribution_alignment_eta({0.5, 0.5}, {0.5, 0.5}).eta == std::vector<double>{1.0, 1.0});
    const auto w = distribution_alignment_eta({0.5, 0.5}, {0.8, 0.2});
    CHECK(w.eta[0] == doctest::Approx(0.625));
    CHECK(w.eta[1] == doctest::Approx(2.5));
    const auto z = distribution_alignment_eta({1.0, 0.0}, {0.5, 0.5});
    CHECK(z.eta == std::vector<double>{2.0, 0.0});
}

TEST_CASE("rescaled_ce_gradient equals p - p_tilde and finite differences") {
    CHECK(rescaled_ce_gradient({0.3, 0.7}, {0.3, 0.7}) == std::vector<double>{0.0, 0.0});
    const auto g = rescaled_ce_gradient({0.5, 0.5}, {0.8, 0.2});
    CHECK(g[0] == doctest::Approx(-0.3));
    CHECK(g[1] == doctest::Approx(0.3));

    // Central differences of -sum p_tilde log softmax(o) at o with p = softmax(o).
    StreamRng rng(13, "grad-check");
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 5;
        std::vector<double> logits(k);
        for (double& o : logits) o = 4.0 * (rng.next_double() - 0.5);
        const ProbVector p_tilde = random_simplex(rng, k);
        auto softmax = [&](const std::vector<double>& o) {
            ProbVector p(o.size());
            double mx = o[0];
            for (double v : o) mx = std::max(mx, v);
            double sum = 0.0;
            for (std::size_t i = 0; i < o.size(); ++i) sum += (p[i] = std::exp(o[i] - mx));
            for (double& v : p) v /= sum;
            return p;
        };
        auto loss = [&](const std::vector<double>& o) {
            const ProbVector p = softmax(o);
            double l = 0.0;
            for (std::size_t i = 0; i < k; ++i) l -= p_tilde[i] * std::log(p[i]);
            return l;
        };
        const auto analytic = rescaled_ce_gradient(softmax(logits), p_tilde);
        const double h = 1e-5;
        for (std::size_t i = 0; i < k; ++i) {
            auto plus = logits, minus = logits;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (loss(plus) - loss(minus)) / (2 * h);
            CHECK(analytic[i] == doctest::Approx(fd).epsilon(0).scale(1).epsilon(1e-6));
        }
    }
}

TEST_CASE("guidance algebra invariants (randomized)") {
    StreamRng rng(21, "algebra");
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 2 + rng.next_below(8);
        SquareMatrix c(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j && rng.next_double() < 0.7) c.at(i, j) = std::floor(rng.next_double() * 10);
        const double alpha = rng.next_double() * 2;
        const auto h = build_transition_matrix(c, alpha);
        ProbVector p = random_simplex(rng, k);
        const std::size_t guide = rng.next_below(k);

        PredictionCounts uniform{std::vector<double>(k, 7.0)};
        const auto via_rescale = prg_rescale(p, guide, class_rescale(h, uniform));
        const auto direct = prg_rescale(p, guide, RescaledTransitionMatrix{h.rows});
        REQUIRE(!direct.fell_back);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(via_rescale.p[i] == doctest::Approx(direct.p[i]).epsilon(1e-9));

        CHECK(is_prob_vector(direct.p));
        // support preservation
        for (std::size_t i = 0; i < k; ++i)
            if (p[i] == 0.0) CHECK(direct.p[i] == 0.0);
    }
}

TEST_CASE("raising alpha raises the guided class mass") {
    RescaledTransitionMatrix low{SquareMatrix(3)}, high{SquareMatrix(3)};
    SquareMatrix c(3);
    c.at(0, 1) = 2;
    c.at(0, 2) = 1;
    c.at(1, 0) = 1;
    c.at(2, 0) = 1;
    const ProbVector p{0.5, 0.3, 0.2};
    double prev = 0.0;
    for (double alpha : {0.0, 0.5, 1.0, 2.0, 10.0}) {
        const auto h = build_transition_matrix(c, alpha);
        const auto r = prg_rescale(p, 0, RescaledTransitionMatrix{h.rows});
        if (alpha > 0.0) CHECK(r.p[0] > prev);
        prev = r.p[0];
    }
}
