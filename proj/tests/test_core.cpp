#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "glmix/core.hpp"
#include "support.hpp"

using namespace glmix;

namespace {
// 50-digit direct evaluations, frozen.
constexpr double kEntropyQuarter = 0.81127812445913286391;  // H((1/4, 3/4))
constexpr double kKlHalfQuarter = 0.20751874963942190927;   // D((1/2,1/2) || (1/4,3/4))
constexpr double kLn3 = 1.0986122886681096914;
constexpr double kLog2Of3 = 1.5849625007211561815;
}  // namespace

TEST_CASE("Distribution enforces strict positivity and unit sum") {
    Distribution d{0.25, 0.75};
    CHECK(d.alphabet_size() == 2);
    CHECK(d[0] == Catch::Approx(0.25));
    CHECK(d[1] == Catch::Approx(0.75));

    SECTION("clamps extreme entries and renormalizes") {
        Distribution e{0.0, 1.0};
        CHECK(e[0] > 0.0);
        CHECK(e[1] < 1.0);
        CHECK(e[0] + e[1] == Catch::Approx(1.0).margin(1e-9));
        CHECK(e[0] >= kMinProb / 2.0);
    }
    SECTION("rejects degenerate shapes") {
        CHECK_THROWS_AS(Distribution{0.5}, std::invalid_argument);
        CHECK_THROWS_AS(Distribution(std::vector<double>{}), std::invalid_argument);
        CHECK_THROWS_AS((Distribution{0.5, std::nan("")}), std::invalid_argument);
    }
    SECTION("random draws satisfy the invariants") {
        auto g = testsupport::rng(11);
        for (int t = 0; t < 200; ++t) {
            const std::size_t a = 2 + t % 5;
            Distribution r = testsupport::random_dist(g, a, 0.001, 1.0);
            double sum = 0.0;
            for (std::size_t x = 0; x < a; ++x) {
                CHECK(r[x] > 0.0);
                CHECK(r[x] < 1.0);
                sum += r[x];
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("WeightVector validates and normalizes") {
    CHECK_THROWS_AS(WeightVector({-0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{}), std::invalid_argument);

    WeightVector w{2.0, 6.0};
    const WeightVector n = w.normalized();
    CHECK(n[0] == Catch::Approx(0.25).margin(1e-12));
    CHECK(n[1] == Catch::Approx(0.75).margin(1e-12));
    CHECK(n.sum() == Catch::Approx(1.0).margin(1e-12));

    CHECK(WeightVector::uniform(4)[2] == Catch::Approx(0.25));
}

TEST_CASE("PredictionSet caches the log matrix") {
    auto g = testsupport::rng(12);
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = 1 + t % 5, a = 2 + t % 4;
        PredictionSet ps = testsupport::random_ps(g, m, a);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t x = 0; x < a; ++x)
                CHECK(ps.logp(i, x) == Catch::Approx(std::log(ps.dist(i)[x])).margin(1e-12));
    }
    SECTION("alphabet mismatch is rejected") {
        std::vector<Distribution> d;
        d.push_back(Distribution{0.5, 0.5});
        d.push_back(Distribution{0.2, 0.3, 0.5});
        CHECK_THROWS_AS(PredictionSet(std::move(d)), std::invalid_argument);
    }
    SECTION("log matrix access without logs populated throws") {
        PredictionSet ps;
        const double p1[2] = {0.3, 0.7};
        ps.assign_binary(p1, false);
        CHECK_THROWS_AS(ps.logp(0, 0), std::logic_error);
        ps.assign_binary(p1, true);
        CHECK(ps.logp(0, 1) == Catch::Approx(std::log(0.3)).margin(1e-12));
    }
}

TEST_CASE("entropy matches direct evaluation") {
    CHECK(entropy(Distribution{0.5, 0.5}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(entropy(Distribution{0.25, 0.25, 0.25, 0.25}) == Catch::Approx(2.0).margin(1e-12));
    CHECK(entropy(Distribution{0.25, 0.75}) == Catch::Approx(kEntropyQuarter).margin(1e-12));

    auto g = testsupport::rng(13);
    for (int t = 0; t < 100; ++t) {
        const std::size_t a = 2 + t % 5;
        const Distribution p = testsupport::random_dist(g, a);
        const double h = entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= std::log2(double(a)) + 1e-12);
    }
}

TEST_CASE("kl_divergence: identity, frozen value, nonnegativity") {
    CHECK(kl_divergence(Distribution{0.5, 0.5}, Distribution{0.5, 0.5}) ==
          Catch::Approx(0.0).margin(1e-15));
    CHECK(kl_divergence(Distribution{0.5, 0.5}, Distribution{0.25, 0.75}) ==
          Catch::Approx(kKlHalfQuarter).margin(1e-12));
    CHECK_THROWS_AS(kl_divergence(Distribution{0.5, 0.5}, Distribution{0.2, 0.3, 0.5}),
                    std::invalid_argument);

    auto g = testsupport::rng(14);
    for (int t = 0; t < 500; ++t) {
        const std::size_t a = 2 + t % 4;
        const Distribution p = testsupport::random_dist(g, a);
        const Distribution q = testsupport::random_dist(g, a);
        const double d = kl_divergence(p, q);
        CHECK(d >= 0.0);
        double maxgap = 0.0;
        for (std::size_t x = 0; x < a; ++x)
            maxgap = std::max(maxgap, std::abs(p[x] - q[x]));
        if (d < 1e-15) CHECK(maxgap < 1e-6);
        if (maxgap < 1e-12) CHECK(d < 1e-12);
    }
}

TEST_CASE("expected code length decomposes into entropy plus divergence") {
    auto g = testsupport::rng(15);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t a = 2 + t % 5;
        const Distribution p = testsupport::random_dist(g, a, 0.01, 1.0);
        const Distribution q = testsupport::random_dist(g, a, 0.01, 1.0);
        double expected_len = 0.0;
        for (std::size_t x = 0; x < a; ++x) expected_len += p[x] * code_length(q, x);
        CHECK(expected_len ==
              Catch::Approx(entropy(p) + kl_divergence(p, q)).margin(1e-9));
    }
}

TEST_CASE("stretch and squash") {
    CHECK(stretch(0.5) == Catch::Approx(0.0).margin(1e-15));
    CHECK(stretch(0.75) == Catch::Approx(kLn3).margin(1e-14));
    CHECK(squash(0.0) == Catch::Approx(0.5).margin(1e-15));
    CHECK(squash(kLn3) == Catch::Approx(0.75).margin(1e-14));

    CHECK_THROWS_AS(stretch(0.0), std::domain_error);
    CHECK_THROWS_AS(stretch(1.0), std::domain_error);
    CHECK_THROWS_AS(stretch(-0.25), std::domain_error);

    SECTION("inverse pair on the clamped working range") {
        auto g = testsupport::rng(16);
        const double lo = std::ldexp(1.0, -12);
        for (int t = 0; t < 2000; ++t) {
            const double p = testsupport::uniform(g, lo, 1.0 - lo);
            CHECK(squash(stretch(p)) == Catch::Approx(p).margin(1e-12));
        }
        CHECK(squash(stretch(lo)) == Catch::Approx(lo).margin(1e-12));
        CHECK(squash(stretch(1.0 - lo)) == Catch::Approx(1.0 - lo).margin(1e-12));
    }
    SECTION("antisymmetry and monotonicity") {
        auto g = testsupport::rng(17);
        for (int t = 0; t < 1000; ++t) {
            const double x = testsupport::uniform(g, -30.0, 30.0);
            CHECK(squash(x) + squash(-x) == Catch::Approx(1.0).margin(1e-15));
            CHECK(squash(x) >= squash(x - 1e-9));
            const double y = testsupport::uniform(g, -8.0, 8.0);
            CHECK(squash(y) > squash(y - 1e-9));
        }
    }
    SECTION("stretch of p and 1-p are opposite") {
        CHECK(stretch(0.2) == Catch::Approx(-stretch(0.8)).margin(1e-12));
    }
}

TEST_CASE("code_length") {
    CHECK(code_length(Distribution{0.5, 0.5}, 0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(code_length(Distribution{0.25, 0.75}, 0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(code_length(Distribution{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1) ==
          Catch::Approx(kLog2Of3).margin(1e-12));
    CHECK_THROWS_AS(code_length(Distribution{0.5, 0.5}, 2), std::invalid_argument);
}
