#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "glmix/mixers.hpp"
#include "glmix/optlab.hpp"
#include "support.hpp"

using namespace glmix;
using testsupport::rng;

namespace {

PredictionSet binary_ps(std::initializer_list<double> p1s) {
    std::vector<Distribution> d;
    for (double p : p1s) d.push_back(Distribution::binary(p));
    return PredictionSet(std::move(d));
}

bool bitwise_equal(const Distribution& a, const Distribution& b) {
    if (a.alphabet_size() != b.alphabet_size()) return false;
    return std::memcmp(a.probs().data(), b.probs().data(),
                       a.alphabet_size() * sizeof(double)) == 0;
}

// Expected post-update weights recomputed independently: raw step, floor,
// renormalize until the floor holds.
std::vector<double> reference_project(std::vector<double> w, double eps) {
    for (std::size_t pass = 0; pass <= w.size() + 1; ++pass) {
        for (double& v : w)
            if (v < eps) v = eps;
        double s = 0.0;
        for (double v : w) s += v;
        for (double& v : w) v /= s;
        bool ok = true;
        for (double v : w)
            if (v < eps) ok = false;
        if (ok) break;
    }
    return w;
}

}  // namespace

TEST_CASE("mix_geometric basics") {
    SECTION("single model passes through") {
        auto g = rng(21);
        for (int t = 0; t < 100; ++t) {
            const std::size_t a = 2 + t % 3;
            PredictionSet ps({testsupport::random_dist(g, a)});
            const Distribution out = mix_geometric(ps, WeightVector{1.0});
            for (std::size_t x = 0; x < a; ++x)
                CHECK(out[x] == Catch::Approx(ps.dist(0)[x]).margin(1e-12));
        }
    }
    SECTION("symmetric binary pair mixes to one half") {
        const Distribution out = mix_geometric(binary_ps({0.8, 0.2}), WeightVector{1.0, 1.0});
        CHECK(out[1] == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("agrees with the divergence-minimizing grid oracle") {
        const PredictionSet ps = binary_ps({0.9, 0.5});
        const WeightVector w{2.0, 1.0};
        const Distribution got = mix_geometric(ps, w);
        const Distribution oracle = optlab::grid_minimize_geo(ps, w, 1e-4);
        CHECK(std::abs(got[1] - oracle[1]) <= 2e-4);
        CHECK(std::abs(got[0] - oracle[0]) <= 2e-4);
    }
    SECTION("scale invariance in the weights") {
        auto g = rng(22);
        for (int t = 0; t < 50; ++t) {
            const std::size_t m = 1 + t % 6, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            std::vector<double> w = testsupport::random_simplex(g, m);
            const Distribution base = mix_geometric(ps, WeightVector(w));
            for (double c : {2.0, 0.25, 1024.0}) {  // power-of-two scaling is exact
                std::vector<double> cw(w);
                for (double& v : cw) v *= c;
                CHECK(bitwise_equal(mix_geometric(ps, WeightVector(cw)), base));
            }
            std::vector<double> cw(w);
            for (double& v : cw) v *= 3.0;
            const Distribution scaled = mix_geometric(ps, WeightVector(cw));
            for (std::size_t x = 0; x < a; ++x)
                CHECK(scaled[x] == Catch::Approx(base[x]).margin(1e-13));
        }
    }
    SECTION("indicator weights recover the corresponding model") {
        auto g = rng(23);
        for (int t = 0; t < 50; ++t) {
            const std::size_t m = 2 + t % 4, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            std::vector<double> w(m, 0.0);
            const std::size_t pick = t % m;
            w[pick] = 1.0;
            const Distribution out = mix_geometric(ps, WeightVector(w));
            for (std::size_t x = 0; x < a; ++x)
                CHECK(out[x] == Catch::Approx(ps.dist(pick)[x]).margin(1e-9));
        }
    }
    SECTION("all-zero weights are rejected by the type") {
        CHECK_THROWS_AS(WeightVector({0.0, 0.0}), std::invalid_argument);
    }
    SECTION("model count mismatch") {
        CHECK_THROWS_AS(mix_geometric(binary_ps({0.5, 0.5}), WeightVector{1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("mix_linear basics") {
    SECTION("indicator weight returns the first model") {
        const PredictionSet ps = binary_ps({0.3, 0.9});
        const Distribution out = mix_linear(ps, WeightVector{1.0, 0.0});
        CHECK(out[1] == Catch::Approx(0.3).margin(1e-12));
    }
    SECTION("symmetric pair mixes to one half") {
        const Distribution out = mix_linear(binary_ps({0.8, 0.2}), WeightVector{0.5, 0.5});
        CHECK(out[1] == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("weighted mean example: 0.25*0.4 + 0.75*0.8") {
        const Distribution out = mix_linear(binary_ps({0.4, 0.8}), WeightVector{2.0, 6.0});
        CHECK(out[1] == Catch::Approx(0.7).margin(1e-12));
    }
    SECTION("agrees with its grid oracle on a fixed instance") {
        const PredictionSet ps = binary_ps({0.9, 0.5});
        const WeightVector w{2.0, 1.0};
        const Distribution got = mix_linear(ps, w);
        const Distribution oracle = optlab::grid_minimize_lin(ps, w, 1e-4);
        CHECK(std::abs(got[1] - oracle[1]) <= 2e-4);
    }
}

TEST_CASE("every mixture output is a valid distribution") {
    auto g = rng(24);
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = 1 + t % 6;
        const std::size_t a = (t % 3 == 0) ? 2 : 2 + t % 4;
        const PredictionSet ps = testsupport::random_ps(g, m, a);
        const WeightVector w(testsupport::random_simplex(g, m));
        for (const Distribution& out :
             {mix_geometric(ps, w), mix_linear(ps, w)}) {
            double sum = 0.0;
            for (std::size_t x = 0; x < a; ++x) {
                CHECK(out[x] > 0.0);
                CHECK(out[x] < 1.0);
                sum += out[x];
            }
            CHECK(std::abs(sum - 1.0) < 1e-9);
        }
        if (a == 2) {
            const Distribution out = mix_logistic(ps, w);
            CHECK(out[1] > 0.0);
            CHECK(out[1] < 1.0);
        }
    }
}

TEST_CASE("update_geometric") {
    SECTION("identical models leave the weights unchanged") {
        MixerState st = MixerState::defaults(MixerKind::Geometric, 3);
        const PredictionSet ps = binary_ps({0.7, 0.7, 0.7});
        const MixerState out = update_geometric(st, ps, 1);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(out.w[i] == Catch::Approx(st.w[i]).margin(1e-14));
    }
    SECTION("step direction matches central finite differences") {
        auto g = rng(25);
        for (int t = 0; t < 200; ++t) {
            const std::size_t m = 2 + t % 5, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            const std::vector<double> w(m, 1.0 / double(m));
            const std::size_t x = t % a;
            const std::vector<double> dir = geometric_step_direction(ps, w, x);
            const std::vector<double> fd = testsupport::fd_gradient(
                [&](const std::vector<double>& v) {
                    return testsupport::geo_code_length_nats(ps, v, x);
                },
                w);
            for (std::size_t i = 0; i < m; ++i) {
                const double expect = -fd[i];
                CHECK(std::abs(dir[i] - expect) <
                      1e-6 * std::max({1e-2, std::abs(expect), std::abs(dir[i])}));
            }
        }
    }
    SECTION("full update equals step + floor + renormalize") {
        auto g = rng(26);
        for (int t = 0; t < 100; ++t) {
            const std::size_t m = 2 + t % 4;
            const PredictionSet ps = testsupport::random_ps(g, m, 2);
            MixerState st = MixerState::defaults(MixerKind::Geometric, m);
            st.w = testsupport::random_simplex(g, m);
            const std::size_t x = t % 2;
            const std::vector<double> dir = geometric_step_direction(ps, st.w, x);
            std::vector<double> expect(st.w);
            for (std::size_t i = 0; i < m; ++i) expect[i] += st.alpha * dir[i];
            expect = reference_project(expect, st.epsilon);
            const MixerState out = update_geometric(st, ps, x);
            for (std::size_t i = 0; i < m; ++i)
                CHECK(out.w[i] == Catch::Approx(expect[i]).margin(1e-15));
        }
    }
    SECTION("a coordinate driven under the floor is clamped to it") {
        MixerState st = MixerState::defaults(MixerKind::Geometric, 2);
        st.w = {1.0 - 1e-9, 1e-9};
        const PredictionSet ps = binary_ps({0.9, 0.05});
        const std::vector<double> dir = geometric_step_direction(ps, st.w, 1);
        REQUIRE(st.w[1] + st.alpha * dir[1] < st.epsilon);  // the step undershoots the floor
        const MixerState out = update_geometric(st, ps, 1);
        double sum = 0.0;
        for (double v : out.w) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(out.w[1] >= st.epsilon * (1.0 - 1e-12));
        CHECK(out.w[1] <= st.epsilon * (1.0 + 1e-6));
    }
    SECTION("wrong kind is rejected") {
        MixerState st = MixerState::defaults(MixerKind::Linear, 2);
        CHECK_THROWS_AS(update_geometric(st, binary_ps({0.5, 0.5}), 0), std::invalid_argument);
    }
}

TEST_CASE("update_linear") {
    SECTION("identical models leave the weights unchanged") {
        MixerState st = MixerState::defaults(MixerKind::Linear, 4);
        const PredictionSet ps = binary_ps({0.3, 0.3, 0.3, 0.3});
        const MixerState out = update_linear(st, ps, 0);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(out.w[i] == Catch::Approx(st.w[i]).margin(1e-14));
    }
    SECTION("step direction matches central finite differences") {
        auto g = rng(27);
        for (int t = 0; t < 200; ++t) {
            const std::size_t m = 2 + t % 5, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            const std::vector<double> w(m, 1.0 / double(m));
            const std::size_t x = t % a;
            const std::vector<double> dir = linear_step_direction(ps, w, x);
            const std::vector<double> fd = testsupport::fd_gradient(
                [&](const std::vector<double>& v) {
                    return testsupport::lin_code_length_nats(ps, v, x);
                },
                w);
            for (std::size_t i = 0; i < m; ++i) {
                const double expect = -fd[i];
                CHECK(std::abs(dir[i] - expect) <
                      1e-6 * std::max({1e-2, std::abs(expect), std::abs(dir[i])}));
            }
        }
    }
    SECTION("diag(w) step without the floor reproduces beta-weighting") {
        auto g = rng(28);
        for (int t = 0; t < 200; ++t) {
            const std::size_t m = 2 + t % 5, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            const std::vector<double> w = testsupport::random_simplex(g, m);
            const std::size_t x = t % a;
            // gradient variant: w_i += [diag(w) dir]_i, max-operation omitted
            const std::vector<double> dir = linear_step_direction(ps, w, x);
            std::vector<double> wg(w);
            for (std::size_t i = 0; i < m; ++i) wg[i] += w[i] * dir[i];
            // beta rule
            double f = 0.0;
            for (std::size_t i = 0; i < m; ++i) f += w[i] * ps.dist(i)[x];
            for (std::size_t i = 0; i < m; ++i) {
                const double beta = w[i] * ps.dist(i)[x] / f;
                CHECK(wg[i] == Catch::Approx(beta).margin(1e-12));
            }
        }
    }
}

TEST_CASE("update_beta") {
    SECTION("identical models leave beta unchanged") {
        MixerState st = MixerState::defaults(MixerKind::Beta, 3);
        const PredictionSet ps = binary_ps({0.6, 0.6, 0.6});
        const MixerState out = update_beta(st, ps, 1);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(out.w[i] == Catch::Approx(st.w[i]).margin(1e-14));
    }
    SECTION("posterior ratio example") {
        MixerState st = MixerState::defaults(MixerKind::Beta, 2);
        st.w = {0.5, 0.5};
        const PredictionSet ps = binary_ps({0.8, 0.2});
        const MixerState out = update_beta(st, ps, 1);  // f = 0.5
        CHECK(out.w[0] == Catch::Approx(0.8).margin(1e-12));
        CHECK(out.w[1] == Catch::Approx(0.2).margin(1e-12));
    }
    SECTION("simplex preserved exactly while the floor stays idle") {
        auto g = rng(29);
        for (int t = 0; t < 200; ++t) {
            const std::size_t m = 2 + t % 5, a = 2 + t % 3;
            const PredictionSet ps = testsupport::random_ps(g, m, a);
            MixerState st = MixerState::defaults(MixerKind::Beta, m);
            st.w = testsupport::random_simplex(g, m);
            const std::size_t x = t % a;
            double f = 0.0;
            for (std::size_t i = 0; i < m; ++i) f += st.w[i] * ps.dist(i)[x];
            std::vector<double> raw(m);
            bool floored = false;
            double rawsum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                raw[i] = st.w[i] * ps.dist(i)[x] / f;
                rawsum += raw[i];
                if (raw[i] < st.epsilon) floored = true;
            }
            CHECK(std::abs(rawsum - 1.0) < 1e-12);  // the rule preserves the simplex
            const MixerState out = update_beta(st, ps, x);
            if (!floored) {
                for (std::size_t i = 0; i < m; ++i)
                    CHECK(out.w[i] == Catch::Approx(raw[i]).margin(1e-13));
            }
        }
    }
}

TEST_CASE("mix_logistic") {
    SECTION("single model passes through") {
        const Distribution out = mix_logistic(binary_ps({0.7}), WeightVector{1.0});
        CHECK(out[1] == Catch::Approx(0.7).margin(1e-12));
    }
    SECTION("stretch antisymmetry gives one half") {
        const Distribution out = mix_logistic(binary_ps({0.8, 0.2}), WeightVector{0.5, 0.5});
        CHECK(out[1] == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("rejects non-binary alphabets") {
        PredictionSet ps({Distribution{0.2, 0.3, 0.5}});
        CHECK_THROWS_AS(mix_logistic(ps, WeightVector{1.0}), std::invalid_argument);
    }
    SECTION("coincides with the geometric mixture on the simplex") {
        auto g = rng(30);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t m = 1 + t % 8;
            const PredictionSet ps = testsupport::random_ps(g, m, 2);
            const WeightVector w(testsupport::random_simplex(g, m));
            const Distribution a = mix_logistic(ps, w);
            const Distribution b = mix_geometric(ps, w);
            worst = std::max(worst, std::abs(a[1] - b[1]));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("update_logistic") {
    SECTION("all models at one half produce no movement") {
        MixerState st = MixerState::defaults(MixerKind::Logistic, 3);
        const PredictionSet ps = binary_ps({0.5, 0.5, 0.5});
        const MixerState out = update_logistic(st, ps, 1);
        for (std::size_t i = 0; i < 3; ++i) CHECK(out.w[i] == st.w[i]);
    }
    SECTION("movement follows the sign of the stretched prediction") {
        MixerState st = MixerState::defaults(MixerKind::Logistic, 2);
        const PredictionSet ps = binary_ps({0.9, 0.2});
        const MixerState out = update_logistic(st, ps, 1);  // observed one-bit, f < 1
        CHECK(out.w[0] > st.w[0]);  // st(0.9) > 0
        CHECK(out.w[1] < st.w[1]);  // st(0.2) < 0
        double sum = 0.0;
        for (double v : out.w) sum += v;
        CHECK(sum != Catch::Approx(1.0).margin(1e-15));  // no renormalization
    }
    SECTION("matches the unconstrained geometric gradient step") {
        auto g = rng(31);
        for (int t = 0; t < 300; ++t) {
            const std::size_t m = 1 + t % 8;
            const PredictionSet ps = testsupport::random_ps(g, m, 2);
            MixerState st = MixerState::defaults(MixerKind::Logistic, m);
            st.w = testsupport::random_simplex(g, m);
            const std::size_t x = t % 2;
            const std::vector<double> dir = testsupport::unnormalized_geo_step(ps, st.w, x);
            const MixerState out = update_logistic(st, ps, x);
            for (std::size_t i = 0; i < m; ++i)
                CHECK(std::abs(out.w[i] - (st.w[i] + st.alpha * dir[i])) < 1e-10);
        }
    }
}

TEST_CASE("mixer state stays on the floored simplex under adversarial updates") {
    auto g = rng(32);
    for (MixerKind kind : {MixerKind::Geometric, MixerKind::Linear, MixerKind::Beta}) {
        MixerState st = MixerState::defaults(kind, 4);
        for (int t = 0; t < 500; ++t) {
            // extreme predictions to provoke large steps and floor hits
            std::vector<Distribution> d;
            for (int i = 0; i < 4; ++i)
                d.push_back(Distribution::binary(testsupport::uniform(g, 0.0, 1.0) < 0.5
                                                     ? testsupport::uniform(g, 1e-9, 0.05)
                                                     : testsupport::uniform(g, 0.95, 1.0)));
            const PredictionSet ps(std::move(d));
            st = update(std::move(st), ps, t % 2);
            double sum = 0.0;
            for (double v : st.w) {
                CHECK(v >= st.epsilon * (1.0 - 1e-12));
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("linear mixture dominance over the two-part code") {
    auto g = rng(33);
    for (int t = 0; t < 300; ++t) {
        const std::size_t m = 1 + t % 4, a = 2 + t % 3, n = 1 + t % 10;
        std::vector<PredictionSet> steps;
        std::vector<std::size_t> syms;
        for (std::size_t k = 0; k < n; ++k) {
            steps.push_back(testsupport::random_ps(g, m, a));
            syms.push_back(static_cast<std::size_t>(testsupport::uniform(g, 0.0, double(a))));
        }
        const std::vector<double> prior = testsupport::random_simplex(g, m);
        // sequence probabilities as explicit per-step products
        std::vector<double> seq(m, 1.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < m; ++i) seq[i] *= steps[k].dist(i)[syms[k]];
        double mixture = 0.0;
        double best = 1e300;
        for (std::size_t i = 0; i < m; ++i) {
            mixture += prior[i] * seq[i];
            best = std::min(best, -std::log2(prior[i]) - std::log2(seq[i]));
        }
        CHECK(-std::log2(mixture) <= best + 1e-12);
        if (m == 1) CHECK(-std::log2(mixture) == Catch::Approx(best).margin(1e-12));
    }
}

TEST_CASE("mix_p1 equals the full mixture computation") {
    auto g = rng(34);
    for (MixerKind kind :
         {MixerKind::Geometric, MixerKind::Linear, MixerKind::Beta, MixerKind::Logistic}) {
        for (int t = 0; t < 100; ++t) {
            const std::size_t m = 1 + t % 8;
            const PredictionSet ps = testsupport::random_ps(g, m, 2);
            MixerState st = MixerState::defaults(kind, m);
            st.w = testsupport::random_simplex(g, m);
            const double fast = mix_p1(st, ps);
            const double full = mix(st, ps)[1];
            CHECK(fast == full);  // bit-identical
        }
    }
}

TEST_CASE("project_floor_simplex re-floors after normalization") {
    std::vector<double> w{1.5, 1e-12};
    project_floor_simplex(w, 1e-9);
    CHECK(w[0] + w[1] == Catch::Approx(1.0).margin(1e-12));
    CHECK(w[1] >= 1e-9 * (1.0 - 1e-12));
    CHECK_THROWS_AS(project_floor_simplex(w, 0.6), std::invalid_argument);
}

TEST_CASE("mixer defaults follow the experimental setup") {
    const MixerState geo = MixerState::defaults(MixerKind::Geometric, 8);
    CHECK(geo.alpha == Catch::Approx(1.0 / 16.0));
    CHECK(geo.epsilon == Catch::Approx(std::ldexp(1.0, -30)));
    for (double v : geo.w) CHECK(v == Catch::Approx(0.125));

    const MixerState lin = MixerState::defaults(MixerKind::Linear, 8);
    CHECK(lin.alpha == Catch::Approx(1.0 / 32.0));
    CHECK(lin.epsilon == Catch::Approx(std::ldexp(1.0, -30)));

    const MixerState beta = MixerState::defaults(MixerKind::Beta, 8);
    CHECK(beta.epsilon == Catch::Approx(std::ldexp(1.0, -8)));
}
