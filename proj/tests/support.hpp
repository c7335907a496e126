#pragma once

// Shared helpers for the test suites: seeded generators and small
// independent oracles (finite differences, brute-force evaluations) kept
// apart from the library code they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "glmix/core.hpp"

namespace testsupport {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline glmix::Distribution random_dist(std::mt19937_64& g, std::size_t a,
                                       double lo = 0.05, double hi = 0.95) {
    std::vector<double> p(a);
    for (double& v : p) v = uniform(g, lo, hi);
    return glmix::Distribution(std::move(p));
}

inline glmix::PredictionSet random_ps(std::mt19937_64& g, std::size_t m, std::size_t a) {
    std::vector<glmix::Distribution> d;
    for (std::size_t i = 0; i < m; ++i) d.push_back(random_dist(g, a));
    return glmix::PredictionSet(std::move(d));
}

inline std::vector<double> random_simplex(std::mt19937_64& g, std::size_t m) {
    std::vector<double> w(m);
    double s = 0.0;
    for (double& v : w) { v = uniform(g, 0.05, 1.0); s += v; }
    for (double& v : w) v /= s;
    return w;
}

// Central finite differences of a scalar function of a weight vector.
template <typename Fn>
std::vector<double> fd_gradient(Fn&& fn, const std::vector<double>& w, double h = 1e-6) {
    std::vector<double> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<double> wp(w), wm(w);
        wp[i] += h;
        wm[i] -= h;
        g[i] = (fn(wp) - fn(wm)) / (2.0 * h);
    }
    return g;
}

// -ln of the geometric mixture probability of `observed`, evaluated from
// first principles (weights normalized inside), for gradient oracles.
inline double geo_code_length_nats(const glmix::PredictionSet& ps, const std::vector<double>& w,
                                   std::size_t observed) {
    const std::size_t m = ps.model_count();
    const std::size_t a = ps.alphabet_size();
    double s = 0.0;
    for (double v : w) s += v;
    double num = 1.0, den = 0.0;
    for (std::size_t x = 0; x < a; ++x) {
        double prod = 1.0;
        for (std::size_t i = 0; i < m; ++i) prod *= std::pow(ps.dist(i)[x], w[i] / s);
        if (x == observed) num = prod;
        den += prod;
    }
    return -std::log(num / den);
}

inline double lin_code_length_nats(const glmix::PredictionSet& ps, const std::vector<double>& w,
                                   std::size_t observed) {
    double s = 0.0;
    for (double v : w) s += v;
    double f = 0.0;
    for (std::size_t i = 0; i < ps.model_count(); ++i)
        f += (w[i] / s) * ps.dist(i)[observed];
    return -std::log(f);
}

// Gradient-descent step on -ln f for the PAQ parameterization, i.e. the
// geometric mixture without the weight normalization: direction_i =
// Q_i(x_k) - sum_x p_x Q_i(x). Independent oracle for the logistic update.
inline std::vector<double> unnormalized_geo_step(const glmix::PredictionSet& ps,
                                                 const std::vector<double>& w,
                                                 std::size_t observed) {
    const std::size_t m = ps.model_count();
    const std::size_t a = ps.alphabet_size();
    std::vector<double> expo(a), q(m * a);
    double den = 0.0;
    for (std::size_t x = 0; x < a; ++x) {
        double t = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            q[i * a + x] = std::log(ps.dist(i)[x]);
            t += w[i] * q[i * a + x];
        }
        expo[x] = std::exp(t);
        den += expo[x];
    }
    std::vector<double> dir(m);
    for (std::size_t i = 0; i < m; ++i) {
        double g = q[i * a + observed];
        for (std::size_t x = 0; x < a; ++x) g -= (expo[x] / den) * q[i * a + x];
        dir[i] = g;
    }
    return dir;
}

}  // namespace testsupport
