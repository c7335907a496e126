#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glmix/core.hpp"
#include "glmix/mixers.hpp"

namespace glmix::optlab {

// A fixed sequence of prediction steps with the realized symbols: the raw
// material of the weight-estimation problem.
class PredictionLog {
public:
    PredictionLog() = default;

    void append(PredictionSet ps, std::size_t symbol) {
        if (!steps_.empty()) {
            if (ps.model_count() != steps_[0].model_count() ||
                ps.alphabet_size() != steps_[0].alphabet_size())
                throw std::invalid_argument("PredictionLog: inconsistent step shape");
        }
        if (symbol >= ps.alphabet_size())
            throw std::invalid_argument("PredictionLog: symbol out of range");
        steps_.push_back(std::move(ps));
        symbols_.push_back(symbol);
    }

    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }
    std::size_t model_count() const { return steps_.empty() ? 0 : steps_[0].model_count(); }
    std::size_t alphabet_size() const { return steps_.empty() ? 0 : steps_[0].alphabet_size(); }
    const PredictionSet& step(std::size_t k) const { return steps_[k]; }
    std::size_t symbol(std::size_t k) const { return symbols_[k]; }

private:
    std::vector<PredictionSet> steps_;
    std::vector<std::size_t> symbols_;
};

// --- random instances ------------------------------------------------------

inline Distribution random_distribution(std::mt19937_64& rng, std::size_t a) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(a);
    for (double& v : p) v = u(rng);
    return Distribution(std::move(p));
}

inline PredictionSet random_prediction_set(std::mt19937_64& rng, std::size_t m, std::size_t a) {
    std::vector<Distribution> d;
    d.reserve(m);
    for (std::size_t i = 0; i < m; ++i) d.push_back(random_distribution(rng, a));
    return PredictionSet(std::move(d));
}

inline WeightVector random_interior_weights(std::mt19937_64& rng, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(m);
    double s = 0.0;
    for (double& v : w) { v = e(rng) + 0.02; s += v; }
    for (double& v : w) v /= s;
    return WeightVector(std::move(w));
}

// Symbols are drawn from model 1, which makes the weight-estimation problem
// generically asymmetric.
inline PredictionLog random_log(std::mt19937_64& rng, std::size_t m, std::size_t a,
                                std::size_t n) {
    PredictionLog log;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        PredictionSet ps = random_prediction_set(rng, m, a);
        double r = u(rng);
        std::size_t x = a - 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < a; ++j) {
            acc += ps.dist(0)[j];
            if (r < acc) { x = j; break; }
        }
        log.append(std::move(ps), x);
    }
    return log;
}

// --- divergence-minimizer grid oracles --------------------------------------

namespace detail {

inline double weighted_divergence_to_models(const Distribution& q, const PredictionSet& ps,
                                            const WeightVector& w, bool geo) {
    double obj = 0.0;
    for (std::size_t i = 0; i < ps.model_count(); ++i)
        obj += w[i] * (geo ? kl_divergence(q, ps.dist(i)) : kl_divergence(ps.dist(i), q));
    return obj;
}

template <typename Fn>
void for_each_simplex_grid_point(std::size_t a, double res, Fn&& fn) {
    const int steps = static_cast<int>(std::lround(1.0 / res));
    if (a == 2) {
        for (int i = 1; i < steps; ++i) {
            const double t = i * res;
            fn(std::vector<double>{1.0 - t, t});
        }
    } else if (a == 3) {
        for (int i = 1; i < steps; ++i)
            for (int j = 1; i + j < steps; ++j) {
                const double t1 = i * res, t2 = j * res;
                fn(std::vector<double>{t1, t2, 1.0 - t1 - t2});
            }
    } else {
        throw std::invalid_argument("simplex grid: alphabet size must be 2 or 3");
    }
}

}  // namespace detail

// Brute-force minimizer of sum_i w_i D(Q || P_i) over the simplex grid; the
// independent oracle for mix_geometric.
inline Distribution grid_minimize_geo(const PredictionSet& ps, const WeightVector& w,
                                      double resolution) {
    if (!(resolution > 0.0 && resolution <= 0.34))
        throw std::invalid_argument("grid_minimize_geo: bad resolution");
    Distribution best;
    double best_obj = std::numeric_limits<double>::infinity();
    detail::for_each_simplex_grid_point(ps.alphabet_size(), resolution, [&](std::vector<double> p) {
        Distribution q(std::move(p));
        const double obj = detail::weighted_divergence_to_models(q, ps, w, true);
        if (obj < best_obj) { best_obj = obj; best = std::move(q); }
    });
    return best;
}

// Brute-force minimizer of sum_i w_i D(P_i || Q); the oracle for mix_linear.
inline Distribution grid_minimize_lin(const PredictionSet& ps, const WeightVector& w,
                                      double resolution) {
    if (!(resolution > 0.0 && resolution <= 0.34))
        throw std::invalid_argument("grid_minimize_lin: bad resolution");
    Distribution best;
    double best_obj = std::numeric_limits<double>::infinity();
    detail::for_each_simplex_grid_point(ps.alphabet_size(), resolution, [&](std::vector<double> p) {
        Distribution q(std::move(p));
        const double obj = detail::weighted_divergence_to_models(q, ps, w, false);
        if (obj < best_obj) { best_obj = obj; best = std::move(q); }
    });
    return best;
}

// --- batch objective and gradient -------------------------------------------

namespace detail {

inline void check_kind(MixerKind kind) {
    if (kind != MixerKind::Geometric && kind != MixerKind::Linear)
        throw std::invalid_argument("optlab: kind must be geometric or linear");
}

inline double step_mixture_prob(const PredictionSet& ps, const std::vector<double>& w,
                                std::size_t x, MixerKind kind) {
    const std::size_t m = ps.model_count();
    const std::size_t a = ps.alphabet_size();
    double s = 0.0;
    for (double v : w) s += v;
    if (kind == MixerKind::Linear) {
        double f = 0.0;
        for (std::size_t i = 0; i < m; ++i) f += (w[i] / s) * ps.dist(i)[x];
        return f;
    }
    double tx = 0.0, tmax = -1e300;
    std::vector<double> t(a);
    for (std::size_t y = 0; y < a; ++y) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) v += w[i] * ps.logp(i, y);
        t[y] = v / s;
        tmax = std::max(tmax, t[y]);
    }
    tx = t[x];
    double z = 0.0;
    for (std::size_t y = 0; y < a; ++y) z += std::exp(t[y] - tmax);
    return std::exp(tx - tmax) / z;
}

}  // namespace detail

// sum_k -log2 f_k(x_k) for the chosen mixture with fixed weights w.
inline double batch_objective(const PredictionLog& log, const WeightVector& w, MixerKind kind) {
    detail::check_kind(kind);
    double bits = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k)
        bits -= std::log2(detail::step_mixture_prob(log.step(k), w.values(), log.symbol(k), kind));
    return bits;
}

// Analytic gradient of batch_objective (bits). The per-step steepest-descent
// directions are the negated natural-log gradients, so the batch gradient is
// their negated sum divided by ln 2.
inline std::vector<double> batch_gradient(const PredictionLog& log, const WeightVector& w,
                                          MixerKind kind) {
    detail::check_kind(kind);
    for (double v : w.values())
        if (v <= 0.0)
            throw std::domain_error("batch_gradient: weights must be strictly interior");
    const std::size_t m = w.size();
    std::vector<double> g(m, 0.0);
    constexpr double kLn2 = 0.6931471805599453;
    for (std::size_t k = 0; k < log.size(); ++k) {
        const std::vector<double> dir =
            kind == MixerKind::Geometric
                ? geometric_step_direction(log.step(k), w.values(), log.symbol(k))
                : linear_step_direction(log.step(k), w.values(), log.symbol(k));
        for (std::size_t i = 0; i < m; ++i) g[i] -= dir[i] / kLn2;
    }
    return g;
}

// --- weight optimization -----------------------------------------------------

namespace detail {

// Euclidean projection onto the simplex, then a small floor to keep every
// coordinate usable by the gradient.
inline std::vector<double> project_simplex(std::vector<double> v, double floor_eps = 1e-12) {
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) { rho = i + 1; tau = t; }
    }
    for (double& x : v) x = std::max(x - tau, 0.0);
    double s = 0.0;
    for (double& x : v) { x = std::max(x, floor_eps); s += x; }
    for (double& x : v) x /= s;
    (void)rho;
    return v;
}

}  // namespace detail

// Projected gradient descent with backtracking line search on the simplex.
// The objective is strictly convex, so this converges to the single global
// minimizer; iteration stops once the unit-step projected-gradient mapping
// drops below `tolerance`.
inline WeightVector optimize_weights(const PredictionLog& log, MixerKind kind,
                                     double tolerance = 1e-8) {
    detail::check_kind(kind);
    if (log.empty()) throw std::invalid_argument("optimize_weights: empty log");
    const std::size_t m = log.model_count();
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    if (m == 1) return WeightVector(w);

    auto obj = [&](const std::vector<double>& x) {
        return batch_objective(log, WeightVector(x), kind);
    };
    double fw = obj(w);
    double t = 1.0;
    for (int iter = 0; iter < 50000; ++iter) {
        const std::vector<double> g = batch_gradient(log, WeightVector(w), kind);

        std::vector<double> probe(m);
        for (std::size_t i = 0; i < m; ++i) probe[i] = w[i] - g[i];
        probe = detail::project_simplex(std::move(probe));
        double mapping = 0.0;
        for (std::size_t i = 0; i < m; ++i) mapping += (w[i] - probe[i]) * (w[i] - probe[i]);
        if (std::sqrt(mapping) < tolerance) break;

        t = std::min(t * 2.0, 1.0e6);
        bool moved = false;
        while (t > 1e-18) {
            std::vector<double> cand(m);
            for (std::size_t i = 0; i < m; ++i) cand[i] = w[i] - t * g[i];
            cand = detail::project_simplex(std::move(cand));
            double lin = 0.0, dist2 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = cand[i] - w[i];
                lin += g[i] * d;
                dist2 += d * d;
            }
            const double fc = obj(cand);
            if (fc <= fw + lin + dist2 / (2.0 * t) + 1e-15) {
                w = std::move(cand);
                fw = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return WeightVector(w);
}

// Minimum of batch_objective over an Omega_m grid; brute-force optimality
// oracle for optimize_weights (m <= 3).
inline double min_objective_on_grid(const PredictionLog& log, MixerKind kind, double resolution) {
    detail::check_kind(kind);
    const std::size_t m = log.model_count();
    const int steps = static_cast<int>(std::lround(1.0 / resolution));
    double best = std::numeric_limits<double>::infinity();
    auto eval = [&](std::vector<double> w) {
        double s = 0.0;
        for (double& v : w) { v = std::max(v, 1e-12); s += v; }
        for (double& v : w) v /= s;
        best = std::min(best, batch_objective(log, WeightVector(std::move(w)), kind));
    };
    if (m == 1) {
        eval({1.0});
    } else if (m == 2) {
        for (int i = 0; i <= steps; ++i) eval({1.0 - i * resolution, i * resolution});
    } else if (m == 3) {
        for (int i = 0; i <= steps; ++i)
            for (int j = 0; i + j <= steps; ++j)
                eval({i * resolution, j * resolution, 1.0 - (i + j) * resolution});
    } else {
        throw std::invalid_argument("min_objective_on_grid: m must be <= 3");
    }
    return best;
}

// --- convexity probe ---------------------------------------------------------

namespace detail {

// Eigenvalues of a small symmetric matrix by cyclic Jacobi sweeps.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t d) {
    if (d == 0) return {};
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += std::abs(a[p * d + q]);
        if (off < 1e-15) break;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) < 1e-18) continue;
                const double app = a[p * d + p], aqq = a[q * d + q];
                const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p], akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k], aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> eig(d);
    for (std::size_t i = 0; i < d; ++i) eig[i] = a[i * d + i];
    return eig;
}

}  // namespace detail

struct ConvexityReport {
    std::size_t midpoint_checked = 0;
    std::size_t midpoint_violations = 0;
    std::size_t degenerate_pairs = 0;
    bool degenerate_instance = false;  // all models coincide at every step
    std::size_t tangent_dim = 0;
    double hessian_min_eig = 0.0;
    bool hessian_violation = false;
};

// Midpoint strict-convexity probes plus a finite-difference Hessian check of
// batch_objective on the simplex tangent space. Degenerate instances (all
// models identical, or weight pairs inducing identical per-step mixtures)
// are flagged rather than failed: strictness genuinely degenerates there.
inline ConvexityReport convexity_probe(const PredictionLog& log, MixerKind kind,
                                       std::size_t trials, std::mt19937_64& rng) {
    detail::check_kind(kind);
    if (trials < 1) throw std::invalid_argument("convexity_probe: trials must be >= 1");
    ConvexityReport rep;
    const std::size_t m = log.model_count();
    rep.tangent_dim = m - 1;

    double spread = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k)
        for (std::size_t x = 0; x < log.alphabet_size(); ++x)
            for (std::size_t i = 1; i < m; ++i)
                spread = std::max(spread,
                                  std::abs(log.step(k).dist(i)[x] - log.step(k).dist(0)[x]));
    rep.degenerate_instance = spread < 1e-12;

    auto per_step_probs = [&](const WeightVector& w, std::vector<double>& f) {
        f.resize(log.size());
        for (std::size_t k = 0; k < log.size(); ++k)
            f[k] = detail::step_mixture_prob(log.step(k), w.values(), log.symbol(k), kind);
    };

    std::vector<double> fa, fb;
    for (std::size_t t = 0; t < trials; ++t) {
        const WeightVector wa = random_interior_weights(rng, m);
        const WeightVector wb = random_interior_weights(rng, m);
        per_step_probs(wa, fa);
        per_step_probs(wb, fb);
        double diff = 0.0;
        for (std::size_t k = 0; k < log.size(); ++k)
            diff = std::max(diff, std::abs(fa[k] - fb[k]));
        if (diff < 1e-12) {
            ++rep.degenerate_pairs;
            continue;
        }
        std::vector<double> mid(m);
        for (std::size_t i = 0; i < m; ++i) mid[i] = 0.5 * (wa[i] + wb[i]);
        const double om = batch_objective(log, WeightVector(mid), kind);
        const double oa = batch_objective(log, wa, kind);
        const double ob = batch_objective(log, wb, kind);
        ++rep.midpoint_checked;
        if (!(om < 0.5 * (oa + ob) - 1e-12)) ++rep.midpoint_violations;
    }

    if (m >= 2) {
        // random interior base point, blended toward uniform so the stencil
        // cannot leave the positive orthant
        std::vector<double> w0 = random_interior_weights(rng, m).values();
        for (double& v : w0) v = 0.5 * v + 0.5 / static_cast<double>(m);
        const std::size_t d = m - 1;
        const double h = 1e-3;
        auto value = [&](const std::vector<double>& u) {
            std::vector<double> w(w0);
            for (std::size_t i = 0; i < d; ++i) {
                w[i] += u[i];
                w[m - 1] -= u[i];
            }
            return batch_objective(log, WeightVector(std::move(w)), kind);
        };
        std::vector<double> hess(d * d, 0.0);
        std::vector<double> u(d, 0.0);
        const double f0 = value(u);
        for (std::size_t i = 0; i < d; ++i) {
            u.assign(d, 0.0);
            u[i] = h;  const double fp = value(u);
            u[i] = -h; const double fm = value(u);
            hess[i * d + i] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                u.assign(d, 0.0);
                u[i] = h;  u[j] = h;  const double fpp = value(u);
                u[i] = h;  u[j] = -h; const double fpm = value(u);
                u[i] = -h; u[j] = h;  const double fmp = value(u);
                u[i] = -h; u[j] = -h; const double fmm = value(u);
                hess[i * d + j] = hess[j * d + i] = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            }
        const std::vector<double> eig = detail::symmetric_eigenvalues(std::move(hess), d);
        rep.hessian_min_eig = *std::min_element(eig.begin(), eig.end());
        rep.hessian_violation = !rep.degenerate_instance && rep.hessian_min_eig <= -1e-9;
    }
    return rep;
}

// --- two-part-code dominance ---------------------------------------------------

struct DominanceResult {
    double mixture_bits = 0.0;   // -log2 sum_j W(j) P_j(x^n)
    double best_two_part_bits = 0.0;  // min_j -log2 W(j) - log2 P_j(x^n)
    bool holds = false;
};

// -log sum_j W(j) P_j(x^n) <= min_j [-log W(j) - log P_j(x^n)]. Evaluated in
// log space with a max shift, so the comparison itself is exact.
inline DominanceResult two_part_dominance(const PredictionLog& log, const WeightVector& prior) {
    if (prior.size() != log.model_count())
        throw std::invalid_argument("two_part_dominance: prior size mismatch");
    const std::size_t m = prior.size();
    std::vector<double> a(m);  // log2 W(j) + log2 P_j(x^n)
    for (std::size_t j = 0; j < m; ++j) {
        double lp = std::log2(prior.normalized()[j]);
        for (std::size_t k = 0; k < log.size(); ++k)
            lp += std::log2(log.step(k).dist(j)[log.symbol(k)]);
        a[j] = lp;
    }
    const double amax = *std::max_element(a.begin(), a.end());
    double z = 0.0;
    for (double v : a) z += std::exp2(v - amax);
    DominanceResult r;
    r.mixture_bits = -(amax + std::log2(z));
    r.best_two_part_bits = -amax;
    r.holds = r.mixture_bits <= r.best_two_part_bits;
    return r;
}

// --- beta identity ---------------------------------------------------------------

// Runs the beta-weighting trajectory against the update_linear variant whose
// scalar step is replaced by diag(w(k-1)) with the floor omitted; returns
// the largest per-step per-coordinate gap. The two recursions coincide
// algebraically.
inline double beta_identity_max_gap(const PredictionLog& log, const WeightVector& initial) {
    const std::size_t m = log.model_count();
    if (initial.size() != m)
        throw std::invalid_argument("beta_identity_max_gap: weight size mismatch");
    std::vector<double> beta = initial.normalized().values();
    std::vector<double> w = beta;
    double gap = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k) {
        const PredictionSet& ps = log.step(k);
        const std::size_t x = log.symbol(k);
        // beta rule: multiplicative posterior
        double f = 0.0;
        for (std::size_t i = 0; i < m; ++i) f += beta[i] * ps.dist(i)[x];
        for (std::size_t i = 0; i < m; ++i) beta[i] = beta[i] * ps.dist(i)[x] / f;
        // gradient rule with alpha -> diag(w), no floor
        const std::vector<double> dir = linear_step_direction(ps, w, x);
        for (std::size_t i = 0; i < m; ++i) w[i] += w[i] * dir[i];
        for (std::size_t i = 0; i < m; ++i) gap = std::max(gap, std::abs(beta[i] - w[i]));
    }
    return gap;
}

// --- trace ingestion ---------------------------------------------------------------

// Reads the engine's CSV trace (step,m1..m8,table,mix,bits,bit) into a
// binary PredictionLog whose symbols are the coded bits.
inline PredictionLog load_trace_csv(std::istream& in) {
    PredictionLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 's') continue;  // header
        std::array<double, 8> p1{};
        std::uint64_t step = 0;
        unsigned table = 0, bit = 0;
        double mixp = 0.0, bits = 0.0;
        const int got = std::sscanf(
            line.c_str(), "%llu,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%u,%lf,%lf,%u",
            reinterpret_cast<unsigned long long*>(&step), &p1[0], &p1[1], &p1[2], &p1[3],
            &p1[4], &p1[5], &p1[6], &p1[7], &table, &mixp, &bits, &bit);
        if (got != 13) throw std::runtime_error("trace csv: malformed row: " + line);
        PredictionSet ps;
        ps.assign_binary(p1);
        log.append(std::move(ps), bit);
    }
    return log;
}

// --- verification suites ---------------------------------------------------------

struct FailingInstance {
    std::size_t trial = 0;
    std::size_t models = 0;
    std::size_t alphabet = 0;
    std::vector<double> dists;    // flattened m x A (first step for log suites)
    std::vector<double> weights;
    double value = 0.0;
};

struct SuiteReport {
    std::string name;
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t degenerate = 0;
    double worst = 0.0;  // suite-specific: max gap or min eigenvalue/slack
    std::optional<FailingInstance> first_failure;
};

namespace detail {

inline FailingInstance snapshot(std::size_t trial, const PredictionSet& ps,
                                const WeightVector& w, double value) {
    FailingInstance fi;
    fi.trial = trial;
    fi.models = ps.model_count();
    fi.alphabet = ps.alphabet_size();
    for (std::size_t i = 0; i < ps.model_count(); ++i)
        for (std::size_t x = 0; x < ps.alphabet_size(); ++x)
            fi.dists.push_back(ps.dist(i)[x]);
    fi.weights = w.values();
    fi.value = value;
    return fi;
}

}  // namespace detail

// |mix_logistic - mix_geometric| on random binary instances with simplex
// weights; the PAQ equivalence claim.
inline SuiteReport suite_paq_equiv(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SuiteReport rep{.name = "paq-equiv", .trials = trials};
    std::uniform_int_distribution<std::size_t> md(1, 8);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = md(rng);
        const PredictionSet ps = random_prediction_set(rng, m, 2);
        const WeightVector w = random_interior_weights(rng, m);
        const Distribution geo = mix_geometric(ps, w);
        const Distribution logi = mix_logistic(ps, w);
        const double gap = std::max(std::abs(geo[0] - logi[0]), std::abs(geo[1] - logi[1]));
        rep.worst = std::max(rep.worst, gap);
        if (!(gap < 1e-12)) {
            ++rep.violations;
            if (!rep.first_failure) rep.first_failure = detail::snapshot(t, ps, w, gap);
        }
    }
    return rep;
}

// mix_geometric / mix_linear against their brute-force grid oracles.
inline SuiteReport suite_oracles(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SuiteReport rep{.name = "oracles", .trials = trials};
    std::uniform_int_distribution<std::size_t> md(1, 4);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t a = (t % 2 == 0) ? 2 : 3;
        const double res = (a == 2) ? 1e-3 : 1e-2;
        const std::size_t m = md(rng);
        const PredictionSet ps = random_prediction_set(rng, m, a);
        const WeightVector w = random_interior_weights(rng, m);
        const Distribution geo = mix_geometric(ps, w);
        const Distribution geo_oracle = grid_minimize_geo(ps, w, res);
        const Distribution lin = mix_linear(ps, w);
        const Distribution lin_oracle = grid_minimize_lin(ps, w, res);
        double gap = 0.0;
        for (std::size_t x = 0; x < a; ++x) {
            gap = std::max(gap, std::abs(geo[x] - geo_oracle[x]));
            gap = std::max(gap, std::abs(lin[x] - lin_oracle[x]));
        }
        rep.worst = std::max(rep.worst, gap / (2.0 * res));
        if (!(gap <= 2.0 * res)) {
            ++rep.violations;
            if (!rep.first_failure) rep.first_failure = detail::snapshot(t, ps, w, gap);
        }
    }
    return rep;
}

// Midpoint convexity + Hessian spectra over random instances, both kinds.
inline SuiteReport suite_convexity(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SuiteReport rep{.name = "convexity", .trials = trials};
    std::uniform_int_distribution<std::size_t> md(1, 5), ad(2, 4), nd(1, 50);
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = md(rng), a = ad(rng), n = nd(rng);
        const PredictionLog log = random_log(rng, m, a, n);
        const MixerKind kind = (t % 2 == 0) ? MixerKind::Geometric : MixerKind::Linear;
        const ConvexityReport r = convexity_probe(log, kind, 3, rng);
        if (r.degenerate_instance) ++rep.degenerate;
        rep.violations += r.midpoint_violations + (r.hessian_violation ? 1 : 0);
        if (!r.degenerate_instance && r.tangent_dim > 0)
            min_eig = std::min(min_eig, r.hessian_min_eig);
        if (rep.violations > 0 && !rep.first_failure)
            rep.first_failure = detail::snapshot(t, log.step(0),
                                                 WeightVector::uniform(m), r.hessian_min_eig);
    }
    rep.worst = std::isfinite(min_eig) ? min_eig : 0.0;
    return rep;
}

// Two-part-code dominance on random small instances.
inline SuiteReport suite_dominance(std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SuiteReport rep{.name = "dominance", .trials = trials};
    std::uniform_int_distribution<std::size_t> md(1, 4), ad(2, 4), nd(1, 10);
    double min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t m = md(rng), a = ad(rng), n = nd(rng);
        const PredictionLog log = random_log(rng, m, a, n);
        const WeightVector prior = random_interior_weights(rng, m);
        const DominanceResult r = two_part_dominance(log, prior);
        min_slack = std::min(min_slack, r.best_two_part_bits - r.mixture_bits);
        if (!r.holds) {
            ++rep.violations;
            if (!rep.first_failure)
                rep.first_failure = detail::snapshot(t, log.step(0), prior, r.mixture_bits);
        }
    }
    rep.worst = min_slack;
    return rep;
}

}  // namespace glmix::optlab
