#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "glmix/core.hpp"

namespace glmix {

enum class MixerKind : unsigned char { Geometric = 0, Linear = 1, Beta = 2, Logistic = 3 };

inline const char* to_string(MixerKind k) {
    switch (k) {
        case MixerKind::Geometric: return "geo";
        case MixerKind::Linear:    return "lin";
        case MixerKind::Beta:      return "beta";
        case MixerKind::Logistic:  return "logistic";
    }
    return "?";
}

// Floor every entry at eps, then renormalize to sum 1. Renormalizing can
// push a floored entry back under eps, so the floored set is grown until it
// is stable and the surviving entries are scaled once: floored entries end
// at exactly eps, the rest at w_i * (1 - eps*|floored|) / sum(survivors).
inline void project_floor_simplex(std::vector<double>& w, double eps) {
    const std::size_t m = w.size();
    if (eps < 0.0 || eps * static_cast<double>(m) >= 1.0)
        throw std::invalid_argument("project_floor_simplex: need 0 <= eps < 1/m");
    static thread_local std::vector<bool> floored;
    floored.assign(m, false);
    std::size_t nfloored = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (!(w[i] >= eps)) { floored[i] = true; ++nfloored; }
    if (nfloored == m) {  // everything at or under the floor scales up to uniform
        for (double& v : w) v = 1.0 / static_cast<double>(m);
        return;
    }
    double t = 1.0;
    for (std::size_t round = 0; round < m; ++round) {
        double free_sum = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (!floored[i]) free_sum += w[i];
        t = (1.0 - eps * static_cast<double>(nfloored)) / free_sum;
        bool changed = false;
        for (std::size_t i = 0; i < m; ++i)
            if (!floored[i] && w[i] * t < eps) {
                floored[i] = true;
                ++nfloored;
                changed = true;
            }
        if (!changed) break;
    }
    for (std::size_t i = 0; i < m; ++i) w[i] = floored[i] ? eps : w[i] * t;
}

// Per-stream mixer state: the weight vector plus the update-rule parameters.
// The gradient and beta kinds keep w on the eps-floored simplex after every
// update; the logistic (PAQ) kind is deliberately unconstrained, so its
// weights may leave the simplex and even turn negative.
struct MixerState {
    std::vector<double> w;
    double alpha = 0.0;
    double epsilon = 0.0;
    MixerKind kind = MixerKind::Geometric;

    MixerState() = default;
    MixerState(MixerKind k, std::size_t m, double a, double eps)
        : w(m, 1.0 / static_cast<double>(m)), alpha(a), epsilon(eps), kind(k) {
        if (m == 0) throw std::invalid_argument("MixerState: m must be >= 1");
    }

    // Step sizes and floors from the experimental setup: alpha 1/16 for the
    // geometric rule and 1/32 for the linear rule, eps 2^-30 for both, eps
    // 2^-8 for beta. The PAQ rule has no floor; its constant step size is a
    // tuning choice and defaults to 2^-9.
    static MixerState defaults(MixerKind k, std::size_t m) {
        switch (k) {
            case MixerKind::Geometric: return MixerState(k, m, 1.0 / 16.0, std::ldexp(1.0, -30));
            case MixerKind::Linear:    return MixerState(k, m, 1.0 / 32.0, std::ldexp(1.0, -30));
            case MixerKind::Beta:      return MixerState(k, m, 0.0, std::ldexp(1.0, -8));
            case MixerKind::Logistic:  return MixerState(k, m, std::ldexp(1.0, -9), 0.0);
        }
        throw std::invalid_argument("MixerState: unknown kind");
    }

    WeightVector weight_vector() const { return WeightVector(w); }
};

namespace detail {

inline void check_models(const PredictionSet& ps, std::size_t m) {
    if (ps.model_count() != m)
        throw std::invalid_argument("mixer: model count does not match weight count");
}

// Normalized weighted geometric mean computed in log space: combine the log
// columns with normalized weights, subtract the max and exponentiate.
inline void geometric_probs(const PredictionSet& ps, const std::vector<double>& w,
                            std::vector<double>& out) {
    const std::size_t m = ps.model_count();
    const std::size_t a = ps.alphabet_size();
    const double* logp = ps.logp_data();
    double s = 0.0;
    for (double v : w) s += v;
    out.resize(a);
    double tmax = -1e300;
    for (std::size_t x = 0; x < a; ++x) {
        double t = 0.0;
        for (std::size_t i = 0; i < m; ++i) t += w[i] * logp[i * a + x];
        t /= s;
        out[x] = t;
        tmax = std::max(tmax, t);
    }
    double sum = 0.0;
    for (std::size_t x = 0; x < a; ++x) {
        out[x] = std::exp(out[x] - tmax);
        sum += out[x];
    }
    for (std::size_t x = 0; x < a; ++x) out[x] /= sum;
}

inline void linear_probs(const PredictionSet& ps, const std::vector<double>& w,
                         std::vector<double>& out) {
    const std::size_t m = ps.model_count();
    const std::size_t a = ps.alphabet_size();
    double s = 0.0;
    for (double v : w) s += v;
    out.assign(a, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double wi = w[i] / s;
        for (std::size_t x = 0; x < a; ++x) out[x] += wi * ps.dist(i)[x];
    }
}

// Same clamp-and-renormalize as Distribution construction, applied in place.
inline void clamp_renorm(std::vector<double>& p) {
    double sum = 0.0;
    for (double& v : p) {
        if (v < kMinProb) v = kMinProb;
        if (v > 1.0 - kMinProb) v = 1.0 - kMinProb;
        sum += v;
    }
    for (double& v : p) v /= sum;
}

// Steepest-descent direction of -ln f (geometric mixture) written into dir;
// q and p are caller scratch.
inline void geometric_direction(const PredictionSet& ps, const std::vector<double>& w,
                                std::size_t observed, std::vector<double>& dir,
                                std::vector<double>& q, std::vector<double>& p) {
    const std::size_t m = w.size();
    const std::size_t a = ps.alphabet_size();
    const double* logp = ps.logp_data();
    double s = 0.0;
    for (double v : w) s += v;

    q.resize(a);
    double qmax = -1e300;
    for (std::size_t x = 0; x < a; ++x) {
        double t = 0.0;
        for (std::size_t i = 0; i < m; ++i) t += w[i] * logp[i * a + x];
        q[x] = t / s;
        qmax = std::max(qmax, q[x]);
    }
    p.resize(a);
    double sum = 0.0;
    for (std::size_t x = 0; x < a; ++x) { p[x] = std::exp(q[x] - qmax); sum += p[x]; }
    for (std::size_t x = 0; x < a; ++x) p[x] /= sum;

    dir.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double g = logp[i * a + observed] - q[observed];
        for (std::size_t x = 0; x < a; ++x) g -= p[x] * (logp[i * a + x] - q[x]);
        dir[i] = g / s;
    }
}

inline void linear_direction(const PredictionSet& ps, const std::vector<double>& w,
                             std::size_t observed, std::vector<double>& dir) {
    const std::size_t m = w.size();
    double s = 0.0;
    for (double v : w) s += v;
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i) f += (w[i] / s) * ps.dist(i)[observed];
    dir.resize(m);
    for (std::size_t i = 0; i < m; ++i) dir[i] = (ps.dist(i)[observed] - f) / (f * s);
}

}  // namespace detail

// P(x) = prod_i P_i(x)^{w'_i} / sum_x' prod_i P_i(x')^{w'_i}, the minimizer
// of sum_i w_i D(Q || P_i) over Q.
inline Distribution mix_geometric(const PredictionSet& ps, const WeightVector& w) {
    detail::check_models(ps, w.size());
    std::vector<double> p;
    detail::geometric_probs(ps, w.values(), p);
    return Distribution(std::move(p));
}

// P(x) = sum_i w'_i P_i(x), the minimizer of sum_i w_i D(P_i || Q) over Q.
inline Distribution mix_linear(const PredictionSet& ps, const WeightVector& w) {
    detail::check_models(ps, w.size());
    std::vector<double> p;
    detail::linear_probs(ps, w.values(), p);
    return Distribution(std::move(p));
}

// PAQ mixture sq(sum_i w_i st(P_i(1))) on raw (possibly unnormalized or
// negative) weights. Coincides with mix_geometric whenever the weights lie
// on the simplex.
inline Distribution mix_logistic(const PredictionSet& ps, const std::vector<double>& w) {
    detail::check_models(ps, w.size());
    if (ps.alphabet_size() != 2)
        throw std::invalid_argument("mix_logistic: binary alphabet required");
    double t = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        t += w[i] * (ps.logp(i, 1) - ps.logp(i, 0));
    return Distribution::binary(squash(t));
}

inline Distribution mix_logistic(const PredictionSet& ps, const WeightVector& w) {
    return mix_logistic(ps, w.values());
}

// Steepest-descent direction of the per-step code length -ln f for the
// geometric mixture, as a function of the raw weights:
//   [ (Q(x_k) - q_{x_k} 1) - sum_x p_x (Q(x) - q_x 1) ] / (w^T 1)
// with q_x = w^T Q(x) / w^T 1 and p_x the mixture probabilities.
inline std::vector<double> geometric_step_direction(const PredictionSet& ps,
                                                    const std::vector<double>& w,
                                                    std::size_t observed) {
    detail::check_models(ps, w.size());
    if (observed >= ps.alphabet_size())
        throw std::invalid_argument("geometric_step_direction: symbol out of range");
    std::vector<double> dir, q, p;
    detail::geometric_direction(ps, w, observed, dir, q, p);
    return dir;
}

// Steepest-descent direction of -ln f for the linear mixture:
//   (P(x_k) - f_k 1) / (f_k w^T 1).
inline std::vector<double> linear_step_direction(const PredictionSet& ps,
                                                 const std::vector<double>& w,
                                                 std::size_t observed) {
    detail::check_models(ps, w.size());
    if (observed >= ps.alphabet_size())
        throw std::invalid_argument("linear_step_direction: symbol out of range");
    std::vector<double> dir;
    detail::linear_direction(ps, w, observed, dir);
    return dir;
}

// One gradient step on -log f_k, then floor at eps and renormalize.
inline MixerState update_geometric(MixerState state, const PredictionSet& ps,
                                   std::size_t observed) {
    if (state.kind != MixerKind::Geometric)
        throw std::invalid_argument("update_geometric: wrong mixer kind");
    detail::check_models(ps, state.w.size());
    if (observed >= ps.alphabet_size())
        throw std::invalid_argument("update_geometric: symbol out of range");
    static thread_local std::vector<double> dir, q, p;
    detail::geometric_direction(ps, state.w, observed, dir, q, p);
    for (std::size_t i = 0; i < state.w.size(); ++i) state.w[i] += state.alpha * dir[i];
    project_floor_simplex(state.w, state.epsilon);
    return state;
}

inline MixerState update_linear(MixerState state, const PredictionSet& ps,
                                std::size_t observed) {
    if (state.kind != MixerKind::Linear)
        throw std::invalid_argument("update_linear: wrong mixer kind");
    detail::check_models(ps, state.w.size());
    if (observed >= ps.alphabet_size())
        throw std::invalid_argument("update_linear: symbol out of range");
    static thread_local std::vector<double> dir;
    detail::linear_direction(ps, state.w, observed, dir);
    for (std::size_t i = 0; i < state.w.size(); ++i) state.w[i] += state.alpha * dir[i];
    project_floor_simplex(state.w, state.epsilon);
    return state;
}

// Multiplicative posterior update beta_i <- beta_i P_i(x_k)/f_k, then floor
// and renormalize. Without the floor the simplex is preserved exactly.
inline MixerState update_beta(MixerState state, const PredictionSet& ps,
                              std::size_t observed) {
    if (state.kind != MixerKind::Beta)
        throw std::invalid_argument("update_beta: wrong mixer kind");
    detail::check_models(ps, state.w.size());
    if (observed >= ps.alphabet_size())
        throw std::invalid_argument("update_beta: symbol out of range");
    double s = 0.0;
    for (double v : state.w) s += v;
    double f = 0.0;
    for (std::size_t i = 0; i < state.w.size(); ++i)
        f += (state.w[i] / s) * ps.dist(i)[observed];
    for (std::size_t i = 0; i < state.w.size(); ++i)
        state.w[i] = (state.w[i] / s) * ps.dist(i)[observed] / f;
    project_floor_simplex(state.w, state.epsilon);
    return state;
}

// Faithful PAQ update w_i += alpha (x_k - f_k) st(P_i(1)): constant step
// size, no floor, no renormalization.
inline MixerState update_logistic(MixerState state, const PredictionSet& ps,
                                  std::size_t observed_bit) {
    if (state.kind != MixerKind::Logistic)
        throw std::invalid_argument("update_logistic: wrong mixer kind");
    detail::check_models(ps, state.w.size());
    if (ps.alphabet_size() != 2)
        throw std::invalid_argument("update_logistic: binary alphabet required");
    if (observed_bit >= 2)
        throw std::invalid_argument("update_logistic: bit out of range");
    const double f = mix_logistic(ps, state.w)[1];
    const double err = state.alpha * (static_cast<double>(observed_bit) - f);
    for (std::size_t i = 0; i < state.w.size(); ++i)
        state.w[i] += err * (ps.logp(i, 1) - ps.logp(i, 0));
    return state;
}

inline Distribution mix(const MixerState& state, const PredictionSet& ps) {
    switch (state.kind) {
        case MixerKind::Geometric: return mix_geometric(ps, WeightVector(state.w));
        case MixerKind::Linear:
        case MixerKind::Beta:      return mix_linear(ps, WeightVector(state.w));
        case MixerKind::Logistic:  return mix_logistic(ps, state.w);
    }
    throw std::invalid_argument("mix: unknown kind");
}

// Mixed probability of a one-bit without constructing a Distribution;
// value-identical to mix(state, ps)[1] bit for bit. Hot path of the engine.
inline double mix_p1(const MixerState& state, const PredictionSet& ps) {
    detail::check_models(ps, state.w.size());
    if (ps.alphabet_size() != 2)
        throw std::invalid_argument("mix_p1: binary alphabet required");
    static thread_local std::vector<double> p;
    switch (state.kind) {
        case MixerKind::Geometric:
            detail::geometric_probs(ps, state.w, p);
            break;
        case MixerKind::Linear:
        case MixerKind::Beta:
            detail::linear_probs(ps, state.w, p);
            break;
        case MixerKind::Logistic: {
            const double* logp = ps.logp_data();
            double t = 0.0;
            for (std::size_t i = 0; i < state.w.size(); ++i)
                t += state.w[i] * (logp[i * 2 + 1] - logp[i * 2]);
            const double p1 = squash(t);
            p.resize(2);
            p[0] = 1.0 - p1;
            p[1] = p1;
            break;
        }
    }
    detail::clamp_renorm(p);
    return p[1];
}

inline MixerState update(MixerState state, const PredictionSet& ps, std::size_t observed) {
    switch (state.kind) {
        case MixerKind::Geometric: return update_geometric(std::move(state), ps, observed);
        case MixerKind::Linear:    return update_linear(std::move(state), ps, observed);
        case MixerKind::Beta:      return update_beta(std::move(state), ps, observed);
        case MixerKind::Logistic:  return update_logistic(std::move(state), ps, observed);
    }
    throw std::invalid_argument("update: unknown kind");
}

}  // namespace glmix
