#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace glmix {

// Probabilities handed to the coder and the mixers are kept strictly inside
// (0,1); construction clamps to [kMinProb, 1-kMinProb] and renormalizes.
inline constexpr double kMinProb = 1.0 / (1ull << 30);

// A strictly positive probability vector over an alphabet of size >= 2.
class Distribution {
public:
    Distribution() = default;

    explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
        normalize();
    }

    Distribution(std::initializer_list<double> probs) : probs_(probs) {
        normalize();
    }

    // Binary convenience: p1 is the probability of symbol 1.
    static Distribution binary(double p1) {
        return Distribution{1.0 - p1, p1};
    }

    std::size_t alphabet_size() const { return probs_.size(); }
    double operator[](std::size_t x) const { return probs_[x]; }
    const std::vector<double>& probs() const { return probs_; }

    bool same_alphabet(const Distribution& other) const {
        return probs_.size() == other.probs_.size();
    }

private:
    friend class PredictionSet;

    // In-place binary assignment reusing the existing buffer; same clamp and
    // renormalization as construction.
    void assign_binary_inplace(double p1) {
        probs_.resize(2);
        probs_[0] = 1.0 - p1;
        probs_[1] = p1;
        double sum = 0.0;
        for (double& p : probs_) {
            if (p < kMinProb) p = kMinProb;
            if (p > 1.0 - kMinProb) p = 1.0 - kMinProb;
            sum += p;
        }
        for (double& p : probs_) p /= sum;
    }

    void normalize() {
        if (probs_.size() < 2)
            throw std::invalid_argument("Distribution: alphabet size must be >= 2");
        double sum = 0.0;
        for (double& p : probs_) {
            if (!std::isfinite(p)) throw std::invalid_argument("Distribution: non-finite entry");
            if (p < kMinProb) p = kMinProb;
            if (p > 1.0 - kMinProb) p = 1.0 - kMinProb;
            sum += p;
        }
        for (double& p : probs_) p /= sum;
    }

    std::vector<double> probs_;
};

// m non-negative weights with positive sum. normalized() maps onto the
// simplex; the mixture functions only ever see the normalized form.
class WeightVector {
public:
    WeightVector() = default;

    explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
        if (w_.empty()) throw std::invalid_argument("WeightVector: empty");
        double sum = 0.0;
        for (double v : w_) {
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("WeightVector: entries must be finite and >= 0");
            sum += v;
        }
        if (sum <= 0.0) throw std::invalid_argument("WeightVector: sum must be > 0");
    }

    WeightVector(std::initializer_list<double> w) : WeightVector(std::vector<double>(w)) {}

    static WeightVector uniform(std::size_t m) {
        return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const { return w_; }

    double sum() const {
        double s = 0.0;
        for (double v : w_) s += v;
        return s;
    }

    WeightVector normalized() const {
        std::vector<double> n(w_);
        double s = sum();
        for (double& v : n) v /= s;
        return WeightVector(std::move(n));
    }

private:
    std::vector<double> w_;
};

// The m model distributions for one coding step together with their natural
// logs (the mixture and its gradient both consume the log matrix).
class PredictionSet {
public:
    PredictionSet() = default;

    explicit PredictionSet(std::vector<Distribution> dists) { assign(std::move(dists)); }

    void assign(std::vector<Distribution> dists) {
        if (dists.empty()) throw std::invalid_argument("PredictionSet: no models");
        const std::size_t a = dists[0].alphabet_size();
        for (const auto& d : dists)
            if (d.alphabet_size() != a)
                throw std::invalid_argument("PredictionSet: alphabet size mismatch");
        dists_ = std::move(dists);
        alphabet_ = a;
        logs_valid_ = true;
        logp_.resize(dists_.size() * a);
        for (std::size_t i = 0; i < dists_.size(); ++i)
            for (std::size_t x = 0; x < a; ++x)
                logp_[i * a + x] = std::log(dists_[i][x]);
    }

    // Binary fast path reusing internal buffers: p1[i] is model i's
    // probability of a one-bit, clamped into [kMinProb, 1-kMinProb]. When
    // with_logs is false the log matrix is left unset (reading it throws);
    // callers that only ever mix arithmetically skip 2m log evaluations.
    void assign_binary(std::span<const double> p1, bool with_logs = true) {
        if (p1.empty()) throw std::invalid_argument("PredictionSet: no models");
        const std::size_t m = p1.size();
        if (dists_.size() != m || alphabet_ != 2) {
            dists_.assign(m, Distribution::binary(0.5));
            logp_.resize(m * 2);
            alphabet_ = 2;
        }
        logs_valid_ = with_logs;
        for (std::size_t i = 0; i < m; ++i) {
            dists_[i].assign_binary_inplace(p1[i]);
            if (with_logs) {
                logp_[i * 2]     = std::log(dists_[i][0]);
                logp_[i * 2 + 1] = std::log(dists_[i][1]);
            }
        }
    }

    // Binary assignment with caller-supplied natural logs of the entries
    // (e.g. from count tables); they must equal ln(dists) within the type
    // tolerance.
    void assign_binary_with_logs(std::span<const double> p1, std::span<const double> l1,
                                 std::span<const double> l0) {
        assign_binary(p1, false);
        for (std::size_t i = 0; i < p1.size(); ++i) {
            logp_[i * 2] = l0[i];
            logp_[i * 2 + 1] = l1[i];
        }
        logs_valid_ = true;
    }

    std::size_t model_count() const { return dists_.size(); }
    std::size_t alphabet_size() const { return alphabet_; }
    const Distribution& dist(std::size_t i) const { return dists_[i]; }
    const std::vector<Distribution>& dists() const { return dists_; }

    // ln P_i(x)
    double logp(std::size_t i, std::size_t x) const {
        if (!logs_valid_) throw std::logic_error("PredictionSet: log matrix not populated");
        return logp_[i * alphabet_ + x];
    }

    // Raw log matrix for hot loops that have already checked logs_valid once.
    const double* logp_data() const {
        if (!logs_valid_) throw std::logic_error("PredictionSet: log matrix not populated");
        return logp_.data();
    }

private:
    std::vector<Distribution> dists_;
    std::vector<double> logp_;
    std::size_t alphabet_ = 0;
    bool logs_valid_ = false;
};

// Shannon entropy in bits.
inline double entropy(const Distribution& p) {
    double h = 0.0;
    for (std::size_t x = 0; x < p.alphabet_size(); ++x)
        h -= p[x] * std::log2(p[x]);
    return h;
}

// KL-divergence D(p || q) in bits; the expected coding overhead of using
// model q on source p.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
    if (!p.same_alphabet(q))
        throw std::invalid_argument("kl_divergence: alphabet size mismatch");
    double d = 0.0;
    for (std::size_t x = 0; x < p.alphabet_size(); ++x)
        d += p[x] * std::log2(p[x] / q[x]);
    return d;
}

// Logit transform st(p) = ln(p/(1-p)).
inline double stretch(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("stretch: argument must lie in (0,1)");
    return std::log(p / (1.0 - p));
}

// Logistic function sq(t) = 1/(1+e^-t), the inverse of stretch. Extreme
// inputs saturate; callers clamp into their own working range.
inline double squash(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Ideal code length of symbol x under p, in bits.
inline double code_length(const Distribution& p, std::size_t x) {
    if (x >= p.alphabet_size())
        throw std::invalid_argument("code_length: symbol out of range");
    return -std::log2(p[x]);
}

}  // namespace glmix
