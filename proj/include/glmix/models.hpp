#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

namespace glmix {

// Bytes are coded MSB-first as 8 binary decisions. bit_prefix holds the
// already-coded bits of the current byte behind a leading sentinel 1, so it
// ranges over [1, 255] and equals 1 exactly at byte boundaries. The byte
// history enters context addressing only through its length and the last 8
// bytes, packed newest-in-low-byte (zero-filled while short).
struct BitContext {
    std::uint64_t recent_bytes = 0;
    std::size_t history_len = 0;
    std::uint32_t bit_prefix = 1;

    static BitContext from_history(std::span<const std::uint8_t> history,
                                   std::uint32_t bit_prefix = 1) {
        BitContext ctx;
        ctx.history_len = history.size();
        ctx.bit_prefix = bit_prefix;
        const std::size_t n = std::min<std::size_t>(history.size(), 8);
        for (std::size_t k = 0; k < n; ++k)
            ctx.recent_bytes |= static_cast<std::uint64_t>(history[history.size() - 1 - k])
                                << (8 * k);
        return ctx;
    }

    std::uint32_t byte_back(std::size_t k) const {  // k = 1 is the newest byte
        if (k > history_len || k > 8) return 0;
        return static_cast<std::uint32_t>(recent_bytes >> (8 * (k - 1))) & 0xFF;
    }
};

inline std::uint32_t coded_bits(std::uint32_t bit_prefix) {
    std::uint32_t n = 0;
    while (bit_prefix > 1) { bit_prefix >>= 1; ++n; }
    return n;
}

// Krichevsky-Trofimov add-1/2 estimator on per-slot bit counts. Both counts
// halve (rounding down) once the total reaches 255, which keeps the counts
// in a byte and the estimate adaptive.
struct BitCounter {
    std::uint8_t c0 = 0;
    std::uint8_t c1 = 0;

    double p1() const {
        return (static_cast<double>(c1) + 0.5) / (static_cast<double>(c0) + c1 + 1.0);
    }

    void update(unsigned bit) {
        if (bit) ++c1; else ++c0;
        if (static_cast<unsigned>(c0) + c1 >= 255) { c0 >>= 1; c1 >>= 1; }
    }
};

namespace detail {

// ln(k + 1/2) and ln(k + 1) for byte-sized counts; turns the per-slot log
// probabilities into table lookups.
struct KtLogTables {
    std::array<double, 256> log_half;
    std::array<double, 512> log_total;
    KtLogTables() {
        for (int k = 0; k < 256; ++k) log_half[k] = std::log(k + 0.5);
        for (int k = 0; k < 512; ++k) log_total[k] = std::log(k + 1.0);
    }
};

inline const KtLogTables& kt_log_tables() {
    static const KtLogTables t;
    return t;
}

}  // namespace detail

struct ModelConfig {
    unsigned hashed_table_log = 22;  // orders 3..6 (and order 2 when not direct)
    bool order2_direct = true;       // 2^24 direct slots when set
    unsigned match_index_log = 22;
    std::uint32_t match_cap = 1u << 16;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t h) {
    h ^= h >> 33; h *= 0xFF51AFD7ED558CCDull;
    h ^= h >> 33; h *= 0xC4CEB9FE1A85EC53ull;
    h ^= h >> 33;
    return h;
}

}  // namespace detail

// The seven finite-order context models. Orders 0-2 are direct-indexed,
// orders 3-6 share a multiplicative hash into fixed-size tables; hash
// collisions are ignored.
class ContextModelSet {
public:
    explicit ContextModelSet(const ModelConfig& cfg = {}) : cfg_(cfg) {
        if (cfg_.hashed_table_log < 9 || cfg_.hashed_table_log > 30)
            throw std::invalid_argument("ContextModelSet: hashed_table_log must be in [9,30]");
        t0_.assign(256, {});
        t1_.assign(1u << 16, {});
        if (cfg_.order2_direct) t2_.assign(1u << 24, {});
        const unsigned first = cfg_.order2_direct ? 3 : 2;
        for (unsigned order = first; order <= 6; ++order)
            hashed_[order - first].assign(std::size_t{1} << cfg_.hashed_table_log, {});
    }

    double predict(unsigned order, const BitContext& ctx) const {
        return slot(order, ctx).p1();
    }

    // Prediction plus ln p1 / ln p0 from the count tables.
    double predict_full(unsigned order, const BitContext& ctx, double& l1, double& l0) const {
        const BitCounter& c = slot(order, ctx);
        const auto& t = detail::kt_log_tables();
        const unsigned total = static_cast<unsigned>(c.c0) + c.c1;
        l1 = t.log_half[c.c1] - t.log_total[total];
        l0 = t.log_half[c.c0] - t.log_total[total];
        return c.p1();
    }

    void update(unsigned order, const BitContext& ctx, unsigned bit) {
        slot(order, ctx).update(bit);
    }

    void digest(std::uint64_t& h) const {
        auto fold = [&h](const std::vector<BitCounter>& t) {
            for (const BitCounter& c : t) {
                h = (h ^ c.c0) * 0x100000001B3ull;
                h = (h ^ c.c1) * 0x100000001B3ull;
            }
        };
        fold(t0_); fold(t1_); fold(t2_);
        for (const auto& t : hashed_) fold(t);
    }

private:
    BitCounter& slot(unsigned order, const BitContext& ctx) {
        return const_cast<BitCounter&>(std::as_const(*this).slot(order, ctx));
    }

    const BitCounter& slot(unsigned order, const BitContext& ctx) const {
        if (order > 6) throw std::invalid_argument("context model: order must be 0..6");
        if (ctx.recent_bytes != base_key_ || ctx.history_len != base_len_) refresh_bases(ctx);
        const std::uint32_t prefix = ctx.bit_prefix & 0xFF;
        switch (order) {
            case 0: return t0_[prefix];
            case 1: return t1_[base1_ | prefix];
            case 2:
                if (!t2_.empty()) return t2_[base2_ | prefix];
                break;
            default: break;
        }
        return hashed_[order - (cfg_.order2_direct ? 3 : 2)][hrow_[order] | prefix];
    }

    // The byte part of every slot address is fixed between byte boundaries,
    // so fold it once per byte. The hash picks a 256-slot row; the bit
    // prefix indexes within the row, which keeps one byte's probes on a few
    // cache lines.
    void refresh_bases(const BitContext& ctx) const {
        base1_ = ctx.byte_back(1) << 8;
        base2_ = (ctx.byte_back(2) << 16) | base1_;
        for (unsigned order = 2; order <= 6; ++order) {
            const std::size_t avail = std::min<std::size_t>(order, ctx.history_len);
            std::uint64_t h = 0x9E3779B97F4A7C15ull * (order + 1);
            for (std::size_t k = avail; k >= 1; --k)
                h = detail::mix64(h ^ ctx.byte_back(k));
            hrow_[order] = (detail::mix64(h) >> (64 - (cfg_.hashed_table_log - 8))) << 8;
        }
        base_key_ = ctx.recent_bytes;
        base_len_ = ctx.history_len;
    }

    ModelConfig cfg_;
    std::vector<BitCounter> t0_, t1_, t2_;
    std::array<std::vector<BitCounter>, 5> hashed_;  // trailing slots unused when o2 is direct
    mutable std::uint64_t base_key_ = ~std::uint64_t{0};
    mutable std::size_t base_len_ = ~std::size_t{0};
    mutable std::uint32_t base1_ = 0;
    mutable std::uint32_t base2_ = 0;
    mutable std::array<std::size_t, 7> hrow_{};
};

// Longest-match predictor. A hash of the last 7 bytes indexes the most
// recent prior position of that 7-gram; the match length is measured by
// backward extension (capped). While a match of length L is active, each
// bit of the predicted byte gets probability 1 - 1/L; once the coded bits
// of the current byte contradict the predicted byte, the remaining bits of
// that byte fall back to 1/2, and the match is dropped at the boundary.
class MatchModel {
public:
    explicit MatchModel(const ModelConfig& cfg = {}) : cfg_(cfg) {
        index_.assign(std::size_t{1} << cfg_.match_index_log, kNoPos);
    }

    bool active() const { return active_; }
    std::uint32_t length() const { return active_ ? len_ : 0; }
    std::size_t pointer() const { return ptr_; }

    // Probability of a one-bit for the next intermediate step.
    double predict_p1(std::span<const std::uint8_t> history) const {
        if (!active_ || !consistent_) return 0.5;
        const unsigned predicted = history[ptr_];
        const unsigned bit = (predicted >> (7 - bits_coded_)) & 1;
        const double hit = 1.0 - 1.0 / static_cast<double>(len_);
        return bit ? hit : 1.0 - hit;
    }

    // Reveal one coded bit of the current byte.
    void on_bit(std::span<const std::uint8_t> history, unsigned bit) {
        if (active_ && consistent_) {
            const unsigned predicted = history[ptr_];
            if (((predicted >> (7 - bits_coded_)) & 1) != bit) consistent_ = false;
        }
        ++bits_coded_;
    }

    // Byte boundary: history already contains the completed byte. Extend the
    // match if its prediction came true, otherwise look the suffix up again.
    void on_byte(std::span<const std::uint8_t> history) {
        const std::size_t h = history.size();
        if (active_) {
            if (history[h - 1] == history[ptr_]) {
                ++ptr_;
                len_ = std::min(len_ + 1, cfg_.match_cap);
            } else {
                active_ = false;
            }
        }
        if (!active_ && h >= 8) {
            const std::size_t cand = index_[hash_key(history, h)];
            if (cand != kNoPos && cand + 1 <= h &&
                std::memcmp(history.data() + cand - 7, history.data() + h - 7, 7) == 0) {
                std::uint32_t j = 0;
                while (j < cfg_.match_cap && j < cand &&
                       history[cand - 1 - j] == history[h - 1 - j])
                    ++j;
                if (j >= 7) {
                    active_ = true;
                    ptr_ = cand;
                    len_ = j;
                }
            }
        }
        if (h >= 7) index_[hash_key(history, h)] = h;
        consistent_ = true;
        bits_coded_ = 0;
    }

    void digest(std::uint64_t& h) const {
        h = (h ^ (active_ ? 1 : 0)) * 0x100000001B3ull;
        h = (h ^ ptr_) * 0x100000001B3ull;
        h = (h ^ len_) * 0x100000001B3ull;
        h = (h ^ consistent_) * 0x100000001B3ull;
        h = (h ^ bits_coded_) * 0x100000001B3ull;
    }

private:
    static constexpr std::size_t kNoPos = ~std::size_t{0};

    // Hash of the 7 bytes ending at position end (exclusive).
    std::size_t hash_key(std::span<const std::uint8_t> history, std::size_t end) const {
        std::uint64_t v = 0;
        for (std::size_t k = 0; k < 7; ++k)
            v = (v << 8) | history[end - 7 + k];
        return detail::mix64(v * 0x9E3779B97F4A7C15ull) >> (64 - cfg_.match_index_log);
    }

    ModelConfig cfg_;
    std::vector<std::size_t> index_;
    bool active_ = false;
    bool consistent_ = true;
    std::size_t ptr_ = 0;
    std::uint32_t len_ = 0;
    unsigned bits_coded_ = 0;
};

// The eight submodels behind one prediction surface: orders 0-6 plus the
// match model as model 8 (uniform while no match is active).
class ModelBank {
public:
    static constexpr std::size_t kModels = 8;

    explicit ModelBank(const ModelConfig& cfg = {}) : ctx_(cfg), match_(cfg) {}

    void predict(const BitContext& ctx, std::span<const std::uint8_t> history,
                 std::array<double, kModels>& p1) const {
        for (unsigned order = 0; order <= 6; ++order)
            p1[order] = ctx_.predict(order, ctx);
        p1[7] = match_.predict_p1(history);
    }

    // Predictions together with their natural logs.
    void predict_full(const BitContext& ctx, std::span<const std::uint8_t> history,
                      std::array<double, kModels>& p1, std::array<double, kModels>& l1,
                      std::array<double, kModels>& l0) const {
        for (unsigned order = 0; order <= 6; ++order)
            p1[order] = ctx_.predict_full(order, ctx, l1[order], l0[order]);
        static const double ln_half = std::log(0.5);
        const double mp = match_.predict_p1(history);
        p1[7] = mp;
        if (mp == 0.5) {
            l1[7] = l0[7] = ln_half;
        } else {
            l1[7] = std::log(mp);
            l0[7] = std::log(1.0 - mp);
        }
    }

    void update_bit(const BitContext& ctx, std::span<const std::uint8_t> history, unsigned bit) {
        for (unsigned order = 0; order <= 6; ++order)
            ctx_.update(order, ctx, bit);
        match_.on_bit(history, bit);
    }

    void on_byte(std::span<const std::uint8_t> history) { match_.on_byte(history); }

    std::uint32_t match_length() const { return match_.length(); }
    const MatchModel& match() const { return match_; }
    const ContextModelSet& contexts() const { return ctx_; }

    std::uint64_t digest() const {
        std::uint64_t h = 0xCBF29CE484222325ull;
        ctx_.digest(h);
        match_.digest(h);
        return h;
    }

private:
    ContextModelSet ctx_;
    MatchModel match_;
};

}  // namespace glmix
