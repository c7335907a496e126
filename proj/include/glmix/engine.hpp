#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "glmix/coder.hpp"
#include "glmix/core.hpp"
#include "glmix/mixers.hpp"
#include "glmix/models.hpp"

namespace glmix {

// --- CRC32 (IEEE, reflected) -------------------------------------------

inline std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t seed = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::uint8_t b : data) c = table[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

// --- Container format ----------------------------------------------------
//
//   offset 0  magic "GLMX"
//          4  version  u8 (currently 1)
//          5  mixer id u8 (0=GEO 1=LIN 2=BETA 3=LOGISTIC)
//          6  reserved u16 (zero)
//          8  original length u64, little endian
//         16  crc32 of the plaintext u32, little endian
//         20  arithmetic-coded payload

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'G', 'L', 'M', 'X'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 20;

struct FrameHeader {
    std::uint8_t version = kFrameVersion;
    MixerKind mixer = MixerKind::Geometric;
    std::uint64_t original_length = 0;
    std::uint32_t crc = 0;
};

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t off, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
    return v;
}

}  // namespace detail

inline FrameHeader parse_frame_header(std::span<const std::uint8_t> frame) {
    if (frame.size() < kFrameHeaderSize) throw CodecError("frame: truncated header");
    if (std::memcmp(frame.data(), kFrameMagic.data(), 4) != 0)
        throw CodecError("frame: bad magic");
    FrameHeader h;
    h.version = frame[4];
    if (h.version != kFrameVersion) throw CodecError("frame: unsupported version");
    if (frame[5] > 3) throw CodecError("frame: unknown mixer id");
    h.mixer = static_cast<MixerKind>(frame[5]);
    if (detail::get_le(frame, 6, 2) != 0) throw CodecError("frame: nonzero reserved field");
    h.original_length = detail::get_le(frame, 8, 8);
    h.crc = static_cast<std::uint32_t>(detail::get_le(frame, 16, 4));
    return h;
}

// --- Engine --------------------------------------------------------------

struct EngineConfig {
    MixerKind mixer = MixerKind::Geometric;
    std::optional<double> alpha;    // step size; defaults per mixer kind
    std::optional<double> epsilon;  // weight floor; defaults per mixer kind
    ModelConfig models;

    MixerState make_mixer_state(std::size_t m) const {
        MixerState s = MixerState::defaults(mixer, m);
        if (alpha) s.alpha = *alpha;
        if (epsilon) s.epsilon = *epsilon;
        return s;
    }
};

// Match lengths are folded into four coarse buckets for weight selection.
inline unsigned match_bucket(std::uint32_t len) {
    if (len == 0) return 0;
    if (len < 16) return 1;
    if (len < 32) return 2;
    return 3;
}

struct TraceRecord {
    std::uint64_t step = 0;  // global bit index
    std::array<double, ModelBank::kModels> model_p1{};
    std::uint32_t table_index = 0;
    double mixed_p1 = 0.0;
    double code_bits = 0.0;
    unsigned bit = 0;
};

using TraceFn = std::function<void(const TraceRecord&)>;

// One sequential stream: the model bank, 1024 mixer states selected by
// (previous byte, match bucket), and the bit decomposition state. Encoder
// and decoder instances evolve identically given identical plaintext.
class Pipeline {
public:
    explicit Pipeline(const EngineConfig& cfg, std::size_t reserve = 0)
        : cfg_(cfg), bank_(cfg.models) {
        mixers_.reserve(kTableSlots);
        for (std::size_t i = 0; i < kTableSlots; ++i)
            mixers_.push_back(cfg.make_mixer_state(ModelBank::kModels));
        history_.reserve(reserve);
        needs_logs_ =
            cfg.mixer == MixerKind::Geometric || cfg.mixer == MixerKind::Logistic;
    }

    void set_trace(const TraceFn* fn) { trace_ = fn; }

    // Mixed probability of a one-bit for the next bit step; fills the
    // per-model predictions and selects the mixer slot as side effects.
    double predict() {
        if (needs_logs_) {
            bank_.predict_full(context(), history_, p1_, l1_, l0_);
            ps_.assign_binary_with_logs(p1_, l1_, l0_);
        } else {
            bank_.predict(context(), history_, p1_);
            ps_.assign_binary(p1_, false);
        }
        slot_ = (static_cast<std::uint32_t>(prev_byte_) << 2) | match_bucket(bank_.match_length());
        mixed_ = mix_p1(mixers_[slot_], ps_);
        return mixed_;
    }

    // Account the observed bit: mixer update, model updates, decomposition
    // state. Returns the ideal code length of the bit in bits.
    double learn(unsigned bit) {
        const double p = bit ? mixed_ : 1.0 - mixed_;
        const double bits = -std::log2(p);
        if (trace_ && *trace_) {
            TraceRecord r;
            r.step = step_;
            r.model_p1 = p1_;
            r.table_index = slot_;
            r.mixed_p1 = mixed_;
            r.code_bits = bits;
            r.bit = bit;
            (*trace_)(r);
        }
        mixers_[slot_] = update(std::move(mixers_[slot_]), ps_, bit);
        bank_.update_bit(context(), history_, bit);
        bit_prefix_ = (bit_prefix_ << 1) | bit;
        ++step_;
        return bits;
    }

    void finish_byte(std::uint8_t byte) {
        history_.push_back(byte);
        recent_ = (recent_ << 8) | byte;
        bank_.on_byte(history_);
        prev_byte_ = byte;
        bit_prefix_ = 1;
    }

    double encode_byte(RangeEncoder& enc, std::uint8_t byte) {
        double bits = 0.0;
        for (int k = 7; k >= 0; --k) {
            const unsigned bit = (byte >> k) & 1;
            const double p1 = predict();
            enc.encode(quantize(p1), bit);
            bits += learn(bit);
        }
        finish_byte(byte);
        return bits;
    }

    std::uint8_t decode_byte(RangeDecoder& dec) {
        std::uint8_t byte = 0;
        for (int k = 7; k >= 0; --k) {
            const double p1 = predict();
            const unsigned bit = dec.decode(quantize(p1));
            learn(bit);
            byte = static_cast<std::uint8_t>((byte << 1) | bit);
        }
        finish_byte(byte);
        return byte;
    }

    double ideal_byte(std::uint8_t byte) {
        double bits = 0.0;
        for (int k = 7; k >= 0; --k) {
            const unsigned bit = (byte >> k) & 1;
            predict();
            bits += learn(bit);
        }
        finish_byte(byte);
        return bits;
    }

    // Digest over every piece of adaptive state; encoder and decoder agree
    // on it after each coded byte.
    std::uint64_t digest() const {
        std::uint64_t h = bank_.digest();
        auto fold = [&h](std::uint64_t v) { h = (h ^ v) * 0x100000001B3ull; };
        for (const MixerState& s : mixers_)
            for (double w : s.w) {
                std::uint64_t bits;
                std::memcpy(&bits, &w, sizeof bits);
                fold(bits);
            }
        fold(prev_byte_);
        fold(bit_prefix_);
        return h;
    }

    const ModelBank& bank() const { return bank_; }

    static constexpr std::size_t kTableSlots = 256 * 4;

private:
    BitContext context() const {
        return BitContext{recent_, history_.size(), bit_prefix_};
    }

    EngineConfig cfg_;
    ModelBank bank_;
    std::vector<MixerState> mixers_;
    std::vector<std::uint8_t> history_;
    PredictionSet ps_;
    std::array<double, ModelBank::kModels> p1_{}, l1_{}, l0_{};
    std::uint64_t recent_ = 0;
    std::uint32_t bit_prefix_ = 1;
    std::uint8_t prev_byte_ = 0;
    std::uint32_t slot_ = 0;
    double mixed_ = 0.5;
    bool needs_logs_ = true;
    std::uint64_t step_ = 0;
    const TraceFn* trace_ = nullptr;
};

struct CompressStats {
    double ideal_bits = 0.0;     // sum of -log2 f_k over all bit steps
    double coder_cost_bits = 0.0;  // exact cost of the coder's range decisions
    std::size_t payload_bytes = 0;
    std::size_t frame_bytes = 0;
};

struct CompressResult {
    std::vector<std::uint8_t> frame;
    CompressStats stats;
};

inline CompressResult compress(std::span<const std::uint8_t> input, const EngineConfig& cfg,
                               const TraceFn* trace = nullptr) {
    Pipeline pipe(cfg, input.size());
    pipe.set_trace(trace);
    CompressResult r;
    RangeEncoder enc;
    for (std::uint8_t b : input) r.stats.ideal_bits += pipe.encode_byte(enc, b);

    std::vector<std::uint8_t> payload;
    if (!input.empty()) {
        r.stats.coder_cost_bits = enc.cost_bits();
        payload = enc.finish();
    }
    r.stats.payload_bytes = payload.size();

    auto& f = r.frame;
    f.reserve(kFrameHeaderSize + payload.size());
    f.insert(f.end(), kFrameMagic.begin(), kFrameMagic.end());
    f.push_back(kFrameVersion);
    f.push_back(static_cast<std::uint8_t>(cfg.mixer));
    detail::put_le(f, 0, 2);
    detail::put_le(f, input.size(), 8);
    detail::put_le(f, crc32(input), 4);
    f.insert(f.end(), payload.begin(), payload.end());
    r.stats.frame_bytes = f.size();
    return r;
}

inline std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> frame,
                                            const EngineConfig& cfg,
                                            const TraceFn* trace = nullptr) {
    const FrameHeader h = parse_frame_header(frame);
    if (h.mixer != cfg.mixer)
        throw CodecError("frame: mixer id does not match the requested mixer");
    std::vector<std::uint8_t> out;
    out.reserve(h.original_length);
    if (h.original_length > 0) {
        Pipeline pipe(cfg, h.original_length);
        pipe.set_trace(trace);
        RangeDecoder dec(frame.subspan(kFrameHeaderSize));
        for (std::uint64_t i = 0; i < h.original_length; ++i)
            out.push_back(pipe.decode_byte(dec));
    }
    if (crc32(out) != h.crc) throw CodecError("frame: crc mismatch, corrupted payload");
    return out;
}

inline double ideal_code_length(std::span<const std::uint8_t> input, const EngineConfig& cfg,
                                const TraceFn* trace = nullptr) {
    Pipeline pipe(cfg, input.size());
    pipe.set_trace(trace);
    double bits = 0.0;
    for (std::uint8_t b : input) bits += pipe.ideal_byte(b);
    return bits;
}

// --- CSV trace -----------------------------------------------------------
//
// step,m1..m8,table,mix,bits,bit — one row per bit step, consumed by the
// optimization lab.

inline void write_trace_header(std::ostream& os) {
    os << "step,m1,m2,m3,m4,m5,m6,m7,m8,table,mix,bits,bit\n";
}

inline void write_trace_record(std::ostream& os, const TraceRecord& r) {
    char buf[64];
    os << r.step;
    for (double p : r.model_p1) {
        std::snprintf(buf, sizeof buf, ",%.17g", p);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%u,%.17g,%.17g,%u", r.table_index, r.mixed_p1,
                  r.code_bits, r.bit);
    os << buf << '\n';
}

}  // namespace glmix
