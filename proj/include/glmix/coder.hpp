#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace glmix {

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// P(bit = 1) in 1/65536 units, kept away from 0 and 65536 so both symbols
// stay codable.
struct QuantizedProb {
    std::uint16_t p1 = 32768;
};

inline QuantizedProb quantize(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("quantize: probability must lie in (0,1)");
    long v = std::lround(p * 65536.0);
    if (v < 1) v = 1;
    if (v > 65535) v = 65535;
    return QuantizedProb{static_cast<std::uint16_t>(v)};
}

// Carryless binary range coder (Subbotin style). low/range are 32-bit
// registers renormalized a byte at a time; a byte is emitted only once the
// top bytes of low and low+range agree, so no carry can reach emitted
// output. When the interval straddles a top-byte boundary with range below
// 2^16, the range is truncated to the next 2^16 boundary, which keeps every
// split working on range >= 2^16. All state transitions are integer-only.
//
// The encoder also accumulates the exact information content of its range
// decisions: output size never exceeds cost_bits + 40 bits (32 bits of
// initial register precision plus the 4 flush bytes).
namespace coder_detail {
inline constexpr std::uint32_t kTop = 1u << 24;
inline constexpr std::uint32_t kBot = 1u << 16;
}

class RangeEncoder {
public:
    void encode(QuantizedProb q, unsigned bit) {
        const std::uint32_t before = range_;
        const std::uint32_t bound = (range_ >> 16) * q.p1;
        if (bit) {
            range_ = bound;
        } else {
            low_ += bound;
            range_ -= bound;
        }
        cost_bits_ += std::log2(static_cast<double>(before) / static_cast<double>(range_));
        renormalize();
    }

    // Emits the final 4 bytes of low; at most 4 bytes beyond the data bytes.
    std::vector<std::uint8_t> finish() {
        for (int i = 0; i < 4; ++i) {
            out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
            low_ <<= 8;
        }
        return std::move(out_);
    }

    // Exact -log2 of the coded interval so far, in bits.
    double cost_bits() const { return cost_bits_; }
    std::size_t bytes_emitted() const { return out_.size(); }

private:
    void renormalize() {
        using namespace coder_detail;
        while (true) {
            if ((low_ ^ (low_ + range_)) < kTop) {
                // top byte settled
            } else if (range_ < kBot) {
                const std::uint32_t reduced = (0u - low_) & (kBot - 1);
                cost_bits_ += std::log2(static_cast<double>(range_) / static_cast<double>(reduced));
                range_ = reduced;
            } else {
                break;
            }
            out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
            low_ <<= 8;
            range_ <<= 8;
        }
    }

    std::uint32_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    double cost_bits_ = 0.0;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> input) : in_(input) {
        for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
    }

    unsigned decode(QuantizedProb q) {
        const std::uint32_t bound = (range_ >> 16) * q.p1;
        const unsigned bit = (code_ - low_) < bound ? 1u : 0u;
        if (bit) {
            range_ = bound;
        } else {
            low_ += bound;
            range_ -= bound;
        }
        renormalize();
        return bit;
    }

private:
    std::uint8_t next_byte() {
        if (pos_ >= in_.size()) throw CodecError("range decoder: truncated input");
        return in_[pos_++];
    }

    void renormalize() {
        using namespace coder_detail;
        while (true) {
            if ((low_ ^ (low_ + range_)) < kTop) {
                // top byte settled
            } else if (range_ < kBot) {
                range_ = (0u - low_) & (kBot - 1);
            } else {
                break;
            }
            code_ = (code_ << 8) | next_byte();
            low_ <<= 8;
            range_ <<= 8;
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t code_ = 0;
};

}  // namespace glmix
