#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shortblock {

using cf = std::complex<double>;

/// Ordered GF(2) sequence, one bit per element (values 0 or 1).
using BitVector = std::vector<std::uint8_t>;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline BitVector xor_bits(const BitVector& a, const BitVector& b)
{
    if (a.size() != b.size()) {
        throw DimensionError("xor_bits: length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
    BitVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] ^ b[i];
    return out;
}

/// Bit k of the result is bit k of `value` (least significant first).
inline BitVector bits_from_uint(std::uint64_t value, std::size_t length)
{
    BitVector out(length);
    for (std::size_t k = 0; k < length; ++k)
        out[k] = static_cast<std::uint8_t>((value >> k) & 1u);
    return out;
}

inline std::uint64_t bits_to_uint(const BitVector& bits)
{
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < bits.size(); ++k)
        v |= static_cast<std::uint64_t>(bits[k] & 1u) << k;
    return v;
}

inline std::size_t hamming_weight(const BitVector& bits)
{
    std::size_t w = 0;
    for (auto b : bits)
        w += b & 1u;
    return w;
}

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n)
{
    int m = 0;
    while ((std::size_t{1} << m) < n)
        ++m;
    return m;
}

} // namespace shortblock
