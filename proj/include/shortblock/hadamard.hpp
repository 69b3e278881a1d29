#pragma once

// Sylvester Hadamard matrices, naive and staged (fast) correlation
// transforms, and first-order RM decoding by maximum correlation.

#include "common.hpp"

#include <bit>
#include <cmath>
#include <span>

namespace shortblock {

/// Sylvester matrix H_{2^m}; entry (r, c) = (-1)^{popcount(r & c)}.
class HadamardMatrix {
public:
    static constexpr int kMaxOrder = 12;

    explicit HadamardMatrix(int m)
    {
        if (m < 1)
            throw ConfigError("hadamard_matrix: m must be >= 1");
        if (m > kMaxOrder)
            throw CapacityError("hadamard_matrix: m = " + std::to_string(m) +
                                " exceeds the dense-matrix limit of " +
                                std::to_string(kMaxOrder));
        m_ = m;
        size_ = std::size_t{1} << m;
        entries_.assign(size_ * size_, 1);
        // H_{2n} = H_2 (x) H_n: copy the top-left n x n block into the other
        // three quadrants, negating the bottom-right one.
        for (std::size_t n = 1; n < size_; n <<= 1) {
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = 0; c < n; ++c) {
                    const std::int8_t v = entries_[r * size_ + c];
                    entries_[r * size_ + c + n] = v;
                    entries_[(r + n) * size_ + c] = v;
                    entries_[(r + n) * size_ + c + n] = static_cast<std::int8_t>(-v);
                }
            }
        }
    }

    int order() const { return m_; }
    std::size_t size() const { return size_; }
    std::int8_t operator()(std::size_t r, std::size_t c) const { return entries_[r * size_ + c]; }

private:
    int m_ = 0;
    std::size_t size_ = 0;
    std::vector<std::int8_t> entries_;
};

inline HadamardMatrix hadamard_matrix(int m) { return HadamardMatrix(m); }

/// Correlations Delta = U H plus the number of additions/subtractions spent.
struct CorrelationVector {
    std::vector<double> values;
    std::uint64_t operations = 0;
};

namespace detail {

inline int checked_order(std::size_t n, const char* who)
{
    if (!is_power_of_two(n) || n < 2)
        throw DimensionError(std::string(who) + ": length " + std::to_string(n) +
                             " is not a power of two >= 2");
    const int m = log2_exact(n);
    if (m > 16)
        throw DimensionError(std::string(who) + ": order exceeds 16");
    return m;
}

} // namespace detail

/// Direct evaluation: each of the 2^m outputs accumulates 2^m signed terms.
inline CorrelationVector naive_transform(std::span<const double> u)
{
    detail::checked_order(u.size(), "naive_transform");
    const std::size_t n = u.size();
    CorrelationVector out{std::vector<double>(n, 0.0), 0};
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            acc += (std::popcount(t & j) & 1) ? -u[t] : u[t];
        out.values[j] = acc;
    }
    out.operations = static_cast<std::uint64_t>(n) * n;
    return out;
}

/// Same as above against a precomputed matrix.
inline CorrelationVector naive_transform(std::span<const double> u, const HadamardMatrix& h)
{
    detail::checked_order(u.size(), "naive_transform");
    if (h.size() != u.size())
        throw DimensionError("naive_transform: matrix size does not match input length");
    const std::size_t n = u.size();
    CorrelationVector out{std::vector<double>(n, 0.0), 0};
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < n; ++j)
            out.values[j] += h(t, j) > 0 ? u[t] : -u[t];
    out.operations = static_cast<std::uint64_t>(n) * n;
    return out;
}

/// In-place staged transform on a caller buffer; returns the operation count.
/// Stage i (i = 1..m) applies I_{2^{m-i}} (x) H_2 (x) I_{2^{i-1}}.
inline std::uint64_t fast_transform_inplace(std::span<double> v)
{
    detail::checked_order(v.size(), "fast_transform");
    const std::size_t n = v.size();
    std::uint64_t ops = 0;
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        ops += n;
    }
    return ops;
}

inline CorrelationVector fast_transform(std::span<const double> u)
{
    CorrelationVector out{std::vector<double>(u.begin(), u.end()), 0};
    out.operations = fast_transform_inplace(out.values);
    return out;
}

struct Rm1Decision {
    BitVector message;      // [constant bit, v_m, ..., v_1]
    std::size_t index = 0;  // winning correlation index
    double metric = 0.0;    // |Delta_index|
};

/// Green-machine completion: the largest |Delta_j| picks the v-coefficients
/// (bits of j) and its sign picks the constant bit. Ties go to the smallest
/// j and to constant bit 0.
inline Rm1Decision decide_rm1(std::span<const double> delta)
{
    const int m = detail::checked_order(delta.size(), "decide_rm1");
    std::size_t best = 0;
    double best_abs = std::abs(delta[0]);
    for (std::size_t j = 1; j < delta.size(); ++j) {
        const double a = std::abs(delta[j]);
        if (a > best_abs) {
            best_abs = a;
            best = j;
        }
    }
    Rm1Decision d;
    d.index = best;
    d.metric = best_abs;
    d.message.assign(static_cast<std::size_t>(m) + 1, 0);
    d.message[0] = delta[best] < 0.0 ? 1 : 0;
    for (int k = 1; k <= m; ++k)
        d.message[m + 1 - k] = static_cast<std::uint8_t>((best >> (k - 1)) & 1u);
    return d;
}

inline Rm1Decision rm1_fht_decode(std::span<const double> u)
{
    const auto delta = fast_transform(u);
    return decide_rm1(delta.values);
}

/// Decoder variant using the direct (quadratic) correlation path.
inline Rm1Decision rm1_ht_decode(std::span<const double> u)
{
    const auto delta = naive_transform(u);
    return decide_rm1(delta.values);
}

/// Bipolar image (-1)^c of a binary word.
inline std::vector<double> bipolar(const BitVector& bits)
{
    std::vector<double> out(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        out[i] = (bits[i] & 1u) ? -1.0 : 1.0;
    return out;
}

} // namespace shortblock
