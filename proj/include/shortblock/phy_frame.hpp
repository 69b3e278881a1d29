#pragma once

// Resource grid construction: scrambling, QPSK, DMRS, data/DMRS
// interleaving with the beta power offset, and the inverse demapping.

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>

namespace shortblock {

struct FrameConfig {
    int prbs = 2;
    int symbols = 1;
    std::vector<int> dmrs_subcarriers{1, 4, 7, 10}; // per-PRB positions 0..11
    double beta = 1.0;                              // DMRS amplitude scale
    bool scrambling = false;
    std::uint32_t c_init = 0;
    std::uint32_t dmrs_c_init = 0x2A5;
    bool normalize_power = false; // divide grid by sqrt(mean symbol energy)

    std::size_t n_re() const { return static_cast<std::size_t>(12 * prbs * symbols); }
    std::size_t n_pilot() const { return dmrs_subcarriers.size() * prbs * symbols; }
    std::size_t n_data() const { return n_re() - n_pilot(); }
    std::size_t rate_matched_bits() const { return 2 * n_data(); }

    /// Mean symbol energy over the grid before optional normalization.
    double mean_symbol_energy() const
    {
        return (static_cast<double>(n_data()) + beta * beta * static_cast<double>(n_pilot())) /
               static_cast<double>(n_re());
    }

    void validate() const
    {
        if (prbs < 1 || prbs > 16)
            throw ConfigError("frame: PRB count must be 1..16");
        if (symbols < 1 || symbols > 14)
            throw ConfigError("frame: symbol count must be 1..14");
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ConfigError("frame: beta must be positive");
        if (dmrs_subcarriers.empty() || dmrs_subcarriers.size() >= 12)
            throw ConfigError("frame: DMRS pattern must have 1..11 entries");
        auto sorted = dmrs_subcarriers;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
            sorted.front() < 0 || sorted.back() > 11)
            throw ConfigError("frame: DMRS pattern entries must be distinct and in 0..11");
    }
};

/// Precomputed index bookkeeping for one FrameConfig. Resource element t
/// sits at subcarrier t % (12 P) of OFDM symbol t / (12 P); flatness
/// regions are PRBs within a symbol, i.e. region(t) = t / 12.
struct FrameLayout {
    std::size_t n_re = 0;
    std::size_t n_regions = 0;
    std::vector<bool> data_mask;
    std::vector<std::size_t> data_positions;  // increasing RE index
    std::vector<std::size_t> pilot_positions; // increasing RE index
    std::vector<std::size_t> region;          // per RE
    std::vector<std::size_t> subcarrier;      // per RE

    explicit FrameLayout(const FrameConfig& cfg)
    {
        cfg.validate();
        n_re = cfg.n_re();
        n_regions = static_cast<std::size_t>(cfg.prbs * cfg.symbols);
        data_mask.assign(n_re, true);
        region.resize(n_re);
        subcarrier.resize(n_re);
        const std::size_t width = 12 * static_cast<std::size_t>(cfg.prbs);
        for (std::size_t t = 0; t < n_re; ++t) {
            region[t] = t / 12;
            subcarrier[t] = t % width;
        }
        for (std::size_t r = 0; r < n_regions; ++r)
            for (int sc : cfg.dmrs_subcarriers)
                data_mask[r * 12 + static_cast<std::size_t>(sc)] = false;
        for (std::size_t t = 0; t < n_re; ++t)
            (data_mask[t] ? data_positions : pilot_positions).push_back(t);
    }

    std::size_t n_data() const { return data_positions.size(); }
    std::size_t n_pilot() const { return pilot_positions.size(); }
};

// ---------------------------------------------------------------------------
// Scrambling

/// Length-31 Gold sequence: x1 starts at (1,0,...,0), x2 is loaded with the
/// bits of c_init, output d(n) = x1(n + 1600) ^ x2(n + 1600).
inline BitVector scrambling_sequence(std::uint32_t c_init, std::size_t length)
{
    constexpr std::size_t kNc = 1600;
    const std::size_t total = length + kNc + 31;
    BitVector x1(total, 0), x2(total, 0);
    x1[0] = 1;
    for (std::size_t i = 0; i < 31; ++i)
        x2[i] = static_cast<std::uint8_t>((c_init >> i) & 1u);
    for (std::size_t n = 0; n + 31 < total; ++n) {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    BitVector d(length);
    for (std::size_t n = 0; n < length; ++n)
        d[n] = x1[n + kNc] ^ x2[n + kNc];
    return d;
}

/// Data scrambling sequence for a frame; all zeros when scrambling is off.
inline BitVector frame_scrambling_sequence(const FrameConfig& cfg, std::size_t length)
{
    return cfg.scrambling ? scrambling_sequence(cfg.c_init, length) : BitVector(length, 0);
}

inline BitVector scramble(const BitVector& e, const BitVector& d) { return xor_bits(e, d); }

// ---------------------------------------------------------------------------
// QPSK

inline std::vector<cf> qpsk_modulate(const BitVector& bits)
{
    if (bits.size() % 2 != 0)
        throw DimensionError("qpsk_modulate: odd bit count " + std::to_string(bits.size()));
    constexpr double a = std::numbers::sqrt2 / 2.0;
    std::vector<cf> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cf((bits[2 * i] & 1u) ? -a : a, (bits[2 * i + 1] & 1u) ? -a : a);
    return out;
}

inline BitVector qpsk_demodulate_hard(std::span<const cf> symbols)
{
    BitVector out(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
        out[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
    }
    return out;
}

/// Soft values with the bipolar convention: positive favours bit 0. No
/// noise-variance scaling is applied.
inline std::vector<double> qpsk_soft_demap(std::span<const cf> symbols)
{
    std::vector<double> out(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].real();
        out[2 * i + 1] = symbols[i].imag();
    }
    return out;
}

// ---------------------------------------------------------------------------
// DMRS and resource mapping

/// Unit-modulus QPSK pilots from a dedicated Gold sequence (length N_p).
inline std::vector<cf> generate_dmrs(const FrameConfig& cfg)
{
    return qpsk_modulate(scrambling_sequence(cfg.dmrs_c_init, 2 * cfg.n_pilot()));
}

struct ResourceGrid {
    std::vector<cf> symbols;
    std::vector<bool> data_mask;
};

inline double grid_normalization(const FrameConfig& cfg)
{
    return cfg.normalize_power ? 1.0 / std::sqrt(cfg.mean_symbol_energy()) : 1.0;
}

inline ResourceGrid map_resources(std::span<const cf> data, std::span<const cf> dmrs,
                                  const FrameLayout& layout, const FrameConfig& cfg)
{
    if (data.size() != layout.n_data() || dmrs.size() != layout.n_pilot())
        throw DimensionError("map_resources: expected " + std::to_string(layout.n_data()) +
                             " data and " + std::to_string(layout.n_pilot()) +
                             " DMRS symbols, got " + std::to_string(data.size()) + " and " +
                             std::to_string(dmrs.size()));
    const double g = grid_normalization(cfg);
    ResourceGrid grid{std::vector<cf>(layout.n_re), layout.data_mask};
    for (std::size_t i = 0; i < data.size(); ++i)
        grid.symbols[layout.data_positions[i]] = g * data[i];
    for (std::size_t i = 0; i < dmrs.size(); ++i)
        grid.symbols[layout.pilot_positions[i]] = g * cfg.beta * dmrs[i];
    return grid;
}

inline ResourceGrid map_resources(std::span<const cf> data, std::span<const cf> dmrs,
                                  const FrameConfig& cfg)
{
    return map_resources(data, dmrs, FrameLayout(cfg), cfg);
}

/// Splits an N-vector into (data part, DMRS part), both in increasing RE order.
inline std::pair<std::vector<cf>, std::vector<cf>> demap_resources(std::span<const cf> grid,
                                                                   const FrameLayout& layout)
{
    if (grid.size() != layout.n_re)
        throw DimensionError("demap_resources: grid has " + std::to_string(grid.size()) +
                             " elements, expected " + std::to_string(layout.n_re));
    std::pair<std::vector<cf>, std::vector<cf>> out;
    out.first.reserve(layout.n_data());
    out.second.reserve(layout.n_pilot());
    for (auto t : layout.data_positions)
        out.first.push_back(grid[t]);
    for (auto t : layout.pilot_positions)
        out.second.push_back(grid[t]);
    return out;
}

inline std::pair<std::vector<cf>, std::vector<cf>> demap_resources(std::span<const cf> grid,
                                                                   const FrameConfig& cfg)
{
    return demap_resources(grid, FrameLayout(cfg));
}

/// Rate-matched bits -> scrambled -> QPSK data symbols for one frame.
inline std::vector<cf> modulate_payload(const BitVector& rate_matched, const FrameConfig& cfg)
{
    if (rate_matched.size() != cfg.rate_matched_bits())
        throw DimensionError("modulate_payload: " + std::to_string(rate_matched.size()) +
                             " bits do not fill " + std::to_string(cfg.n_data()) +
                             " data resource elements");
    return qpsk_modulate(scramble(rate_matched, frame_scrambling_sequence(cfg, rate_matched.size())));
}

} // namespace shortblock
