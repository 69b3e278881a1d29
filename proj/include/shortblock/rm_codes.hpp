#pragma once

// First-order Reed-Muller generators, the (32,K) basis-sequence code,
// block segmentation and repetition rate matching.

#include "common.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

namespace shortblock {

/// Rows are ordered [1, v_m, v_{m-1}, ..., v_1]; v_k evaluated at column t
/// is bit (k-1) of t, so the v-rows read top to bottom spell t MSB first.
struct GeneratorMatrix {
    int m = 0;
    std::vector<BitVector> rows;

    std::size_t length() const { return std::size_t{1} << m; }
    std::size_t dimension() const { return rows.size(); }
};

inline GeneratorMatrix build_rm1_generator(int m)
{
    if (m < 1 || m > 16)
        throw ConfigError("build_rm1_generator: m must be in [1,16], got " + std::to_string(m));
    GeneratorMatrix g;
    g.m = m;
    const std::size_t n = std::size_t{1} << m;
    g.rows.reserve(m + 1);
    g.rows.emplace_back(n, 1);
    for (int k = m; k >= 1; --k) {
        BitVector row(n);
        for (std::size_t t = 0; t < n; ++t)
            row[t] = static_cast<std::uint8_t>((t >> (k - 1)) & 1u);
        g.rows.push_back(std::move(row));
    }
    return g;
}

inline BitVector encode_rm1(const BitVector& message, const GeneratorMatrix& gen)
{
    if (message.size() != gen.dimension()) {
        throw DimensionError("encode_rm1: message has " + std::to_string(message.size()) +
                             " bits, generator has " + std::to_string(gen.dimension()) +
                             " rows");
    }
    // Column t of the generator is (1, bits of t), so c_t = b_0 ^ parity(t & a)
    // with a packing the v-coefficients.
    std::size_t a = 0;
    for (int k = 1; k <= gen.m; ++k)
        if (message[gen.m + 1 - k] & 1u)
            a |= std::size_t{1} << (k - 1);
    const std::uint8_t c0 = message[0] & 1u;
    BitVector out(gen.length());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = static_cast<std::uint8_t>(c0 ^ (std::popcount(t & a) & 1));
    return out;
}

// ---------------------------------------------------------------------------
// (32,K) basis sequences

namespace detail {

// Basis sequences M_{l,k}, row l = M_{l,0..10}. Same content as
// data/basis_32k.txt.
inline constexpr std::string_view kBasis32Text =
    "1 1 0 0 0 0 0 0 0 0 1\n"
    "1 1 1 0 0 0 0 0 0 1 1\n"
    "1 0 0 1 0 0 1 0 1 1 1\n"
    "1 0 1 1 0 0 0 0 1 0 1\n"
    "1 1 1 1 0 0 0 1 0 0 1\n"
    "1 1 0 0 1 0 1 1 1 0 1\n"
    "1 0 1 0 1 0 1 0 1 1 1\n"
    "1 0 0 1 1 0 0 1 1 0 1\n"
    "1 1 0 1 1 0 0 1 0 1 1\n"
    "1 0 1 1 1 0 1 0 0 1 1\n"
    "1 0 1 0 0 1 1 1 0 1 1\n"
    "1 1 1 0 0 1 1 0 1 0 1\n"
    "1 0 0 1 0 1 0 1 1 1 1\n"
    "1 1 0 1 0 1 0 1 0 1 1\n"
    "1 0 0 0 1 1 0 1 0 0 1\n"
    "1 1 0 0 1 1 1 1 0 1 1\n"
    "1 1 1 0 1 1 1 0 0 1 0\n"
    "1 0 0 1 1 1 0 0 1 0 0\n"
    "1 1 0 1 1 1 1 1 0 0 0\n"
    "1 0 0 0 0 1 1 0 0 0 0\n"
    "1 0 1 0 0 0 1 0 0 0 1\n"
    "1 1 0 1 0 0 0 0 0 1 1\n"
    "1 0 0 0 1 0 0 1 1 0 1\n"
    "1 1 1 0 1 0 0 0 1 1 1\n"
    "1 1 1 1 1 0 1 1 1 1 0\n"
    "1 1 0 0 0 1 1 1 0 0 1\n"
    "1 0 1 1 0 1 0 0 1 1 0\n"
    "1 1 1 1 0 1 0 1 1 1 0\n"
    "1 0 1 0 1 1 1 0 1 0 0\n"
    "1 0 1 1 1 1 1 1 1 0 0\n"
    "1 1 1 1 1 1 1 1 1 1 1\n"
    "1 0 0 0 0 0 0 0 0 0 0\n";

// FNV-1a over the 352 digits in row-major order.
inline constexpr std::uint64_t kBasis32Checksum = 0xb05cdaf78b219f4fULL;

inline std::uint64_t fnv1a(std::string_view digits)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : digits) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

struct BasisTable32 {
    static constexpr std::size_t kRows = 32;
    static constexpr std::size_t kCols = 11;

    std::array<std::array<std::uint8_t, kCols>, kRows> entries{};

    std::uint8_t at(std::size_t row, std::size_t col) const { return entries[row][col]; }

    std::uint64_t checksum() const
    {
        std::string digits;
        digits.reserve(kRows * kCols);
        for (const auto& row : entries)
            for (auto v : row)
                digits.push_back(static_cast<char>('0' + v));
        return detail::fnv1a(digits);
    }

    /// Parses 32 lines of 11 whitespace-separated {0,1} digits. When
    /// `verify_checksum` is set the content must match the shipped table.
    static BasisTable32 parse(std::string_view text, bool verify_checksum = true)
    {
        BasisTable32 table;
        std::istringstream in{std::string(text)};
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            if (row >= kRows)
                throw ConfigError("basis table: more than 32 rows");
            std::istringstream fields(line);
            std::string tok;
            std::size_t col = 0;
            while (fields >> tok) {
                if (col >= kCols)
                    throw ConfigError("basis table: row " + std::to_string(row) +
                                      " has more than 11 entries");
                if (tok != "0" && tok != "1")
                    throw ConfigError("basis table: row " + std::to_string(row) +
                                      " has non-binary entry '" + tok + "'");
                table.entries[row][col++] = static_cast<std::uint8_t>(tok[0] - '0');
            }
            if (col != kCols)
                throw ConfigError("basis table: row " + std::to_string(row) + " has " +
                                  std::to_string(col) + " entries, expected 11");
            ++row;
        }
        if (row != kRows)
            throw ConfigError("basis table: expected 32 rows, got " + std::to_string(row));
        if (verify_checksum && table.checksum() != detail::kBasis32Checksum)
            throw ConfigError("basis table: checksum mismatch");
        return table;
    }

    static BasisTable32 load(const std::string& path, bool verify_checksum = true)
    {
        std::ifstream f(path);
        if (!f)
            throw IoError("cannot open basis table '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), verify_checksum);
    }
};

inline const BasisTable32& standard_basis_table()
{
    static const BasisTable32 table = BasisTable32::parse(detail::kBasis32Text);
    return table;
}

inline BitVector encode_32k(const BitVector& message,
                            const BasisTable32& table = standard_basis_table())
{
    const std::size_t k = message.size();
    if (k < 3 || k > BasisTable32::kCols)
        throw ConfigError("encode_32k: payload must be 3..11 bits, got " + std::to_string(k));
    BitVector out(BasisTable32::kRows);
    for (std::size_t l = 0; l < BasisTable32::kRows; ++l) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j < k; ++j)
            acc ^= message[j] & table.at(l, j);
        out[l] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Code configuration

enum class CodeScheme { Standard32K, BlockRM1 };

inline std::string to_string(CodeScheme s)
{
    return s == CodeScheme::Standard32K ? "standard32k" : "block-rm1";
}

inline CodeScheme parse_code_scheme(std::string_view name)
{
    if (name == "standard32k")
        return CodeScheme::Standard32K;
    if (name == "block-rm1")
        return CodeScheme::BlockRM1;
    throw ConfigError("unknown code scheme '" + std::string(name) + "'");
}

/// One RM(1,m) sub-block carrying k = m + 1 message bits.
struct BlockSpec {
    int k = 0;
    int m = 0;
    std::size_t length() const { return std::size_t{1} << m; }
    bool operator==(const BlockSpec&) const = default;
};

/// Even split into ceil(K/6) blocks, smaller blocks first. K = 11 gives
/// (5, m=4) then (6, m=5).
inline std::vector<BlockSpec> default_block_split(int payload_bits)
{
    if (payload_bits < 2 || payload_bits > 16)
        throw ConfigError("block split: payload must be 2..16 bits, got " +
                          std::to_string(payload_bits));
    const int n_blocks = (payload_bits + 5) / 6;
    std::vector<BlockSpec> out;
    const int base = payload_bits / n_blocks;
    const int extra = payload_bits % n_blocks;
    for (int j = 0; j < n_blocks; ++j) {
        const int k = base + (j >= n_blocks - extra ? 1 : 0);
        out.push_back({k, k - 1});
    }
    return out;
}

struct CodeConfig {
    CodeScheme scheme = CodeScheme::Standard32K;
    int payload_bits = 4;
    int rate_matched_bits = 32;
    std::vector<BlockSpec> blocks; // BlockRM1 only

    static CodeConfig standard(int k, int e) { return {CodeScheme::Standard32K, k, e, {}}; }

    static CodeConfig block(int k, int e, std::vector<BlockSpec> split = {})
    {
        return {CodeScheme::BlockRM1, k, e, split.empty() ? default_block_split(k) : split};
    }

    /// Codeword length before rate matching.
    std::size_t mother_length() const
    {
        if (scheme == CodeScheme::Standard32K)
            return BasisTable32::kRows;
        std::size_t n = 0;
        for (const auto& b : blocks)
            n += b.length();
        return n;
    }

    void validate() const
    {
        if (scheme == CodeScheme::Standard32K) {
            if (payload_bits < 3 || payload_bits > 11)
                throw ConfigError("standard32k: payload must be 3..11 bits");
        } else {
            if (blocks.empty())
                throw ConfigError("block-rm1: empty block split");
            int sum = 0;
            for (const auto& b : blocks) {
                if (b.m < 1 || b.m > 16 || b.k != b.m + 1)
                    throw ConfigError("block-rm1: each block needs k = m + 1 with 1 <= m <= 16");
                sum += b.k;
            }
            if (sum != payload_bits)
                throw ConfigError("block-rm1: block sizes sum to " + std::to_string(sum) +
                                  ", payload is " + std::to_string(payload_bits));
        }
        if (rate_matched_bits < 1 || static_cast<std::size_t>(rate_matched_bits) < mother_length())
            throw ConfigError("rate matching: E = " + std::to_string(rate_matched_bits) +
                              " is below the mother code length " +
                              std::to_string(mother_length()) + " (puncturing unsupported)");
    }
};

inline BitVector segment_and_encode(const BitVector& message, const CodeConfig& cfg)
{
    if (cfg.scheme != CodeScheme::BlockRM1)
        throw ConfigError("segment_and_encode: scheme must be block-rm1");
    std::size_t total = 0;
    for (const auto& b : cfg.blocks)
        total += static_cast<std::size_t>(b.k);
    if (total != message.size())
        throw DimensionError("segment_and_encode: split covers " + std::to_string(total) +
                             " bits, message has " + std::to_string(message.size()));
    BitVector out;
    out.reserve(cfg.mother_length());
    auto it = message.begin();
    for (const auto& b : cfg.blocks) {
        BitVector sub(it, it + b.k);
        it += b.k;
        const auto cw = encode_rm1(sub, build_rm1_generator(b.m));
        out.insert(out.end(), cw.begin(), cw.end());
    }
    return out;
}

inline BitVector rate_match_repeat(const BitVector& code, int e)
{
    if (e < 1)
        throw ConfigError("rate_match_repeat: E must be >= 1");
    if (code.empty())
        throw DimensionError("rate_match_repeat: empty codeword");
    BitVector out(static_cast<std::size_t>(e));
    for (std::size_t l = 0; l < out.size(); ++l)
        out[l] = code[l % code.size()];
    return out;
}

/// Mother codeword for either scheme (before rate matching).
inline BitVector encode_message(const BitVector& message, const CodeConfig& cfg)
{
    if (static_cast<int>(message.size()) != cfg.payload_bits)
        throw DimensionError("encode_message: message length " + std::to_string(message.size()) +
                             " != payload " + std::to_string(cfg.payload_bits));
    if (cfg.scheme == CodeScheme::Standard32K)
        return encode_32k(message);
    return segment_and_encode(message, cfg);
}

inline BitVector encode_and_rate_match(const BitVector& message, const CodeConfig& cfg)
{
    return rate_match_repeat(encode_message(message, cfg), cfg.rate_matched_bits);
}

} // namespace shortblock
