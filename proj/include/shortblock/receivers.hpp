#pragma once

// Detection strategies: non-coherent ML, the three-term estimator-correlator,
// quasi-coherent detection on LS channel estimates, and the block
// Hadamard-transform receiver.
//
// Channel flatness is assumed per region (one PRB in one OFDM symbol, see
// FrameLayout); every metric is evaluated per region and summed over regions
// and antennas.

#include "common.hpp"
#include "hadamard.hpp"
#include "phy_frame.hpp"
#include "rm_codes.hpp"

#include <cmath>
#include <span>
#include <string_view>

namespace shortblock {

/// N_R received grids, each of length N.
using Observations = std::vector<std::vector<cf>>;

enum class ReceiverKind { Noncoherent, FullEc, QuasiCoherent, FhtBlock, HtBlock };

inline std::string to_string(ReceiverKind r)
{
    switch (r) {
    case ReceiverKind::Noncoherent: return "noncoherent";
    case ReceiverKind::FullEc: return "full-ec";
    case ReceiverKind::QuasiCoherent: return "quasi-coherent";
    case ReceiverKind::FhtBlock: return "fht-block";
    case ReceiverKind::HtBlock: return "ht-block";
    }
    return "?";
}

inline ReceiverKind parse_receiver(std::string_view s)
{
    for (auto r : {ReceiverKind::Noncoherent, ReceiverKind::FullEc, ReceiverKind::QuasiCoherent,
                   ReceiverKind::FhtBlock, ReceiverKind::HtBlock})
        if (s == to_string(r))
            return r;
    throw ConfigError("unknown receiver '" + std::string(s) + "'");
}

inline bool is_block_receiver(ReceiverKind r)
{
    return r == ReceiverKind::FhtBlock || r == ReceiverKind::HtBlock;
}

// ---------------------------------------------------------------------------
// Candidates

/// All 2^K transmit hypotheses. The DMRS part (already scaled by beta and
/// the optional grid normalization) is shared; data parts are stored per
/// message in increasing message order.
struct CandidateSet {
    FrameLayout layout;
    std::vector<cf> pilots;
    std::vector<std::vector<cf>> data;
    bool constant_modulus = true;

    std::size_t size() const { return data.size(); }

    std::vector<cf> grid(std::size_t message) const
    {
        std::vector<cf> x(layout.n_re);
        for (std::size_t k = 0; k < layout.n_data(); ++k)
            x[layout.data_positions[k]] = data[message][k];
        for (std::size_t k = 0; k < layout.n_pilot(); ++k)
            x[layout.pilot_positions[k]] = pilots[k];
        return x;
    }
};

/// Full transmit chain for one message: encode, rate match, scramble,
/// modulate and map.
inline ResourceGrid transmit_grid(std::uint64_t message, const CodeConfig& code,
                                  const FrameConfig& frame, const FrameLayout& layout)
{
    const auto bits = bits_from_uint(message, static_cast<std::size_t>(code.payload_bits));
    const auto data = modulate_payload(encode_and_rate_match(bits, code), frame);
    return map_resources(data, generate_dmrs(frame), layout, frame);
}

inline CandidateSet build_candidates(const CodeConfig& code, const FrameConfig& frame)
{
    if (code.payload_bits > 16)
        throw CapacityError("build_candidates: 2^" + std::to_string(code.payload_bits) +
                            " candidates is too many to enumerate");
    code.validate();
    if (static_cast<std::size_t>(code.rate_matched_bits) != frame.rate_matched_bits())
        throw ConfigError("build_candidates: code E = " + std::to_string(code.rate_matched_bits) +
                          " but the frame carries " + std::to_string(frame.rate_matched_bits()) +
                          " bits");
    CandidateSet set{FrameLayout(frame), {}, {}, true};
    const double g = grid_normalization(frame);
    for (const auto& p : generate_dmrs(frame))
        set.pilots.push_back(g * frame.beta * p);
    const std::uint64_t count = std::uint64_t{1} << code.payload_bits;
    set.data.reserve(count);
    const auto scr = frame_scrambling_sequence(frame, static_cast<std::size_t>(code.rate_matched_bits));
    for (std::uint64_t msg = 0; msg < count; ++msg) {
        const auto bits = bits_from_uint(msg, static_cast<std::size_t>(code.payload_bits));
        auto sym = qpsk_modulate(scramble(encode_and_rate_match(bits, code), scr));
        for (auto& s : sym)
            s *= g;
        set.data.push_back(std::move(sym));
    }
    return set;
}

// ---------------------------------------------------------------------------
// Metrics (definition form, one candidate at a time)

namespace detail {

inline void check_observations(std::span<const cf> x, const Observations& ys,
                               const FrameLayout& layout, const char* who)
{
    if (x.size() != layout.n_re)
        throw DimensionError(std::string(who) + ": candidate length " + std::to_string(x.size()) +
                             " != " + std::to_string(layout.n_re));
    if (ys.empty())
        throw DimensionError(std::string(who) + ": no observations");
    for (const auto& y : ys)
        if (y.size() != layout.n_re)
            throw DimensionError(std::string(who) + ": observation length " +
                                 std::to_string(y.size()) + " != " + std::to_string(layout.n_re));
}

/// Per (antenna, region) partial inner products x_S^H y_i restricted to
/// the pilot (S = p) or data (S = d) positions.
struct SplitCorrelations {
    std::vector<cf> pilot; // n_rx x n_regions
    std::vector<cf> data;  // n_rx x n_regions
};

inline SplitCorrelations split_correlations(std::span<const cf> x, const Observations& ys,
                                            const FrameLayout& layout)
{
    const std::size_t nr = layout.n_regions;
    SplitCorrelations c{std::vector<cf>(ys.size() * nr), std::vector<cf>(ys.size() * nr)};
    for (std::size_t i = 0; i < ys.size(); ++i) {
        for (auto t : layout.pilot_positions)
            c.pilot[i * nr + layout.region[t]] += std::conj(x[t]) * ys[i][t];
        for (auto t : layout.data_positions)
            c.data[i * nr + layout.region[t]] += std::conj(x[t]) * ys[i][t];
    }
    return c;
}

} // namespace detail

/// sum_i sum_regions |x^H y_i|^2 over the whole region.
inline double metric_noncoherent(std::span<const cf> x, const Observations& ys,
                                 const FrameLayout& layout)
{
    detail::check_observations(x, ys, layout, "metric_noncoherent");
    const std::size_t nr = layout.n_regions;
    double total = 0.0;
    std::vector<cf> acc(nr);
    for (const auto& y : ys) {
        std::fill(acc.begin(), acc.end(), cf{});
        for (std::size_t t = 0; t < layout.n_re; ++t)
            acc[layout.region[t]] += std::conj(x[t]) * y[t];
        for (const auto& a : acc)
            total += std::norm(a);
    }
    return total;
}

/// Data-independent + non-coherent data + quasi-coherent terms.
inline double metric_full_ec(std::span<const cf> x, const Observations& ys, const FrameLayout& layout)
{
    detail::check_observations(x, ys, layout, "metric_full_ec");
    const auto c = detail::split_correlations(x, ys, layout);
    double pilot_term = 0.0, data_term = 0.0;
    cf cross{};
    for (std::size_t k = 0; k < c.pilot.size(); ++k) {
        pilot_term += std::norm(c.pilot[k]);
        data_term += std::norm(c.data[k]);
        cross += c.pilot[k] * std::conj(c.data[k]);
    }
    return pilot_term + data_term + 2.0 * cross.real();
}

/// Cross term only: 2 Re sum_i (x_p^H y_i^p)(y_i^d^H x_d). The
/// data-independent term is constant over candidates and left out.
inline double metric_quasi_coherent(std::span<const cf> x, const Observations& ys,
                                    const FrameLayout& layout)
{
    detail::check_observations(x, ys, layout, "metric_quasi_coherent");
    const auto c = detail::split_correlations(x, ys, layout);
    cf cross{};
    for (std::size_t k = 0; k < c.pilot.size(); ++k)
        cross += c.pilot[k] * std::conj(c.data[k]);
    return 2.0 * cross.real();
}

// ---------------------------------------------------------------------------
// LS channel estimation

inline cf ls_channel_estimate(std::span<const cf> y_pilot, std::span<const cf> x_pilot)
{
    if (y_pilot.size() != x_pilot.size())
        throw DimensionError("ls_channel_estimate: pilot length mismatch");
    cf num{};
    double energy = 0.0;
    for (std::size_t k = 0; k < x_pilot.size(); ++k) {
        num += std::conj(x_pilot[k]) * y_pilot[k];
        energy += std::norm(x_pilot[k]);
    }
    if (!(energy > 0.0))
        throw DimensionError("ls_channel_estimate: zero pilot energy");
    return num / energy;
}

/// LS estimate per (antenna, region); `pilots` are the transmitted DMRS
/// values at layout.pilot_positions (including beta). Row-major n_rx x n_regions.
inline std::vector<cf> ls_channel_estimates(const Observations& ys, std::span<const cf> pilots,
                                            const FrameLayout& layout)
{
    if (pilots.size() != layout.n_pilot())
        throw DimensionError("ls_channel_estimates: pilot count mismatch");
    const std::size_t nr = layout.n_regions;
    std::vector<cf> h(ys.size() * nr);
    std::vector<double> energy(nr, 0.0);
    for (std::size_t k = 0; k < pilots.size(); ++k)
        energy[layout.region[layout.pilot_positions[k]]] += std::norm(pilots[k]);
    for (double e : energy)
        if (!(e > 0.0))
            throw DimensionError("ls_channel_estimates: region without pilot energy");
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (ys[i].size() != layout.n_re)
            throw DimensionError("ls_channel_estimates: observation length mismatch");
        for (std::size_t k = 0; k < pilots.size(); ++k) {
            const auto t = layout.pilot_positions[k];
            h[i * nr + layout.region[t]] += std::conj(pilots[k]) * ys[i][t];
        }
        for (std::size_t r = 0; r < nr; ++r)
            h[i * nr + r] /= energy[r];
    }
    return h;
}

// ---------------------------------------------------------------------------
// ML search

enum class MetricKind { Noncoherent, FullEc, QuasiCoherent };

inline MetricKind metric_for(ReceiverKind r)
{
    switch (r) {
    case ReceiverKind::Noncoherent: return MetricKind::Noncoherent;
    case ReceiverKind::FullEc: return MetricKind::FullEc;
    case ReceiverKind::QuasiCoherent: return MetricKind::QuasiCoherent;
    default: throw ConfigError("receiver " + to_string(r) + " is not an ML search");
    }
}

inline ReceiverKind receiver_for(MetricKind m)
{
    switch (m) {
    case MetricKind::Noncoherent: return ReceiverKind::Noncoherent;
    case MetricKind::FullEc: return ReceiverKind::FullEc;
    case MetricKind::QuasiCoherent: return ReceiverKind::QuasiCoherent;
    }
    return ReceiverKind::Noncoherent;
}

struct DetectionResult {
    std::uint64_t message = 0;
    std::vector<double> metrics;
    ReceiverKind receiver = ReceiverKind::Noncoherent;
};

/// Exhaustive argmax over the candidate set; ties go to the smallest
/// message index. For constant-modulus candidates the -||x||^2/N0 term is
/// the same for every hypothesis and is skipped. Otherwise the non-coherent
/// family switches to the unsquared form sum (2/N0)|x^H y_i| - N_R ||x||^2/N0,
/// which needs `n0 > 0`.
inline DetectionResult ml_decode(const Observations& ys, const CandidateSet& cands, MetricKind metric,
                                 double n0 = 0.0)
{
    if (cands.size() == 0)
        throw ConfigError("ml_decode: empty candidate set");
    const FrameLayout& layout = cands.layout;
    for (const auto& y : ys)
        if (y.size() != layout.n_re)
            throw DimensionError("ml_decode: observation length mismatch");
    if (ys.empty())
        throw DimensionError("ml_decode: no observations");
    const bool with_norm = !cands.constant_modulus;
    if (with_norm && metric == MetricKind::QuasiCoherent)
        throw ConfigError("ml_decode: quasi-coherent search assumes constant-modulus candidates");
    if (with_norm && !(n0 > 0.0))
        throw ConfigError("ml_decode: non-constant-modulus candidates need N0 > 0");

    const std::size_t n_rx = ys.size();
    const std::size_t nr = layout.n_regions;
    const std::size_t nd = layout.n_data();

    // Pilot correlations are common to every hypothesis.
    std::vector<cf> pilot_corr(n_rx * nr);
    for (std::size_t i = 0; i < n_rx; ++i)
        for (std::size_t k = 0; k < layout.n_pilot(); ++k) {
            const auto t = layout.pilot_positions[k];
            pilot_corr[i * nr + layout.region[t]] += std::conj(cands.pilots[k]) * ys[i][t];
        }

    DetectionResult res;
    res.receiver = receiver_for(metric);
    res.metrics.resize(cands.size());

    if (metric == MetricKind::QuasiCoherent) {
        // 2 Re sum_{i,r} a_ir conj(b_ir) = 2 Re sum_t x_d[t] w[t] with
        // w[t] = sum_i a_{i,r(t)} conj(y_i[t]).
        std::vector<cf> w(nd);
        for (std::size_t k = 0; k < nd; ++k) {
            const auto t = layout.data_positions[k];
            cf acc{};
            for (std::size_t i = 0; i < n_rx; ++i)
                acc += pilot_corr[i * nr + layout.region[t]] * std::conj(ys[i][t]);
            w[k] = acc;
        }
        for (std::size_t c = 0; c < cands.size(); ++c) {
            const auto& xd = cands.data[c];
            double acc = 0.0;
            for (std::size_t k = 0; k < nd; ++k)
                acc += xd[k].real() * w[k].real() - xd[k].imag() * w[k].imag();
            res.metrics[c] = 2.0 * acc;
        }
    } else {
        std::vector<cf> data_corr(n_rx * nr);
        for (std::size_t c = 0; c < cands.size(); ++c) {
            const auto& xd = cands.data[c];
            std::fill(data_corr.begin(), data_corr.end(), cf{});
            for (std::size_t i = 0; i < n_rx; ++i)
                for (std::size_t k = 0; k < nd; ++k) {
                    const auto t = layout.data_positions[k];
                    data_corr[i * nr + layout.region[t]] += std::conj(xd[k]) * ys[i][t];
                }
            double value = 0.0;
            if (with_norm) {
                double energy = 0.0;
                for (const auto& s : xd)
                    energy += std::norm(s);
                for (const auto& p : cands.pilots)
                    energy += std::norm(p);
                for (std::size_t k = 0; k < data_corr.size(); ++k)
                    value += 2.0 / n0 * std::abs(pilot_corr[k] + data_corr[k]);
                value -= static_cast<double>(n_rx) * energy / n0;
            } else if (metric == MetricKind::Noncoherent) {
                for (std::size_t k = 0; k < data_corr.size(); ++k)
                    value += std::norm(pilot_corr[k] + data_corr[k]);
            } else {
                cf cross{};
                for (std::size_t k = 0; k < data_corr.size(); ++k) {
                    value += std::norm(pilot_corr[k]) + std::norm(data_corr[k]);
                    cross += pilot_corr[k] * std::conj(data_corr[k]);
                }
                value += 2.0 * cross.real();
            }
            res.metrics[c] = value;
        }
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < res.metrics.size(); ++c)
        if (res.metrics[c] > res.metrics[best])
            best = c;
    res.message = best;
    return res;
}

// ---------------------------------------------------------------------------
// Block Hadamard receiver

/// MRC over antennas with per-region LS estimates, soft QPSK demap,
/// descrambling, repetition combining, then one Hadamard decode per RM(1,m)
/// block. `h_est` is row-major n_rx x n_regions. With `naive` set the
/// quadratic correlation path is used instead of the staged transform.
inline BitVector fht_receive(const Observations& ys, const FrameLayout& layout, const FrameConfig& frame,
                             const CodeConfig& code, std::span<const cf> h_est, bool naive = false)
{
    if (code.scheme != CodeScheme::BlockRM1)
        throw ConfigError("fht_receive: code scheme must be block-rm1");
    code.validate();
    const std::size_t n_rx = ys.size();
    const std::size_t nr = layout.n_regions;
    if (n_rx == 0 || h_est.size() != n_rx * nr)
        throw DimensionError("fht_receive: channel estimate shape mismatch");
    const std::size_t nd = layout.n_data();
    if (static_cast<std::size_t>(code.rate_matched_bits) != 2 * nd)
        throw ConfigError("fht_receive: code E does not match the frame");

    std::vector<cf> combined(nd);
    for (std::size_t k = 0; k < nd; ++k) {
        const auto t = layout.data_positions[k];
        cf acc{};
        for (std::size_t i = 0; i < n_rx; ++i)
            acc += std::conj(h_est[i * nr + layout.region[t]]) * ys[i][t];
        combined[k] = acc;
    }
    auto soft = qpsk_soft_demap(combined);
    const auto scr = frame_scrambling_sequence(frame, soft.size());
    const std::size_t mother = code.mother_length();
    std::vector<double> u(mother, 0.0);
    for (std::size_t l = 0; l < soft.size(); ++l)
        u[l % mother] += scr[l] ? -soft[l] : soft[l];

    BitVector out;
    out.reserve(static_cast<std::size_t>(code.payload_bits));
    std::size_t offset = 0;
    for (const auto& b : code.blocks) {
        std::span<const double> block(u.data() + offset, b.length());
        const auto d = naive ? rm1_ht_decode(block) : rm1_fht_decode(block);
        out.insert(out.end(), d.message.begin(), d.message.end());
        offset += b.length();
    }
    return out;
}

} // namespace shortblock
