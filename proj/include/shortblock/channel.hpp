#pragma once

// SIMO channel realizations (unknown-phase LOS, TDL-C NLOS) and the
// received-signal model y_i = h_i x + z_i.

#include "common.hpp"
#include "phy_frame.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string_view>

namespace shortblock {

using Rng = std::mt19937_64;

enum class ChannelModel { LosPhase, TdlC };

inline std::string to_string(ChannelModel m) { return m == ChannelModel::LosPhase ? "los" : "tdlc"; }

inline ChannelModel parse_channel_model(std::string_view s)
{
    if (s == "los")
        return ChannelModel::LosPhase;
    if (s == "tdlc")
        return ChannelModel::TdlC;
    throw ConfigError("unknown channel model '" + std::string(s) + "'");
}

struct ChannelConfig {
    ChannelModel model = ChannelModel::TdlC;
    int n_rx = 2;
    double delay_spread = 300e-9;      // seconds
    double subcarrier_spacing = 30e3;  // Hz
    bool normalize_power = true;

    void validate() const
    {
        if (n_rx < 1 || n_rx > 64)
            throw ConfigError("channel: antenna count must be 1..64");
        if (model == ChannelModel::TdlC && !(delay_spread > 0.0))
            throw ConfigError("channel: TDL-C needs a positive delay spread");
        if (!(subcarrier_spacing > 0.0))
            throw ConfigError("channel: subcarrier spacing must be positive");
    }
};

/// Per-antenna, per-RE gains plus the noise variance per real dimension.
struct ChannelRealization {
    std::vector<std::vector<cf>> gains; // n_rx x N
    double sigma2 = 0.0;

    double n0() const { return 2.0 * sigma2; }
    std::size_t n_rx() const { return gains.size(); }
};

// ---------------------------------------------------------------------------
// Power-delay profile

struct TdlProfile {
    std::vector<double> normalized_delays;
    std::vector<double> powers_db;

    std::size_t taps() const { return normalized_delays.size(); }

    /// Rows of "normalized_delay power_dB"; '#' starts a comment.
    static TdlProfile parse(std::string_view text)
    {
        TdlProfile p;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            std::istringstream fields(line);
            double d = 0.0, pdb = 0.0;
            std::string extra;
            if (!(fields >> d >> pdb) || (fields >> extra) || d < 0.0)
                throw ConfigError("TDL profile: malformed line " + std::to_string(lineno));
            p.normalized_delays.push_back(d);
            p.powers_db.push_back(pdb);
        }
        if (p.taps() == 0)
            throw ConfigError("TDL profile: no taps");
        return p;
    }

    static TdlProfile load(const std::string& path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError("TDL profile: cannot open '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }
};

namespace detail {

// TDL-C (normalized delay, power dB), 24 taps. Same content as data/tdl_c.txt.
inline constexpr std::string_view kTdlcText =
    "0 -4.4\n0.2099 -1.2\n0.2219 -3.5\n0.2329 -5.2\n0.2176 -2.5\n0.6366 0\n"
    "0.6448 -2.2\n0.6560 -3.9\n0.6584 -7.4\n0.7935 -7.1\n0.8213 -10.7\n0.9336 -11.1\n"
    "1.2285 -5.1\n1.3083 -6.8\n2.1704 -8.7\n2.7105 -13.2\n4.2589 -13.9\n4.6003 -13.9\n"
    "5.4902 -15.8\n5.6077 -17.1\n6.3065 -16\n6.6374 -15.7\n7.0427 -21.6\n8.6523 -22.8\n";

} // namespace detail

inline const TdlProfile& tdlc_profile()
{
    static const TdlProfile p = TdlProfile::parse(detail::kTdlcText);
    return p;
}

// ---------------------------------------------------------------------------
// Generators

inline ChannelRealization draw_los_phase(Rng& rng, const ChannelConfig& cfg, std::size_t n_re)
{
    if (cfg.model != ChannelModel::LosPhase)
        throw ConfigError("draw_los_phase: channel model is not los");
    cfg.validate();
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    ChannelRealization ch;
    ch.gains.reserve(cfg.n_rx);
    for (int i = 0; i < cfg.n_rx; ++i)
        ch.gains.emplace_back(n_re, std::polar(1.0, phase(rng)));
    return ch;
}

/// Frequency response of a Rayleigh tapped-delay line sampled at the grid
/// subcarriers. Tap phasors are precomputed; each draw only samples the
/// complex tap amplitudes.
class TdlcGenerator {
public:
    TdlcGenerator(const ChannelConfig& cfg, const FrameLayout& layout,
                  const TdlProfile& profile = tdlc_profile())
        : n_rx_(cfg.n_rx), subcarrier_(layout.subcarrier)
    {
        if (cfg.model != ChannelModel::TdlC)
            throw ConfigError("draw_tdlc: channel model is not tdlc");
        cfg.validate();
        if (profile.taps() == 0)
            throw ConfigError("draw_tdlc: missing power-delay profile");
        const std::size_t taps = profile.taps();
        std::vector<double> lin(taps);
        double total = 0.0;
        for (std::size_t k = 0; k < taps; ++k) {
            lin[k] = std::pow(10.0, profile.powers_db[k] / 10.0);
            total += lin[k];
        }
        tap_std_.resize(taps);
        for (std::size_t k = 0; k < taps; ++k)
            tap_std_[k] = std::sqrt((cfg.normalize_power ? lin[k] / total : lin[k]) / 2.0);

        n_sc_ = 0;
        for (auto sc : subcarrier_)
            n_sc_ = std::max(n_sc_, sc + 1);
        phasor_.resize(taps * n_sc_);
        for (std::size_t k = 0; k < taps; ++k) {
            const double tau = profile.normalized_delays[k] * cfg.delay_spread;
            for (std::size_t s = 0; s < n_sc_; ++s) {
                const double f = static_cast<double>(s) * cfg.subcarrier_spacing;
                phasor_[k * n_sc_ + s] = std::polar(1.0, -2.0 * std::numbers::pi * f * tau);
            }
        }
    }

    ChannelRealization draw(Rng& rng) const
    {
        std::normal_distribution<double> gauss;
        const std::size_t taps = tap_std_.size();
        std::vector<cf> amp(taps);
        std::vector<cf> response(n_sc_);
        ChannelRealization ch;
        ch.gains.resize(static_cast<std::size_t>(n_rx_));
        for (auto& g : ch.gains) {
            for (std::size_t k = 0; k < taps; ++k) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                amp[k] = tap_std_[k] * cf(re, im);
            }
            for (std::size_t s = 0; s < n_sc_; ++s) {
                cf acc{};
                for (std::size_t k = 0; k < taps; ++k)
                    acc += amp[k] * phasor_[k * n_sc_ + s];
                response[s] = acc;
            }
            g.resize(subcarrier_.size());
            for (std::size_t t = 0; t < subcarrier_.size(); ++t)
                g[t] = response[subcarrier_[t]];
        }
        return ch;
    }

private:
    int n_rx_;
    std::vector<std::size_t> subcarrier_; // per RE
    std::size_t n_sc_ = 0;
    std::vector<double> tap_std_;
    std::vector<cf> phasor_; // taps x subcarriers
};

inline ChannelRealization draw_tdlc(Rng& rng, const ChannelConfig& cfg, const FrameLayout& layout)
{
    return TdlcGenerator(cfg, layout).draw(rng);
}

inline ChannelRealization draw_channel(Rng& rng, const ChannelConfig& cfg, const FrameLayout& layout)
{
    return cfg.model == ChannelModel::LosPhase ? draw_los_phase(rng, cfg, layout.n_re)
                                               : draw_tdlc(rng, cfg, layout);
}

/// Standard complex normal samples (unit variance per real dimension),
/// one row per antenna.
inline std::vector<std::vector<cf>> draw_unit_noise(Rng& rng, std::size_t n_rx, std::size_t n)
{
    std::normal_distribution<double> gauss;
    std::vector<std::vector<cf>> z(n_rx, std::vector<cf>(n));
    for (auto& row : z)
        for (auto& v : row) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v = cf(re, im);
        }
    return z;
}

/// y_i[t] = gains[i][t] x[t] + sigma * unit_noise[i][t].
inline std::vector<std::vector<cf>> apply_channel(std::span<const cf> x, const ChannelRealization& ch,
                                                  const std::vector<std::vector<cf>>& unit_noise)
{
    if (unit_noise.size() != ch.n_rx())
        throw DimensionError("apply_channel: noise has wrong antenna count");
    const double s = std::sqrt(ch.sigma2);
    std::vector<std::vector<cf>> ys(ch.n_rx());
    for (std::size_t i = 0; i < ch.n_rx(); ++i) {
        if (ch.gains[i].size() != x.size() || unit_noise[i].size() != x.size())
            throw DimensionError("apply_channel: antenna " + std::to_string(i) + " has " +
                                 std::to_string(ch.gains[i].size()) + " gains for " +
                                 std::to_string(x.size()) + " symbols");
        ys[i].resize(x.size());
        for (std::size_t t = 0; t < x.size(); ++t)
            ys[i][t] = ch.gains[i][t] * x[t] + s * unit_noise[i][t];
    }
    return ys;
}

/// y_i[t] = gains[i][t] x[t] + z with z ~ CN(0, 2 sigma^2), independent
/// across antennas and positions.
inline std::vector<std::vector<cf>> apply_channel(std::span<const cf> x, const ChannelRealization& ch,
                                                  Rng& rng)
{
    return apply_channel(x, ch, draw_unit_noise(rng, ch.n_rx(), x.size()));
}

/// SNR = mean received symbol energy / N0 with a unit-power channel, so
/// sigma^2 = 10^(-snr/10) * Es / 2.
inline double snr_to_sigma2(double snr_db, const FrameConfig& frame)
{
    const double es = frame.normalize_power ? 1.0 : frame.mean_symbol_energy();
    return std::pow(10.0, -snr_db / 10.0) * es / 2.0;
}

} // namespace shortblock
