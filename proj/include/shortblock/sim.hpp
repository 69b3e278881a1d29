#pragma once

// Monte Carlo BLER engine: paired trials, SNR sweeps, Wilson intervals,
// threshold-crossing gap estimates and CSV I/O.

#include "channel.hpp"
#include "common.hpp"
#include "phy_frame.hpp"
#include "receivers.hpp"
#include "rm_codes.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace shortblock {

struct SnrGrid {
    double start = -10.0;
    double stop = 0.0;
    double step = 0.5;

    std::vector<double> points() const
    {
        std::vector<double> out;
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= n; ++k)
            out.push_back(start + static_cast<double>(k) * step);
        return out;
    }
};

struct SimConfig {
    int payload_bits = 4;
    CodeScheme scheme = CodeScheme::Standard32K;
    std::vector<int> block_split; // k_j per block; empty = default split
    FrameConfig frame;
    ChannelConfig channel;
    std::vector<ReceiverKind> receivers{ReceiverKind::Noncoherent, ReceiverKind::QuasiCoherent};
    SnrGrid snr;
    std::uint64_t trials = 100000;
    std::uint64_t error_target = 0; // 0 disables early stopping
    std::uint64_t seed = 1;
    int threads = 0;                // 0 = hardware concurrency

    static constexpr std::uint64_t kMinErrorsForEarlyStop = 50;

    /// Code used by the exhaustive-search receivers.
    CodeConfig search_code() const
    {
        const int e = static_cast<int>(frame.rate_matched_bits());
        return scheme == CodeScheme::Standard32K ? CodeConfig::standard(payload_bits, e)
                                                 : CodeConfig::block(payload_bits, e, split());
    }

    /// Code used by the Hadamard block receivers (always block-rm1).
    CodeConfig block_code() const
    {
        return CodeConfig::block(payload_bits, static_cast<int>(frame.rate_matched_bits()), split());
    }

    bool needs_block_code() const
    {
        return std::any_of(receivers.begin(), receivers.end(), is_block_receiver);
    }
    bool needs_search_code() const
    {
        return std::any_of(receivers.begin(), receivers.end(),
                           [](ReceiverKind r) { return !is_block_receiver(r); });
    }

    std::vector<BlockSpec> split() const
    {
        std::vector<BlockSpec> out;
        for (int k : block_split)
            out.push_back({k, k - 1});
        return out;
    }

    void validate() const
    {
        if (trials < 1)
            throw ConfigError("sim: trials must be >= 1");
        if (!(snr.step > 0.0) || snr.stop < snr.start)
            throw ConfigError("sim: SNR grid needs step > 0 and stop >= start");
        if (receivers.empty())
            throw ConfigError("sim: receiver list is empty");
        frame.validate();
        channel.validate();
        if (needs_search_code())
            search_code().validate();
        if (needs_block_code())
            block_code().validate();
    }
};

// ---------------------------------------------------------------------------
// Per-trial random streams

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Stream for trial `index`; depends only on (seed, index) so results do
/// not depend on scheduling. The SNR is not mixed in, so every SNR point
/// sees the same messages, channels and unit noise.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t index)
{
    return Rng(detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL)));
}

struct TrialOutcome {
    std::uint64_t message = 0;
    std::vector<bool> success;          // aligned with SimConfig::receivers
    std::vector<std::uint64_t> decoded; // decided message per receiver
};

/// Precomputed state for repeated trials of one configuration.
class Simulator {
public:
    explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)), layout_(cfg_.frame)
    {
        cfg_.validate();
        if (cfg_.needs_search_code()) {
            search_code_ = cfg_.search_code();
            candidates_ = build_candidates(*search_code_, cfg_.frame);
        }
        if (cfg_.needs_block_code())
            block_code_ = cfg_.block_code();
        pilots_.reserve(layout_.n_pilot());
        const double g = grid_normalization(cfg_.frame);
        for (const auto& p : generate_dmrs(cfg_.frame))
            pilots_.push_back(g * cfg_.frame.beta * p);
        if (cfg_.channel.model == ChannelModel::TdlC)
            tdlc_.emplace(cfg_.channel, layout_);
    }

    const SimConfig& config() const { return cfg_; }
    const FrameLayout& layout() const { return layout_; }

    TrialOutcome run_trial(double snr_db, std::uint64_t index) const
    {
        return run_trial_sigma2(snr_to_sigma2(snr_db, cfg_.frame), index);
    }

    TrialOutcome run_trial_sigma2(double sigma2, std::uint64_t index) const
    {
        Rng rng = trial_rng(cfg_.seed, index);
        std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << cfg_.payload_bits) - 1);
        TrialOutcome out;
        out.message = pick(rng);
        ChannelRealization ch = tdlc_ ? tdlc_->draw(rng) : draw_los_phase(rng, cfg_.channel, layout_.n_re);
        ch.sigma2 = sigma2;
        const auto noise = draw_unit_noise(rng, ch.n_rx(), layout_.n_re);

        // Same message, channel and noise for both code chains when the
        // search receivers and the block receivers use different codes.
        std::optional<Observations> y_search, y_block;
        if (search_code_)
            y_search = apply_channel(transmit_grid(out.message, *search_code_, cfg_.frame, layout_).symbols, ch, noise);
        if (block_code_) {
            if (search_code_ && search_code_->scheme == CodeScheme::BlockRM1)
                y_block = y_search;
            else
                y_block = apply_channel(transmit_grid(out.message, *block_code_, cfg_.frame, layout_).symbols, ch, noise);
        }

        std::optional<std::vector<cf>> h_est;
        const auto expected = bits_from_uint(out.message, static_cast<std::size_t>(cfg_.payload_bits));
        for (auto r : cfg_.receivers) {
            if (is_block_receiver(r)) {
                if (!h_est)
                    h_est = ls_channel_estimates(*y_block, pilots_, layout_);
                const auto bits = fht_receive(*y_block, layout_, cfg_.frame, *block_code_, *h_est,
                                              r == ReceiverKind::HtBlock);
                out.success.push_back(bits == expected);
                out.decoded.push_back(bits_to_uint(bits));
            } else {
                const auto det = ml_decode(*y_search, *candidates_, metric_for(r), ch.n0());
                out.success.push_back(det.message == out.message);
                out.decoded.push_back(det.message);
            }
        }
        return out;
    }

private:
    SimConfig cfg_;
    FrameLayout layout_;
    std::optional<CodeConfig> search_code_;
    std::optional<CodeConfig> block_code_;
    std::optional<CandidateSet> candidates_;
    std::vector<cf> pilots_;
    std::optional<TdlcGenerator> tdlc_;
};

inline TrialOutcome run_trial(const SimConfig& cfg, double snr_db, std::uint64_t index)
{
    return Simulator(cfg).run_trial(snr_db, index);
}

// ---------------------------------------------------------------------------
// Statistics

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for `errors` out of `trials` (95% by default).
inline Interval wilson_interval(std::uint64_t errors, std::uint64_t trials, double z = 1.959963984540054)
{
    if (trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {errors == 0 ? 0.0 : std::max(0.0, centre - half),
            errors == trials ? 1.0 : std::min(1.0, centre + half)};
}

inline double wilson_half_width(std::uint64_t errors, std::uint64_t trials)
{
    const auto ci = wilson_interval(errors, trials);
    return (ci.hi - ci.lo) / 2.0;
}

struct BlerRow {
    double snr_db = 0.0;
    std::string receiver;
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double bler = 0.0;
    double ci95 = 0.0;

    bool operator==(const BlerRow&) const = default;
};

struct BlerTable {
    std::vector<BlerRow> rows;

    void sort()
    {
        std::stable_sort(rows.begin(), rows.end(), [](const BlerRow& a, const BlerRow& b) {
            return a.receiver != b.receiver ? a.receiver < b.receiver : a.snr_db < b.snr_db;
        });
    }

    std::vector<BlerRow> curve(const std::string& receiver) const
    {
        std::vector<BlerRow> out;
        for (const auto& r : rows)
            if (r.receiver == receiver)
                out.push_back(r);
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });
        return out;
    }
};

inline BlerRow make_row(double snr_db, std::string receiver, std::uint64_t trials, std::uint64_t errors)
{
    BlerRow row{snr_db, std::move(receiver), trials, errors, 0.0, 0.0};
    row.bler = trials ? static_cast<double>(errors) / static_cast<double>(trials) : 0.0;
    row.ci95 = wilson_half_width(errors, trials);
    return row;
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepOptions {
    std::uint64_t batch_size = 1000;
    std::uint64_t batches_per_wave = 16;
};

/// Errors per receiver for trials [first, first + count) at noise variance sigma2.
inline std::vector<std::uint64_t> count_errors(const Simulator& sim, double sigma2, std::uint64_t first,
                                               std::uint64_t count)
{
    std::vector<std::uint64_t> errors(sim.config().receivers.size(), 0);
    for (std::uint64_t n = first; n < first + count; ++n) {
        const auto t = sim.run_trial_sigma2(sigma2, n);
        for (std::size_t r = 0; r < errors.size(); ++r)
            errors[r] += t.success[r] ? 0 : 1;
    }
    return errors;
}

/// BLER per (SNR, receiver). Trials are grouped in fixed batches and the
/// early-stop check runs on batch prefixes in index order, so the table is
/// identical for any thread count.
inline BlerTable run_bler_sweep(const SimConfig& cfg, SweepOptions opt = {})
{
    const Simulator sim(cfg);
    const std::size_t n_rx_kinds = cfg.receivers.size();
    const int threads = cfg.threads > 0 ? cfg.threads
                                        : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    const std::uint64_t target =
        cfg.error_target == 0 ? 0 : std::max(cfg.error_target, SimConfig::kMinErrorsForEarlyStop);
    const std::uint64_t n_batches = (cfg.trials + opt.batch_size - 1) / opt.batch_size;

    BlerTable table;
    for (double snr : cfg.snr.points()) {
        const double sigma2 = snr_to_sigma2(snr, cfg.frame);
        std::vector<std::uint64_t> errors(n_rx_kinds, 0);
        std::uint64_t done = 0;
        bool stop = false;
        for (std::uint64_t wave = 0; wave < n_batches && !stop; wave += opt.batches_per_wave) {
            const std::uint64_t wave_end = std::min(n_batches, wave + opt.batches_per_wave);
            std::vector<std::vector<std::uint64_t>> batch_errors(wave_end - wave);
            std::atomic<std::uint64_t> next{wave};
            auto worker = [&] {
                for (std::uint64_t b; (b = next.fetch_add(1)) < wave_end;) {
                    const std::uint64_t first = b * opt.batch_size;
                    const std::uint64_t count = std::min(opt.batch_size, cfg.trials - first);
                    batch_errors[b - wave] = count_errors(sim, sigma2, first, count);
                }
            };
            if (threads == 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < threads; ++t)
                    pool.emplace_back(worker);
                for (auto& th : pool)
                    th.join();
            }
            for (std::uint64_t b = wave; b < wave_end; ++b) {
                const auto& be = batch_errors[b - wave];
                for (std::size_t r = 0; r < n_rx_kinds; ++r)
                    errors[r] += be[r];
                done += std::min(opt.batch_size, cfg.trials - b * opt.batch_size);
                if (target > 0 && std::all_of(errors.begin(), errors.end(),
                                              [&](std::uint64_t e) { return e >= target; })) {
                    stop = true;
                    break;
                }
            }
        }
        for (std::size_t r = 0; r < n_rx_kinds; ++r)
            table.rows.push_back(make_row(snr, to_string(cfg.receivers[r]), done, errors[r]));
    }
    table.sort();
    return table;
}

// ---------------------------------------------------------------------------
// Gap estimation

struct GapReport {
    std::string receiver_a;
    std::string receiver_b;
    double target_bler = 0.0;
    double snr_a_db = 0.0;
    double snr_b_db = 0.0;
    double gap_db = 0.0;
};

/// First downward crossing of `target`, interpolated linearly in
/// (snr_db, log10 bler). Empty when the sweep does not bracket the target
/// with non-zero BLER on both sides.
inline std::optional<double> snr_at_bler(const std::vector<BlerRow>& curve, double target)
{
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        const auto& p = curve[k];
        const auto& q = curve[k + 1];
        if (p.bler == target)
            return p.snr_db;
        if (p.bler > target && q.bler < target) {
            if (q.bler <= 0.0)
                return std::nullopt;
            const double lp = std::log10(p.bler), lq = std::log10(q.bler), lt = std::log10(target);
            return p.snr_db + (lt - lp) / (lq - lp) * (q.snr_db - p.snr_db);
        }
    }
    if (!curve.empty() && curve.back().bler == target)
        return curve.back().snr_db;
    return std::nullopt;
}

inline GapReport estimate_gap_at_bler(const BlerTable& table, const std::string& receiver_a,
                                      const std::string& receiver_b, double target)
{
    if (!(target > 0.0 && target < 1.0))
        throw RangeError("gap: target BLER must be in (0,1)");
    const auto a = snr_at_bler(table.curve(receiver_a), target);
    const auto b = snr_at_bler(table.curve(receiver_b), target);
    std::string missing;
    if (!a)
        missing += " " + receiver_a;
    if (!b)
        missing += " " + receiver_b;
    if (!missing.empty())
        throw RangeError("gap: target BLER " + std::to_string(target) + " not bracketed for:" + missing);
    return {receiver_a, receiver_b, target, *a, *b, *a - *b};
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view s, const std::string& what)
{
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("csv: bad " + what + " field '" + std::string(s) + "'");
    return v;
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f)
        throw IoError("write to '" + path + "' failed");
}

} // namespace detail

inline constexpr std::string_view kBlerCsvHeader = "snr_db,receiver,trials,errors,bler,ci95";
inline constexpr std::string_view kGapCsvHeader = "pair,target_bler,snr_a_db,snr_b_db,gap_db";

inline std::string to_csv(const BlerTable& table)
{
    std::string out(kBlerCsvHeader);
    out += '\n';
    for (const auto& r : table.rows) {
        out += detail::format_double(r.snr_db) + ',' + r.receiver + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.errors) + ',' + detail::format_double(r.bler) + ',' +
               detail::format_double(r.ci95) + '\n';
    }
    return out;
}

inline std::string to_csv(const std::vector<GapReport>& reports)
{
    std::string out(kGapCsvHeader);
    out += '\n';
    for (const auto& g : reports)
        out += g.receiver_a + '/' + g.receiver_b + ',' + detail::format_double(g.target_bler) + ',' +
               detail::format_double(g.snr_a_db) + ',' + detail::format_double(g.snr_b_db) + ',' +
               detail::format_double(g.gap_db) + '\n';
    return out;
}

inline void emit_csv(const BlerTable& table, const std::string& path) { detail::write_file(path, to_csv(table)); }

inline void emit_csv(const std::vector<GapReport>& reports, const std::string& path)
{
    detail::write_file(path, to_csv(reports));
}

inline BlerTable parse_bler_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kBlerCsvHeader)
        throw IoError("csv: missing header '" + std::string(kBlerCsvHeader) + "'");
    BlerTable table;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 6)
            throw IoError("csv: expected 6 fields in '" + line + "'");
        BlerRow r;
        r.snr_db = detail::parse_number<double>(f[0], "snr_db");
        r.receiver = f[1];
        r.trials = detail::parse_number<std::uint64_t>(f[2], "trials");
        r.errors = detail::parse_number<std::uint64_t>(f[3], "errors");
        r.bler = detail::parse_number<double>(f[4], "bler");
        r.ci95 = detail::parse_number<double>(f[5], "ci95");
        table.rows.push_back(std::move(r));
    }
    return table;
}

inline BlerTable read_bler_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_bler_csv(ss.str());
}

} // namespace shortblock
