// shortblock: BLER sweeps, gap estimation and a transform benchmark.

#include <shortblock/config_json.hpp>
#include <shortblock/shortblock.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace shortblock;

namespace {

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> receivers;
    std::optional<std::string> snr;
    std::optional<std::uint64_t> trials;
    std::optional<double> beta;
    std::optional<int> antennas;
    std::optional<int> payload;
    std::optional<std::string> channel;
    std::optional<int> threads;
    std::optional<std::uint64_t> error_target;
    bool print_config = false;
};

std::vector<std::string> split_list(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

SnrGrid parse_snr(const std::string& s)
{
    const auto parts = split_list(s, ':');
    if (parts.size() != 3)
        throw ConfigError("--snr expects start:stop:step, got '" + s + "'");
    SnrGrid g;
    try {
        g.start = std::stod(parts[0]);
        g.stop = std::stod(parts[1]);
        g.step = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw ConfigError("--snr: cannot parse '" + s + "'");
    }
    return g;
}

void write_output(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    detail::write_file(path, text);
}

int run_simulate(const SimulateArgs& a)
{
    SimConfig cfg = load_sim_config(a.config);
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.receivers) {
        cfg.receivers.clear();
        for (const auto& r : split_list(*a.receivers, ','))
            cfg.receivers.push_back(parse_receiver(r));
    }
    if (a.snr)
        cfg.snr = parse_snr(*a.snr);
    if (a.trials)
        cfg.trials = *a.trials;
    if (a.beta)
        cfg.frame.beta = *a.beta;
    if (a.antennas)
        cfg.channel.n_rx = *a.antennas;
    if (a.payload)
        cfg.payload_bits = *a.payload;
    if (a.channel)
        cfg.channel.model = parse_channel_model(*a.channel);
    if (a.threads)
        cfg.threads = *a.threads;
    if (a.error_target)
        cfg.error_target = *a.error_target;
    cfg.validate();
    if (a.print_config)
        std::cerr << sim_config_to_json(cfg).dump(2) << "\n";

    const auto t0 = std::chrono::steady_clock::now();
    const auto table = run_bler_sweep(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_output(to_csv(table), a.out);
    std::fprintf(stderr, "%zu rows in %.1f s\n", table.rows.size(), secs);
    return 0;
}

int run_gap(const std::string& in, const std::string& ra, const std::string& rb, double target,
            const std::string& out)
{
    const auto table = read_bler_csv(in);
    const auto report = estimate_gap_at_bler(table, ra, rb, target);
    write_output(to_csv(std::vector<GapReport>{report}), out);
    return 0;
}

int run_codec_bench(int m, int reps, std::uint64_t seed)
{
    if (m < 1 || m > HadamardMatrix::kMaxOrder)
        throw ConfigError("--m must be 1.." + std::to_string(HadamardMatrix::kMaxOrder));
    if (reps < 1)
        throw ConfigError("--reps must be >= 1");
    const std::size_t n = std::size_t{1} << m;
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> inputs(static_cast<std::size_t>(reps), std::vector<double>(n));
    for (auto& v : inputs)
        for (auto& x : v)
            x = gauss(rng);

    using clock = std::chrono::steady_clock;
    double max_diff = 0.0, sink = 0.0;
    std::uint64_t fast_ops = 0, naive_ops = 0;

    auto t0 = clock::now();
    std::vector<CorrelationVector> fast;
    fast.reserve(inputs.size());
    for (const auto& v : inputs)
        fast.push_back(fast_transform(v));
    const double fast_s = std::chrono::duration<double>(clock::now() - t0).count();

    t0 = clock::now();
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const auto slow = naive_transform(inputs[r]);
        for (std::size_t k = 0; k < n; ++k)
            max_diff = std::max(max_diff, std::abs(slow.values[k] - fast[r].values[k]));
        sink += slow.values[0];
        naive_ops = slow.operations;
    }
    const double naive_s = std::chrono::duration<double>(clock::now() - t0).count();
    fast_ops = fast.front().operations;

    std::printf("m,n,fast_ops,naive_ops,fast_us_per_call,naive_us_per_call,max_abs_diff\n");
    std::printf("%d,%zu,%llu,%llu,%.3f,%.3f,%.3g\n", m, n, static_cast<unsigned long long>(fast_ops),
                static_cast<unsigned long long>(naive_ops), 1e6 * fast_s / reps, 1e6 * naive_s / reps,
                max_diff);
    return sink == sink ? 0 : 1; // keep the naive loop observable
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Short-block uplink control link simulator"};
    app.require_subcommand(1);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Run a BLER sweep and write CSV");
    sim->add_option("--config", sa.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", sa.out, "Output CSV (default stdout)");
    sim->add_option("--seed", sa.seed, "Master seed");
    sim->add_option("--receivers", sa.receivers, "Comma-separated receiver list");
    sim->add_option("--snr", sa.snr, "SNR grid start:stop:step in dB");
    sim->add_option("--trials", sa.trials, "Trials per SNR point");
    sim->add_option("--beta", sa.beta, "DMRS amplitude scale");
    sim->add_option("--antennas", sa.antennas, "Receive antennas");
    sim->add_option("--payload", sa.payload, "Payload bits K");
    sim->add_option("--channel", sa.channel, "Channel model")->check(CLI::IsMember({"los", "tdlc"}));
    sim->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
    sim->add_option("--error-target", sa.error_target, "Stop a point after this many errors (floor 50)");
    sim->add_flag("--print-config", sa.print_config, "Echo the effective configuration to stderr");

    std::string gap_in, gap_a, gap_b, gap_out;
    double gap_target = 0.01;
    auto* gap = app.add_subcommand("gap", "SNR gap between two receivers at a target BLER");
    gap->add_option("--in", gap_in, "BLER CSV from simulate")->required()->check(CLI::ExistingFile);
    gap->add_option("--a", gap_a, "Receiver A")->required();
    gap->add_option("--b", gap_b, "Receiver B")->required();
    gap->add_option("--target", gap_target, "Target BLER")->capture_default_str();
    gap->add_option("--out", gap_out, "Output CSV (default stdout)");

    int bench_m = 10, bench_reps = 1000;
    std::uint64_t bench_seed = 1;
    auto* bench = app.add_subcommand("codec-bench", "Fast vs naive Hadamard transform");
    bench->add_option("--m", bench_m, "Transform order (length 2^m)")->capture_default_str();
    bench->add_option("--reps", bench_reps, "Random input vectors")->capture_default_str();
    bench->add_option("--seed", bench_seed, "Input seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            return run_simulate(sa);
        if (*gap)
            return run_gap(gap_in, gap_a, gap_b, gap_target, gap_out);
        if (*bench)
            return run_codec_bench(bench_m, bench_reps, bench_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const RangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
