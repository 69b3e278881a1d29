#pragma once

// JSON mapping for SimConfig. Every key is optional; missing keys keep the
// SimConfig defaults.
//
// {
//   "payload_bits": 4, "scheme": "standard32k", "block_split": [5, 6],
//   "frame": {"prbs": 2, "symbols": 1, "dmrs_subcarriers": [1, 4, 7, 10],
//             "beta": 1.0, "scrambling": false, "c_init": 0,
//             "dmrs_c_init": 677, "normalize_power": false},
//   "channel": {"model": "tdlc", "antennas": 2, "delay_spread_ns": 300,
//               "subcarrier_spacing_hz": 30000, "normalize_power": true},
//   "receivers": ["noncoherent", "quasi-coherent"],
//   "snr": {"start": -10, "stop": 0, "step": 0.5},
//   "trials": 100000, "error_target": 0, "seed": 1, "threads": 0
// }

#include "sim.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace shortblock {

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out)
{
    if (auto it = j.find(key); it != j.end())
        out = it->get<T>();
}

inline const std::vector<std::string>& known_top_level_keys()
{
    static const std::vector<std::string> keys{
        "payload_bits", "scheme", "block_split", "frame",        "channel", "receivers",
        "snr",          "trials", "error_target", "seed",        "threads"};
    return keys;
}

} // namespace detail

inline SimConfig sim_config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        const auto& known = detail::known_top_level_keys();
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown key '" + key + "'");
    }
    SimConfig c;
    try {
        detail::read_opt(j, "payload_bits", c.payload_bits);
        if (auto it = j.find("scheme"); it != j.end())
            c.scheme = parse_code_scheme(it->get<std::string>());
        detail::read_opt(j, "block_split", c.block_split);
        if (auto it = j.find("frame"); it != j.end()) {
            const auto& f = *it;
            detail::read_opt(f, "prbs", c.frame.prbs);
            detail::read_opt(f, "symbols", c.frame.symbols);
            detail::read_opt(f, "dmrs_subcarriers", c.frame.dmrs_subcarriers);
            detail::read_opt(f, "beta", c.frame.beta);
            detail::read_opt(f, "scrambling", c.frame.scrambling);
            detail::read_opt(f, "c_init", c.frame.c_init);
            detail::read_opt(f, "dmrs_c_init", c.frame.dmrs_c_init);
            detail::read_opt(f, "normalize_power", c.frame.normalize_power);
        }
        if (auto it = j.find("channel"); it != j.end()) {
            const auto& ch = *it;
            if (auto m = ch.find("model"); m != ch.end())
                c.channel.model = parse_channel_model(m->get<std::string>());
            detail::read_opt(ch, "antennas", c.channel.n_rx);
            if (auto d = ch.find("delay_spread_ns"); d != ch.end())
                c.channel.delay_spread = d->get<double>() * 1e-9;
            detail::read_opt(ch, "subcarrier_spacing_hz", c.channel.subcarrier_spacing);
            detail::read_opt(ch, "normalize_power", c.channel.normalize_power);
        }
        if (auto it = j.find("receivers"); it != j.end()) {
            c.receivers.clear();
            for (const auto& r : *it)
                c.receivers.push_back(parse_receiver(r.get<std::string>()));
        }
        if (auto it = j.find("snr"); it != j.end()) {
            detail::read_opt(*it, "start", c.snr.start);
            detail::read_opt(*it, "stop", c.snr.stop);
            detail::read_opt(*it, "step", c.snr.step);
        }
        detail::read_opt(j, "trials", c.trials);
        detail::read_opt(j, "error_target", c.error_target);
        detail::read_opt(j, "seed", c.seed);
        detail::read_opt(j, "threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline nlohmann::json sim_config_to_json(const SimConfig& c)
{
    nlohmann::json receivers = nlohmann::json::array();
    for (auto r : c.receivers)
        receivers.push_back(to_string(r));
    return {
        {"payload_bits", c.payload_bits},
        {"scheme", to_string(c.scheme)},
        {"block_split", c.block_split},
        {"frame",
         {{"prbs", c.frame.prbs},
          {"symbols", c.frame.symbols},
          {"dmrs_subcarriers", c.frame.dmrs_subcarriers},
          {"beta", c.frame.beta},
          {"scrambling", c.frame.scrambling},
          {"c_init", c.frame.c_init},
          {"dmrs_c_init", c.frame.dmrs_c_init},
          {"normalize_power", c.frame.normalize_power}}},
        {"channel",
         {{"model", to_string(c.channel.model)},
          {"antennas", c.channel.n_rx},
          {"delay_spread_ns", c.channel.delay_spread * 1e9},
          {"subcarrier_spacing_hz", c.channel.subcarrier_spacing},
          {"normalize_power", c.channel.normalize_power}}},
        {"receivers", receivers},
        {"snr", {{"start", c.snr.start}, {"stop", c.snr.stop}, {"step", c.snr.step}}},
        {"trials", c.trials},
        {"error_target", c.error_target},
        {"seed", c.seed},
        {"threads", c.threads},
    };
}

inline SimConfig load_sim_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return sim_config_from_json(j);
}

} // namespace shortblock
