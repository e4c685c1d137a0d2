#pragma once

// JSON documents: the experiment configuration and the training-sequence file.
//
// Sequence file:
//   {
//     "format": "fbe-training-sequence", "version": 1,
//     "params": { "n", "n_d", "n_u", "alpha", "distinct": [...],
//                 "sign_bits": [...], "chu_root", "beta" },
//     "pilots": [[index, real, imag], ...]      // nonzero bins, ascending index
//   }
//
// Configuration (every key optional, defaults in parentheses):
//   {
//     "sequence":   { same keys as "params" above }       (reference design)
//     "cp_length":  64,
//     "channels":   { "<name>": { "tap_delays": [...] | "tap_delays_us": [...],
//                                 "tap_powers_db": [...], "doppler_hz": 0 } },
//     "distinct_sets": { "<N_D>": [...] },
//     "experiment": { "scenario", "channel", "epsilon", "alpha_grid",
//                     "snr_grid_db", "n_d_grid", "power_ratio", "n_runs",
//                     "master_seed", "weight_mode", "threads", "output" }
//   }

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "fbe/harness.hpp"
#include "json.hpp"

namespace fbe {

using json = nlohmann::json;

namespace detail {

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

inline json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_input, "'" + path + "': " + e.what());
    }
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace detail

inline json params_to_json(const SequenceParams& p) {
    return json{{"n", p.n},           {"n_d", p.n_d},        {"n_u", p.n_u},           {"alpha", p.alpha},
                {"distinct", p.distinct}, {"sign_bits", p.sign_bits}, {"chu_root", p.chu_root}, {"beta", p.beta}};
}

/// Missing keys keep the values already in `base`. Changing n_d without
/// sign_bits resets the signs to all zero.
inline SequenceParams params_from_json(const json& j, SequenceParams base = {}) {
    try {
        detail::read_if(j, "n", base.n);
        detail::read_if(j, "n_d", base.n_d);
        detail::read_if(j, "n_u", base.n_u);
        detail::read_if(j, "alpha", base.alpha);
        detail::read_if(j, "distinct", base.distinct);
        detail::read_if(j, "chu_root", base.chu_root);
        detail::read_if(j, "beta", base.beta);
        if (j.contains("sign_bits")) {
            base.sign_bits = j.at("sign_bits").get<std::vector<int>>();
        } else if (base.sign_bits.size() != base.n_d) {
            base.sign_bits.assign(base.n_d, 0);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("sequence parameters: ") + e.what());
    }
    return base;
}

inline json sequence_to_json(const TrainingSequence& seq) {
    json pilots = json::array();
    for (std::size_t k = 0; k < seq.freq_pilots.size(); ++k) {
        const auto v = seq.freq_pilots[k];
        if (v != cplx{}) pilots.push_back(json::array({k, v.real(), v.imag()}));
    }
    return json{{"format", "fbe-training-sequence"}, {"version", 1}, {"params", params_to_json(seq.params)},
                {"pilots", pilots}};
}

/// Rebuilds the sequence from its parameters and checks the stored pilots
/// against it.
inline TrainingSequence sequence_from_json(const json& j, double tolerance = 1e-9) {
    if (j.value("format", "") != "fbe-training-sequence") {
        throw Error(ErrorKind::invalid_input, "not a training-sequence document");
    }
    if (!j.contains("params")) throw Error(ErrorKind::invalid_input, "sequence document has no params");
    auto seq = build_pilots(params_from_json(j.at("params")));
    if (j.contains("pilots")) {
        ComplexVector stored(seq.params.n, cplx{});
        try {
            for (const auto& t : j.at("pilots")) {
                const auto k = t.at(0).get<std::size_t>();
                if (k >= stored.size()) throw Error(ErrorKind::invalid_input, "pilot index out of range");
                stored[k] = {t.at(1).get<double>(), t.at(2).get<double>()};
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::invalid_input, std::string("pilot triples: ") + e.what());
        }
        for (std::size_t k = 0; k < stored.size(); ++k) {
            if (std::abs(stored[k] - seq.freq_pilots[k]) > tolerance) {
                throw Error(ErrorKind::invalid_input,
                            "stored pilot " + std::to_string(k) + " disagrees with the one rebuilt from params");
            }
        }
    }
    return seq;
}

inline void save_sequence(const TrainingSequence& seq, const std::string& path) {
    detail::write_json_file(sequence_to_json(seq), path);
}

inline TrainingSequence load_sequence(const std::string& path) {
    return sequence_from_json(detail::read_json_file(path));
}

inline ChannelProfile profile_from_json(const std::string& name, const json& j) {
    ChannelProfile p;
    p.name = name;
    try {
        if (j.contains("tap_delays_us")) {
            for (double us : j.at("tap_delays_us").get<std::vector<double>>()) {
                p.tap_delays.push_back(static_cast<std::size_t>(std::llround(us / sample_interval_us)));
            }
        } else {
            p.tap_delays = j.at("tap_delays").get<std::vector<std::size_t>>();
        }
        p.tap_powers_db = j.at("tap_powers_db").get<std::vector<double>>();
        p.doppler_hz = j.value("doppler_hz", 0.0);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_input, "channel '" + name + "': " + e.what());
    }
    validate_profile(p);
    return p;
}

/// Everything a configuration file can set.
struct Config {
    SequenceParams sequence;
    std::size_t cp_length = 64;
    std::map<std::string, ChannelProfile> channels{
        {"channel1", channel1()}, {"channel2", channel2()}, {"flat", flat_channel()}};
    std::map<std::size_t, IndexSet> distinct_sets;
    json experiment = json::object();

    ChannelProfile channel(const std::string& name) const {
        const auto it = channels.find(name);
        if (it == channels.end()) throw Error(ErrorKind::invalid_parameter, "unknown channel profile '" + name + "'");
        return it->second;
    }
};

inline Config config_from_json(const json& j) {
    Config c;
    if (j.contains("sequence")) c.sequence = params_from_json(j.at("sequence"));
    try {
        detail::read_if(j, "cp_length", c.cp_length);
        if (j.contains("channels")) {
            for (const auto& [name, body] : j.at("channels").items()) c.channels[name] = profile_from_json(name, body);
        }
        if (j.contains("distinct_sets")) {
            for (const auto& [key, body] : j.at("distinct_sets").items()) {
                c.distinct_sets[static_cast<std::size_t>(std::stoul(key))] = body.get<IndexSet>();
            }
        }
        if (j.contains("experiment")) c.experiment = j.at("experiment");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_input, std::string("configuration: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error(ErrorKind::invalid_input, "configuration: distinct_sets keys must be integers");
    }
    return c;
}

inline Config load_config(const std::string& path) { return config_from_json(detail::read_json_file(path)); }

/// Scenario defaults first, then the configuration's experiment block on top.
inline ExperimentSpec experiment_from_config(const Config& c, std::optional<Scenario> scenario = std::nullopt,
                                             std::optional<std::string> channel = std::nullopt) {
    const json& e = c.experiment;
    const auto sc = scenario ? *scenario : scenario_from_string(e.value("scenario", "mse_vs_snr"));
    const auto ch = channel ? *channel : e.value("channel", std::string("channel1"));
    const bool builtin = ch == "channel1" || ch == "channel2" || ch == "flat";
    ExperimentSpec s = default_experiment(sc, builtin ? ch : "channel1");
    s.channel = c.channel(ch);
    s.epsilon = default_epsilon(ch);
    s.sequence = c.sequence;
    s.cp_length = c.cp_length;
    s.distinct_sets = c.distinct_sets;
    try {
        detail::read_if(e, "epsilon", s.epsilon);
        detail::read_if(e, "alpha_grid", s.alpha_grid);
        detail::read_if(e, "snr_grid_db", s.snr_grid_db);
        detail::read_if(e, "n_d_grid", s.n_d_grid);
        detail::read_if(e, "n_runs", s.n_runs);
        detail::read_if(e, "master_seed", s.master_seed);
        detail::read_if(e, "threads", s.threads);
        detail::read_if(e, "output", s.output_path);
        if (e.contains("power_ratio")) {
            if (e.at("power_ratio").is_null()) {
                s.power_ratio.reset();
            } else {
                s.power_ratio = e.at("power_ratio").get<double>();
            }
        }
        if (e.contains("weight_mode")) s.weight_mode = weight_mode_from_string(e.at("weight_mode").get<std::string>());
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::invalid_input, std::string("experiment: ") + ex.what());
    }
    if (!e.contains("n_d_grid") && sc != Scenario::p_correct) s.n_d_grid = {s.sequence.n_d};
    return s;
}

}  // namespace fbe
