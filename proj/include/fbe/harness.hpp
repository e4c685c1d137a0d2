#pragma once

// Monte Carlo driver: grid expansion, per-run simulation, metric aggregation
// and the delimiter-separated record format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fbe/channel.hpp"
#include "fbe/estimator.hpp"
#include "fbe/training.hpp"

namespace fbe {

enum class Scenario { papr_scan, p_correct, bias_vs_alpha, mse_vs_snr, single_shot };

inline std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::papr_scan: return "papr_scan";
        case Scenario::p_correct: return "p_correct";
        case Scenario::bias_vs_alpha: return "bias_vs_alpha";
        case Scenario::mse_vs_snr: return "mse_vs_snr";
        case Scenario::single_shot: return "single_shot";
    }
    return "unknown";
}

inline Scenario scenario_from_string(std::string_view s) {
    for (auto sc : {Scenario::papr_scan, Scenario::p_correct, Scenario::bias_vs_alpha, Scenario::mse_vs_snr,
                    Scenario::single_shot}) {
        if (to_string(sc) == s) return sc;
    }
    throw Error(ErrorKind::invalid_parameter, "unknown scenario '" + std::string(s) + "'");
}

/// Reference CFO used with each built-in channel.
inline double default_epsilon(const std::string& channel) { return channel == "channel2" ? -8.835 : 9.279; }

struct ExperimentSpec {
    Scenario scenario = Scenario::mse_vs_snr;
    ChannelProfile channel = channel1();
    double epsilon = 9.279;
    std::vector<double> alpha_grid{0.3};
    std::vector<double> snr_grid_db{5.0, 10.0, 15.0, 20.0};
    std::vector<std::size_t> n_d_grid{8};
    // When set, alpha is derived per N_D so that alpha*N_U / ((1-alpha)*N_D) equals this ratio.
    std::optional<double> power_ratio;
    std::size_t n_runs = 1000;
    std::uint64_t master_seed = 1;
    WeightMode weight_mode = WeightMode::blue_normalized;
    std::size_t threads = 1;
    std::size_t cp_length = 64;
    SequenceParams sequence;
    // Explicit distinctive sets for N_D values other than sequence.n_d.
    std::map<std::size_t, IndexSet> distinct_sets;
    std::string output_path;
};

/// Scenario defaults. Fields the caller already set explicitly should be
/// re-applied afterwards.
inline ExperimentSpec default_experiment(Scenario scenario, const std::string& channel = "channel1") {
    ExperimentSpec s;
    s.scenario = scenario;
    s.channel = builtin_profile(channel);
    s.epsilon = default_epsilon(channel);
    const double alpha = channel == "channel2" ? 0.5 : 0.3;
    switch (scenario) {
        case Scenario::mse_vs_snr:
            s.alpha_grid = {alpha};
            s.snr_grid_db = {5.0, 10.0, 15.0, 20.0};
            s.n_runs = 1000;
            break;
        case Scenario::p_correct:
            s.n_d_grid = {2, 4, 8};
            s.power_ratio = 8.0;
            s.snr_grid_db = {5.0, 10.0, 15.0};
            s.n_runs = 2000;
            break;
        case Scenario::bias_vs_alpha:
            s.alpha_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
            s.snr_grid_db = {5.0, 10.0, 15.0};
            s.n_runs = 1000;
            break;
        case Scenario::single_shot:
            s.alpha_grid = {alpha};
            s.snr_grid_db = {10.0};
            s.n_runs = 1;
            break;
        case Scenario::papr_scan:
            s.alpha_grid = {0.3, 0.5};
            s.n_runs = 1;
            break;
    }
    return s;
}

inline void validate_experiment(const ExperimentSpec& s) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::invalid_parameter, m); };
    if (s.n_runs < 1) fail("n_runs must be >= 1");
    if (s.snr_grid_db.empty()) fail("SNR grid is empty");
    if (s.n_d_grid.empty()) fail("N_D grid is empty");
    if (!s.power_ratio && s.alpha_grid.empty()) fail("alpha grid is empty");
    if (s.power_ratio && !(*s.power_ratio > 0.0)) fail("power ratio must be positive");
    validate_profile(s.channel, s.cp_length);
}

/// Evenly strided subset of `base` with `count` entries.
inline IndexSet strided_subset(const IndexSet& base, std::size_t count) {
    if (count == 0 || count > base.size()) {
        throw Error(ErrorKind::invalid_parameter, "cannot take " + std::to_string(count) + " of " +
                                                      std::to_string(base.size()) + " distinctive indices");
    }
    IndexSet out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = base[k * base.size() / count];
    return out;
}

inline double alpha_for_ratio(double ratio, std::size_t n_d, std::size_t n_u) {
    const double r = ratio * static_cast<double>(n_d);
    return r / (static_cast<double>(n_u) + r);
}

struct GridPoint {
    std::size_t n_d = 0;
    double alpha = 0.0;
    double snr_db = 0.0;
};

/// Grid order: N_D outermost, then alpha, then SNR. The position in this list
/// is the point index fed to derive_stream.
inline std::vector<GridPoint> expand_grid(const ExperimentSpec& s) {
    std::vector<GridPoint> out;
    for (auto nd : s.n_d_grid) {
        std::vector<double> alphas = s.power_ratio
                                         ? std::vector<double>{alpha_for_ratio(*s.power_ratio, nd, s.sequence.n_u)}
                                         : s.alpha_grid;
        for (double a : alphas) {
            for (double snr : s.snr_grid_db) out.push_back({nd, a, snr});
        }
    }
    return out;
}

inline SequenceParams params_for_point(const ExperimentSpec& s, const GridPoint& g) {
    SequenceParams p = s.sequence;
    p.alpha = g.alpha;
    if (g.n_d != p.n_d) {
        if (auto it = s.distinct_sets.find(g.n_d); it != s.distinct_sets.end()) {
            p.distinct = it->second;
        } else {
            p.distinct = strided_subset(s.sequence.distinct, g.n_d);
        }
        p.n_d = g.n_d;
        p.sign_bits.assign(g.n_d, 0);
    }
    return p;
}

struct SingleRun {
    CfoEstimate estimate;
    ReceivedSymbol received;
    bool strongest_is_distinct = false;
};

/// One channel draw, one transmission, one estimate. The channel is drawn
/// before the noise from the same stream.
inline SingleRun run_single(const TrainingSequence& seq, const ChannelProfile& profile, const TransmissionConfig& cfg,
                            Rng& rng, WeightMode mode = WeightMode::blue_normalized) {
    SingleRun out;
    const auto h = draw_channel(profile, rng);
    out.received = transmit(seq.time_symbol, h, cfg, rng);
    const auto spectrum = forward_dft(out.received.samples);
    out.estimate = estimate_spectrum(spectrum, seq, cfg.cp_length, mode);
    const auto shift = static_cast<long long>(std::round(cfg.epsilon));
    out.strongest_is_distinct = correct_probability_indicator(spectrum, seq.params.pilots(), seq.params.distinct, shift);
    return out;
}

struct RunOutcome {
    long long integer_part = 0;
    double fractional_part = 0.0;
    double total = 0.0;
    bool strongest_is_distinct = false;
};

struct MetricRecord {
    std::string scenario;
    std::string channel;
    std::size_t n_d = 0;
    double alpha = 0.0;
    double snr_db = 0.0;
    double epsilon = 0.0;
    std::size_t n_runs = 0;
    std::uint64_t seed = 0;
    double b_i = 0.0;
    double b_f = 0.0;
    double mse = 0.0;
    double p_correct = 0.0;
    double crb = 0.0;

    bool operator==(const MetricRecord&) const = default;
};

/// Averages in run-index order, so the result is independent of how the runs
/// were scheduled.
inline MetricRecord aggregate(const std::vector<RunOutcome>& runs, double epsilon) {
    const double rounded = std::round(epsilon);
    const double frac = epsilon - rounded;
    MetricRecord m;
    double correct = 0.0;
    for (const auto& r : runs) {
        m.b_i += std::abs(static_cast<double>(r.integer_part) - rounded);
        m.b_f += std::abs(r.fractional_part - frac);
        m.mse += (r.total - epsilon) * (r.total - epsilon);
        correct += r.strongest_is_distinct ? 1.0 : 0.0;
    }
    const double n = static_cast<double>(runs.size());
    m.b_i /= n;
    m.b_f /= n;
    m.mse /= n;
    m.p_correct = correct / n;
    m.n_runs = runs.size();
    return m;
}

/// Runs every run of one grid point; run k always uses derive_stream(master, point, k).
inline std::vector<RunOutcome> simulate_point(const ExperimentSpec& s, std::size_t point_index, const GridPoint& g) {
    const auto seq = build_pilots(params_for_point(s, g));
    TransmissionConfig cfg;
    cfg.epsilon = s.epsilon;
    cfg.cp_length = s.cp_length;
    cfg.snr_db = g.snr_db;
    cfg.seed = s.master_seed;

    std::vector<RunOutcome> runs(s.n_runs);
    auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t k = first; k < last; ++k) {
            auto rng = derive_stream(s.master_seed, point_index, k);
            const auto one = run_single(seq, s.channel, cfg, rng, s.weight_mode);
            runs[k] = {one.estimate.integer_part, one.estimate.fractional_part, one.estimate.total,
                       one.strongest_is_distinct};
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(s.threads, 1, s.n_runs);
    if (workers == 1) {
        work(0, s.n_runs);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (s.n_runs + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t first = w * chunk;
            const std::size_t last = std::min(s.n_runs, first + chunk);
            if (first < last) pool.emplace_back(work, first, last);
        }
    }
    return runs;
}

struct PointResult {
    MetricRecord record;
    std::vector<RunOutcome> runs;
};

inline std::vector<PointResult> run_montecarlo_detailed(const ExperimentSpec& s) {
    validate_experiment(s);
    if (s.scenario == Scenario::papr_scan) {
        throw Error(ErrorKind::invalid_parameter, "papr_scan is not a Monte Carlo scenario; use the PAPR scan");
    }
    const auto grid = expand_grid(s);
    std::vector<PointResult> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        PointResult pr;
        pr.runs = simulate_point(s, i, grid[i]);
        pr.record = aggregate(pr.runs, s.epsilon);
        pr.record.scenario = std::string(to_string(s.scenario));
        pr.record.channel = s.channel.name;
        pr.record.n_d = grid[i].n_d;
        pr.record.alpha = grid[i].alpha;
        pr.record.snr_db = grid[i].snr_db;
        pr.record.epsilon = s.epsilon;
        pr.record.seed = s.master_seed;
        pr.record.crb = crb(s.sequence.n, grid[i].alpha, grid[i].snr_db);
        out.push_back(std::move(pr));
    }
    return out;
}

inline std::vector<MetricRecord> run_montecarlo(const ExperimentSpec& s) {
    std::vector<MetricRecord> out;
    for (auto& pr : run_montecarlo_detailed(s)) out.push_back(std::move(pr.record));
    return out;
}

// ---------------------------------------------------------------------------
// Delimiter-separated output. Comma separated, one header line, reals printed
// with 17 significant digits so parsing recovers every bit.

inline constexpr std::string_view record_header =
    "scenario,channel,n_d,alpha,snr_db,epsilon,n_runs,seed,b_i,b_f,mse,p_correct,crb";

inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_records(std::ostream& os, const std::vector<MetricRecord>& records) {
    os << record_header << '\n';
    for (const auto& r : records) {
        os << r.scenario << ',' << r.channel << ',' << r.n_d << ',' << format_real(r.alpha) << ','
           << format_real(r.snr_db) << ',' << format_real(r.epsilon) << ',' << r.n_runs << ',' << r.seed << ','
           << format_real(r.b_i) << ',' << format_real(r.b_f) << ',' << format_real(r.mse) << ','
           << format_real(r.p_correct) << ',' << format_real(r.crb) << '\n';
    }
}

inline void export_records(const std::vector<MetricRecord>& records, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    write_records(os, records);
    if (!os) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string& s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::invalid_input, "malformed number '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline std::vector<MetricRecord> read_records(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != record_header) {
        throw Error(ErrorKind::invalid_input, "missing or unexpected record header");
    }
    std::vector<MetricRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 13) throw Error(ErrorKind::invalid_input, "record has " + std::to_string(f.size()) + " fields");
        MetricRecord r;
        r.scenario = f[0];
        r.channel = f[1];
        r.n_d = detail::parse_number<std::size_t>(f[2]);
        r.alpha = detail::parse_number<double>(f[3]);
        r.snr_db = detail::parse_number<double>(f[4]);
        r.epsilon = detail::parse_number<double>(f[5]);
        r.n_runs = detail::parse_number<std::size_t>(f[6]);
        r.seed = detail::parse_number<std::uint64_t>(f[7]);
        r.b_i = detail::parse_number<double>(f[8]);
        r.b_f = detail::parse_number<double>(f[9]);
        r.mse = detail::parse_number<double>(f[10]);
        r.p_correct = detail::parse_number<double>(f[11]);
        r.crb = detail::parse_number<double>(f[12]);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<MetricRecord> import_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    return read_records(is);
}

/// Per-run dump: point, run, integer, fractional, total, strongest_is_distinct.
inline void write_runs(std::ostream& os, const std::vector<PointResult>& points) {
    os << "point,run,integer_part,fractional_part,total,strongest_is_distinct\n";
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t k = 0; k < points[p].runs.size(); ++k) {
            const auto& r = points[p].runs[k];
            os << p << ',' << k << ',' << r.integer_part << ',' << format_real(r.fractional_part) << ','
               << format_real(r.total) << ',' << (r.strongest_is_distinct ? 1 : 0) << '\n';
        }
    }
}

/// PAPR scan table: i, papr_linear, papr_db.
inline void write_papr_table(std::ostream& os, const SignSearchResult& scan) {
    os << "i,papr_linear,papr_db\n";
    for (std::size_t i = 0; i < scan.papr_by_index.size(); ++i) {
        os << i << ',' << format_real(scan.papr_by_index[i]) << ',' << format_real(to_db(scan.papr_by_index[i]))
           << '\n';
    }
}

}  // namespace fbe
