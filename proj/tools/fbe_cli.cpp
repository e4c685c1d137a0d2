// fbe: command-line front end for the training-sequence design, PAPR scan,
// ICI profile, Monte Carlo scenarios, single diagnostic runs and the CRB.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbe/fbe.hpp"

namespace {

constexpr int exit_validation = 2;
constexpr int exit_io = 3;

fbe::Config config_or_default(const std::string& path) {
    return path.empty() ? fbe::Config{} : fbe::load_config(path);
}

std::vector<int> parse_bits(const std::string& s) {
    std::vector<int> bits;
    for (char c : s) {
        if (c != '0' && c != '1') throw fbe::Error(fbe::ErrorKind::invalid_parameter, "sign bits must be 0/1 digits");
        bits.push_back(c - '0');
    }
    return bits;
}

std::string bits_string(const std::vector<int>& bits) {
    std::string s;
    for (int b : bits) s += static_cast<char>('0' + b);
    return s;
}

/// "-" selects stdout.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw fbe::Error(fbe::ErrorKind::io, "cannot open '" + path + "' for writing");
    fn(os);
    if (!os) throw fbe::Error(fbe::ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-domain training sequence and two-stage CFO estimator laboratory"};
    app.require_subcommand(1);

    // design
    std::string cfg_path;
    std::optional<double> alpha;
    std::string signs;
    bool optimize = false;
    std::size_t beta = 4;
    std::size_t threads = 1;
    std::string out_path;

    auto* design = app.add_subcommand("design", "Build and validate a training sequence, write the sequence file");
    design->add_option("--config", cfg_path, "Configuration file (JSON)");
    design->add_option("--alpha", alpha, "Distinctive-pilot power share");
    design->add_option("--signs", signs, "Sign bits i_0..i_{N_D-1}, e.g. 00010000");
    design->add_flag("--optimize-signs", optimize, "Pick the sign vector with minimum PAPR");
    design->add_option("--beta", beta, "Oversampling factor for PAPR")->capture_default_str();
    design->add_option("--out", out_path, "Sequence file to write")->required();

    auto* scan = app.add_subcommand("papr-scan", "PAPR of every sign vector");
    scan->add_option("--config", cfg_path, "Configuration file (JSON)");
    scan->add_option("--alpha", alpha, "Distinctive-pilot power share");
    scan->add_option("--beta", beta, "Oversampling factor")->capture_default_str();
    scan->add_option("--threads", threads, "Worker threads")->capture_default_str();
    scan->add_option("--out", out_path, "Output table (i,papr_linear,papr_db); '-' for stdout")->required();

    std::size_t spacing = 16;
    std::size_t n_u = 64;
    std::vector<double> eps_grid{-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    bool full = false;
    double pilot_power = 1.0;
    auto* ici = app.add_subcommand("ici-profile", "ICI leaked onto the comb versus distinctive-pilot offset");
    ici->add_option("--spacing", spacing, "Comb spacing X")->capture_default_str();
    ici->add_option("--n-u", n_u, "Uniform pilot count N_U")->capture_default_str();
    ici->add_option("--epsilon", eps_grid, "Fractional offsets in [-0.5, 0.5]");
    ici->add_flag("--full", full, "Also emit the absolute ICI power column");
    ici->add_option("--pilot-power", pilot_power, "Distinctive pilot power for --full")->capture_default_str();
    ici->add_option("--out", out_path, "Output table; '-' for stdout")->required();

    std::string scenario;
    std::string channel;
    std::optional<double> epsilon;
    std::vector<double> alphas;
    std::vector<double> snrs;
    std::vector<std::size_t> nds;
    std::optional<double> power_ratio;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> mc_threads;
    std::string weights;
    std::string runs_out;
    auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo scenario and write metric records");
    mc->add_option("--scenario", scenario, "p_correct | bias_vs_alpha | mse_vs_snr | single_shot")->required();
    mc->add_option("--config", cfg_path, "Configuration file (JSON)");
    mc->add_option("--channel", channel, "Channel profile name");
    mc->add_option("--epsilon", epsilon, "Normalized CFO");
    mc->add_option("--alpha", alphas, "Alpha grid");
    mc->add_option("--snr", snrs, "Es/N0 grid in dB");
    mc->add_option("--nd", nds, "N_D grid");
    mc->add_option("--power-ratio", power_ratio, "Hold alpha*N_U/((1-alpha)*N_D) fixed");
    mc->add_option("--runs", runs, "Runs per grid point");
    mc->add_option("--seed", seed, "Master seed");
    mc->add_option("--threads", mc_threads, "Worker threads");
    mc->add_option("--weights", weights, "blue_normalized | paper_verbatim");
    mc->add_option("--out", out_path, "Metric records (CSV); '-' for stdout")->required();
    mc->add_option("--runs-out", runs_out, "Optional per-run dump (CSV)");

    double snr_single = 10.0;
    bool noiseless_flag = false;
    std::uint64_t seed_single = 1;
    std::string seq_path;
    auto* single = app.add_subcommand("single", "One seeded run with full diagnostics");
    single->add_option("--config", cfg_path, "Configuration file (JSON)");
    single->add_option("--sequence", seq_path, "Sequence file from 'design'");
    single->add_option("--channel", channel, "Channel profile name (default channel1)");
    single->add_option("--epsilon", epsilon, "Normalized CFO");
    single->add_option("--alpha", alpha, "Distinctive-pilot power share");
    single->add_option("--snr", snr_single, "Es/N0 in dB")->capture_default_str();
    single->add_flag("--noiseless", noiseless_flag, "Disable noise");
    single->add_option("--seed", seed_single, "Seed")->capture_default_str();
    single->add_option("--weights", weights, "blue_normalized | paper_verbatim");

    std::size_t n_crb = 1024;
    double alpha_crb = 0.3;
    std::vector<double> snr_crb{0, 5, 10, 15, 20, 25, 30};
    auto* crb_cmd = app.add_subcommand("crb", "Cramer-Rao bound table");
    crb_cmd->add_option("--n", n_crb, "Subcarriers")->capture_default_str();
    crb_cmd->add_option("--alpha", alpha_crb, "Distinctive-pilot power share")->capture_default_str();
    crb_cmd->add_option("--snr", snr_crb, "Es/N0 grid in dB");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*design) {
            auto cfg = config_or_default(cfg_path);
            auto p = cfg.sequence;
            if (alpha) p.alpha = *alpha;
            if (!signs.empty()) p.sign_bits = parse_bits(signs);
            if (optimize) p.sign_bits = fbe::optimize_signs(p, beta).best_bits;
            const auto seq = fbe::build_pilots(p);
            const auto peak = fbe::papr(fbe::time_symbol_oversampled(seq, beta));
            std::printf("N=%zu N_D=%zu N_U=%zu X=%zu alpha=%g\n", p.n, p.n_d, p.n_u, p.comb_spacing(), p.alpha);
            std::printf("spacing distinct: %s\n", fbe::validate_spacing(p.distinct, p.n) ? "yes" : "no");
            std::printf("identifiable:     %s\n",
                        fbe::validate_identifiability(p.distinct, p.uniform()) ? "yes" : "no");
            std::printf("sign bits %s (i=%llu), PAPR %.4f dB at beta=%zu\n", bits_string(p.sign_bits).c_str(),
                        static_cast<unsigned long long>(fbe::sign_index(p.sign_bits)), fbe::to_db(peak), beta);
            for (std::size_t k = 0; k < seq.lookup.rows(); ++k) {
                std::printf("lookup[%zu]:", k);
                for (auto v : seq.lookup.row(k)) std::printf(" %lld", v);
                std::printf("\n");
            }
            fbe::save_sequence(seq, out_path);
        } else if (*scan) {
            auto p = config_or_default(cfg_path).sequence;
            if (alpha) p.alpha = *alpha;
            const auto result = fbe::optimize_signs(p, beta, threads);
            with_output(out_path, [&](std::ostream& os) { fbe::write_papr_table(os, result); });
            std::fprintf(stderr, "alpha=%g beta=%zu argmin i=%llu bits=%s min=%.4f dB max=%.4f dB spread=%.4f dB\n",
                         p.alpha, beta, static_cast<unsigned long long>(result.best_index),
                         bits_string(result.best_bits).c_str(), fbe::to_db(result.min_papr()),
                         fbe::to_db(result.max_papr()), fbe::to_db(result.max_papr()) - fbe::to_db(result.min_papr()));
        } else if (*ici) {
            with_output(out_path, [&](std::ostream& os) {
                os << "offset,epsilon,profile" << (full ? ",power" : "") << '\n';
                for (double e : eps_grid) {
                    for (long long v = 1; v < static_cast<long long>(spacing); ++v) {
                        os << v << ',' << fbe::format_real(e) << ','
                           << fbe::format_real(fbe::ici_profile(v, e, spacing, n_u));
                        if (full) os << ',' << fbe::format_real(fbe::ici_power(v, e, spacing, n_u, 1.0, pilot_power));
                        os << '\n';
                    }
                }
            });
            for (double e : eps_grid) {
                std::fprintf(stderr, "epsilon=%+.3f optimal offset=%lld\n", e, fbe::optimal_offset(e, spacing, n_u));
            }
        } else if (*mc) {
            const auto cfg = config_or_default(cfg_path);
            auto spec = fbe::experiment_from_config(cfg, fbe::scenario_from_string(scenario),
                                                    channel.empty() ? std::nullopt : std::optional(channel));
            if (epsilon) spec.epsilon = *epsilon;
            if (!alphas.empty()) {
                spec.alpha_grid = alphas;
                spec.power_ratio.reset();
            }
            if (!snrs.empty()) spec.snr_grid_db = snrs;
            if (!nds.empty()) spec.n_d_grid = nds;
            if (power_ratio) spec.power_ratio = *power_ratio;
            if (runs) spec.n_runs = *runs;
            if (seed) spec.master_seed = *seed;
            if (mc_threads) spec.threads = *mc_threads;
            if (!weights.empty()) spec.weight_mode = fbe::weight_mode_from_string(weights);
            const auto points = fbe::run_montecarlo_detailed(spec);
            std::vector<fbe::MetricRecord> records;
            for (const auto& pt : points) records.push_back(pt.record);
            with_output(out_path, [&](std::ostream& os) { fbe::write_records(os, records); });
            if (!runs_out.empty()) {
                with_output(runs_out, [&](std::ostream& os) { fbe::write_runs(os, points); });
            }
        } else if (*single) {
            const auto cfg = config_or_default(cfg_path);
            const std::string ch = channel.empty() ? "channel1" : channel;
            fbe::TrainingSequence seq;
            if (!seq_path.empty()) {
                seq = fbe::load_sequence(seq_path);
            } else {
                auto p = cfg.sequence;
                if (alpha) p.alpha = *alpha;
                seq = fbe::build_pilots(p);
            }
            fbe::TransmissionConfig tc;
            tc.epsilon = epsilon ? *epsilon : fbe::default_epsilon(ch);
            tc.cp_length = cfg.cp_length;
            tc.snr_db = noiseless_flag ? fbe::noiseless : snr_single;
            tc.seed = seed_single;
            auto rng = fbe::derive_stream(seed_single, 0, 0);
            const auto mode = weights.empty() ? fbe::WeightMode::blue_normalized : fbe::weight_mode_from_string(weights);
            const auto run = fbe::run_single(seq, cfg.channel(ch), tc, rng, mode);
            const auto& e = run.estimate;
            std::printf("channel          %s\n", ch.c_str());
            std::printf("epsilon (true)   %.6f\n", tc.epsilon);
            std::printf("Es/N0            %s\n", noiseless_flag ? "noiseless" : std::to_string(snr_single).c_str());
            std::printf("peak bin zeta    %zu\n", e.peak_bin);
            std::printf("matched row      %zu\n", e.matched_row);
            std::printf("raw shift delta  %lld\n", e.raw_shift);
            std::printf("integer part     %lld\n", e.integer_part);
            std::printf("fractional part  %.6f\n", e.fractional_part);
            std::printf("total            %.6f\n", e.total);
            std::printf("error            %.3e\n", e.total - tc.epsilon);
            std::printf("strongest pilot distinctive: %s\n", run.strongest_is_distinct ? "yes" : "no");
            for (std::size_t m = 0; m < e.phases.size(); ++m) std::printf("phi_%zu  %.6f\n", m + 1, e.phases[m]);
        } else if (*crb_cmd) {
            std::printf("snr_db,crb\n");
            for (double s : snr_crb) {
                std::printf("%s,%s\n", fbe::format_real(s).c_str(),
                            fbe::format_real(fbe::crb(n_crb, alpha_crb, s)).c_str());
            }
        }
    } catch (const fbe::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == fbe::ErrorKind::io ? exit_io : exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
