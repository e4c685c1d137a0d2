// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

#include "fbe/fbe.hpp"
#include "oracle.hpp"

using namespace fbe;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs >= budget_s) {
        o.pass = false;
        o.detail += " [over time budget]";
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d: %s  %s  (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

long long gcd(long long a, long long b) { return b == 0 ? a : gcd(b, a % b); }

Outcome cazac() {
    double worst_mod = 0.0;
    double worst_acf = 0.0;
    bool ok = true;
    int roots = 0;
    for (std::size_t m : {4u, 8u, 16u, 64u}) {
        for (long long r = 1; r < static_cast<long long>(m); ++r) {
            if (gcd(r, static_cast<long long>(m)) != 1) continue;
            ++roots;
            const auto s = chu_sequence(m, r);
            for (const auto& v : s) worst_mod = std::max(worst_mod, std::abs(std::abs(v) - 1.0));
            double acf = 0.0;
            for (std::size_t lag = 1; lag < m; ++lag) acf = std::max(acf, std::abs(oracle::autocorr(s, lag)));
            worst_acf = std::max(worst_acf, acf / static_cast<double>(m));
            ok = ok && acf < 1e-9 * static_cast<double>(m);
        }
    }
    ok = ok && worst_mod <= 1e-12;
    return {ok, std::to_string(roots) + " roots, max ||s|-1| " + fmt("%.2e", worst_mod) + ", max acf/M " +
                    fmt("%.2e", worst_acf)};
}

Outcome power_split() {
    int cases = 0;
    double worst = 0.0;
    for (std::size_t n : {256u, 1024u}) {
        for (int i = 0; i < 10; ++i) {
            const double alpha = 0.1 + 0.8 * i / 9.0;
            SequenceParams p;
            p.n = n;
            p.n_u = n / 16;
            p.n_d = 4;
            p.distinct = n == 256 ? IndexSet{8, 40, 88, 184} : IndexSet{104, 280, 568, 760};
            p.sign_bits = sign_bits_from_index(static_cast<std::uint64_t>(i), 4);
            p.alpha = alpha;
            const auto seq = build_pilots(p);
            const double nd = static_cast<double>(n);
            double ed = 0.0;
            double eu = 0.0;
            double umin = 1e300;
            double umax = 0.0;
            double dmin = 1e300;
            double dmax = 0.0;
            for (auto d : p.distinct) {
                ed += std::norm(seq.freq_pilots[d]);
                dmin = std::min(dmin, std::abs(seq.freq_pilots[d]));
                dmax = std::max(dmax, std::abs(seq.freq_pilots[d]));
            }
            for (auto u : p.uniform()) {
                eu += std::norm(seq.freq_pilots[u]);
                umin = std::min(umin, std::abs(seq.freq_pilots[u]));
                umax = std::max(umax, std::abs(seq.freq_pilots[u]));
            }
            const double total = energy(seq.freq_pilots);
            const double expected_d = std::sqrt(alpha * nd / 4.0);
            const double expected_u = std::sqrt((1.0 - alpha) * 16.0);
            for (double rel : {ed / (alpha * nd) - 1.0, eu / ((1.0 - alpha) * nd) - 1.0, total / nd - 1.0,
                               umax / umin - 1.0, dmax / dmin - 1.0, dmax / expected_d - 1.0,
                               umax / expected_u - 1.0}) {
                worst = std::max(worst, std::abs(rel));
            }
            ++cases;
        }
    }
    return {worst <= 1e-9, std::to_string(cases) + " cases, worst relative deviation " + fmt("%.2e", worst)};
}

Outcome theorem_one() {
    int checked = 0;
    int mismatches = 0;
    for (std::size_t x : {8u, 16u, 32u}) {
        for (std::size_t n_u : {64u, 128u}) {
            for (int i = 0; i <= 10; ++i) {
                const double eps = -0.5 + 0.1 * i;
                ++checked;
                if (optimal_offset(eps, x, n_u) != static_cast<long long>(x / 2)) ++mismatches;
            }
        }
    }
    return {mismatches == 0, std::to_string(checked) + " cases, " + std::to_string(mismatches) + " off X/2"};
}

Outcome papr_scan() {
    std::string detail;
    bool ok = true;
    for (const auto& [alpha, paper_i] : {std::pair{0.3, 16ull}, std::pair{0.5, 241ull}}) {
        SequenceParams p;
        p.alpha = alpha;
        const auto scan = optimize_signs(p, 4);
        const double spread = to_db(scan.max_papr()) - to_db(scan.min_papr());
        ok = ok && scan.papr_by_index.size() == 256 && spread >= 2.5;
        detail += fmt("alpha %.1f: spread %.3f dB, min %.3f dB", alpha, spread, to_db(scan.min_papr())) +
                  ", argmin " + std::to_string(scan.best_index) + " (reference " + std::to_string(paper_i) +
                  (scan.best_index == paper_i ? ", match); " : ", differs; informational); ");
    }
    return {ok, detail};
}

Outcome integer_equivalence() {
    bool ok = true;
    std::string detail;
    struct Case {
        ChannelProfile profile;
        double alpha;
        double eps;
    };
    for (const auto& c : {Case{channel1(), 0.3, 9.279}, Case{channel2(), 0.5, -8.835}}) {
        SequenceParams p;
        p.alpha = c.alpha;
        const auto seq = build_pilots(p);
        const auto pilots = p.pilots();
        TransmissionConfig cfg;
        cfg.epsilon = c.eps;
        cfg.snr_db = 10.0;
        const long long truth = std::llround(c.eps);
        int agree = 0;
        int fast_ok = 0;
        int full_ok = 0;
        constexpr int runs = 500;
        for (int k = 0; k < runs; ++k) {
            auto rng = derive_stream(2024, c.profile.name == "channel1" ? 0 : 1, static_cast<std::uint64_t>(k));
            const auto out = run_single(seq, c.profile, cfg, rng);
            const long long full = integer_cfo_full(out.received.samples, pilots);
            agree += full == out.estimate.integer_part ? 1 : 0;
            fast_ok += out.estimate.integer_part == truth ? 1 : 0;
            full_ok += full == truth ? 1 : 0;
        }
        ok = ok && agree >= 495 && fast_ok >= 490 && full_ok >= 490;
        detail += c.profile.name + ": agree " + std::to_string(agree) + "/500, fast correct " +
                  std::to_string(fast_ok) + ", full correct " + std::to_string(full_ok) + "; ";
    }
    return {ok, detail};
}

ComplexVector periodic_rotated(double eps_f, long long integer, unsigned seed) {
    const auto q = oracle::random_vector(64, seed);
    ComplexVector r(1024);
    for (std::size_t t = 0; t < 1024; ++t) {
        const double cyc = eps_f * static_cast<double>(t) + static_cast<double>(integer) * (64.0 + static_cast<double>(t));
        r[t] = q[t % 64] * std::polar(1.0, 2.0 * oracle::pi * cyc / 1024.0);
    }
    return r;
}

Outcome fractional_exactness() {
    double worst = 0.0;
    for (int i = 0; i < 19; ++i) {
        const double eps_f = -0.45 + 0.05 * i;
        const long long integer = (i % 3) - 1;
        const auto r = periodic_rotated(eps_f, integer, 100u + static_cast<unsigned>(i));
        const auto res = fractional_cfo(forward_dft(r), integer, 64, 16, 64, WeightMode::blue_normalized);
        worst = std::max(worst, std::abs(res.estimate - eps_f));
    }
    const auto v = fractional_cfo(forward_dft(periodic_rotated(0.25, 0, 7)), 0, 64, 16, 64, WeightMode::paper_verbatim);
    const double scale_err = std::abs(v.estimate - 0.25 * 6640.0 / 4080.0);
    return {worst <= 1e-9 && scale_err <= 1e-9,
            fmt("19-point grid max error %.2e; verbatim factor %.6f (target %.6f)", worst, v.estimate / 0.25,
                6640.0 / 4080.0)};
}

Outcome mse_vs_crb() {
    auto s = default_experiment(Scenario::mse_vs_snr, "channel1");
    s.snr_grid_db = {10.0, 15.0, 20.0};
    s.n_runs = 1000;
    s.master_seed = 1;
    const auto rec = run_montecarlo(s);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double gap = to_db(rec[i].mse / rec[i].crb);
        ok = ok && gap <= 10.0 && (i == 0 || rec[i].mse < rec[i - 1].mse);
        detail += fmt("%.0f dB: mse %.3e crb %.3e (+%.2f dB); ", rec[i].snr_db, rec[i].mse, rec[i].crb, gap);
    }
    return {ok, detail};
}

Outcome p_correct_trend() {
    bool ok = true;
    std::string detail;
    for (const std::string ch : {"channel1", "channel2"}) {
        auto s = default_experiment(Scenario::p_correct, ch);
        s.snr_grid_db = {10.0, 15.0};
        s.n_runs = 2000;
        const auto rec = run_montecarlo(s);
        auto find = [&](std::size_t nd, double snr) {
            for (const auto& r : rec) {
                if (r.n_d == nd && r.snr_db == snr) return r.p_correct;
            }
            return -1.0;
        };
        const double p2 = find(2, 10.0);
        const double p8 = find(8, 10.0);
        const double p8_15 = find(8, 15.0);
        ok = ok && p8 > p2 && p8_15 > 0.99;
        detail += ch + fmt(": N_D=2 %.4f, N_D=8 %.4f at 10 dB, N_D=8 %.4f at 15 dB; ", p2, p8, p8_15);
    }
    return {ok, detail};
}

Outcome safe_zone() {
    auto s = default_experiment(Scenario::bias_vs_alpha, "channel1");
    s.snr_grid_db = {10.0};
    s.n_runs = 1000;
    const auto rec = run_montecarlo(s);
    // longest contiguous run of passing alphas
    std::size_t best_lo = 0;
    std::size_t best_len = 0;
    std::size_t lo = 0;
    std::size_t len = 0;
    std::string detail;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const bool good = rec[i].b_i < 0.01 && rec[i].b_f < 0.05;
        detail += fmt("%.1f:", rec[i].alpha) + (good ? "ok " : "x ");
        if (good) {
            if (len == 0) lo = i;
            ++len;
            if (len > best_len) {
                best_len = len;
                best_lo = lo;
            }
        } else {
            len = 0;
        }
    }
    bool ok = false;
    if (best_len > 0) {
        const double a0 = rec[best_lo].alpha;
        const double a1 = rec[best_lo + best_len - 1].alpha;
        ok = a0 <= 0.4 + 1e-12 && a1 >= 0.7 - 1e-12;
        detail = fmt("zone [%.1f, %.1f]; ", a0, a1) + detail;
    }
    return {ok, detail};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "fbe_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<std::string> outputs;
    for (const auto& [scenario, threads] : {std::pair{Scenario::mse_vs_snr, 1u}, std::pair{Scenario::mse_vs_snr, 3u},
                                            std::pair{Scenario::mse_vs_snr, 1u}}) {
        auto s = default_experiment(scenario, "channel2");
        s.snr_grid_db = {10.0, 20.0};
        s.n_runs = 200;
        s.master_seed = 31337;
        s.threads = threads;
        const auto path = dir / ("run" + std::to_string(outputs.size()) + ".csv");
        export_records(run_montecarlo(s), path.string());
        outputs.push_back(slurp(path));
    }
    const bool ok = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    std::filesystem::remove_all(dir);
    return {ok, "serial, parallel(3) and repeated serial outputs " + std::string(ok ? "identical" : "differ")};
}

}  // namespace

int main() {
    criterion(1, 1.0, cazac);
    criterion(2, 1.0, power_split);
    criterion(3, 1.0, theorem_one);
    criterion(4, 30.0, papr_scan);
    criterion(5, 120.0, integer_equivalence);
    criterion(6, 0.0, fractional_exactness);
    criterion(7, 300.0, mse_vs_crb);
    criterion(8, 0.0, p_correct_trend);
    criterion(9, 0.0, safe_zone);
    criterion(10, 0.0, determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
