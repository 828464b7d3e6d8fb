// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/analysis.hpp"
#include "qwalk/cli.hpp"
#include "qwalk/config_io.hpp"
#include "qwalk/operators.hpp"
#include "qwalk/presets.hpp"
#include "qwalk/sequence.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kKickOracleTol = 1e-10;
constexpr double kRatchetTol = 1e-10;
constexpr double kTalbotTol = 1e-12;
constexpr double kQuantumGammaLo = 0.9;
constexpr double kQuantumGammaHi = 1.1;
constexpr double kClassicalGammaLo = 0.4;
constexpr double kClassicalGammaHi = 0.6;
constexpr double kClassicalTv = 0.05;
constexpr int kClassicalTrajectories = 2000;
constexpr int kScanPoints = 64;
constexpr double kScanAmplitude = 0.5;
constexpr double kAsymmetryMin = 0.1;
constexpr double kSymmetryTol = 0.05;
constexpr double kSteeringMin = 2.0;
constexpr double kFidelityTol = 1e-10;
constexpr int kEnsembleTrajectories = 500;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

SpinorState random_state(std::mt19937_64& rng, int half, int support, double beta) {
    std::normal_distribution<double> g;
    SpinorState s(half, beta);
    for (int n = -support; n <= support; ++n) {
        for (Level l : kLevels) {
            s(n, l) = complex{g(rng), g(rng)};
        }
    }
    s.normalize();
    return s;
}

double max_diff(const SpinorState& a, const SpinorState& b) {
    double d = 0.0;
    for (Level l : kLevels) {
        for (std::size_t i = 0; i < a.bins(); ++i) {
            d = std::max(d, std::abs(a.level(l)[i] - b.level(l)[i]));
        }
    }
    return d;
}

bool same_records(const WalkRecord& a, const WalkRecord& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (std::size_t j = 0; j < a.steps.size(); ++j) {
        const StepRecord& x = a.steps[j];
        const StepRecord& y = b.steps[j];
        if (x.mean_p != y.mean_p || x.energy != y.energy || x.stddev != y.stddev || x.entropy != y.entropy ||
            x.distribution.probabilities != y.distribution.probabilities ||
            x.distribution.per_sigma != y.distribution.per_sigma) {
            return false;
        }
    }
    return true;
}

// <p>(j) restricted to j >= 3 changes in one direction.
bool monotone_after_step2(const WalkRecord& r) {
    int sign = 0;
    for (std::size_t j = 4; j < r.steps.size(); ++j) {
        const double d = r.steps[j].mean_p - r.steps[j - 1].mean_p;
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) return false;
        sign = s;
    }
    return true;
}

Outcome criterion1() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double beta = u(rng) - 0.5;
        const SpinorState s = random_state(rng, 45, 5, beta);
        const double k1 = 10.0 * u(rng) - 5.0;
        const double k2 = 10.0 * u(rng) - 5.0;
        const double rho = u(rng);
        const std::vector<SpinorState> outs{
            apply_coin(s, coin_matrix(pi / 2, pi, CoinLabel::gate)),
            apply_coin(s, coin_matrix(pi / 2, -pi / 2)),
            apply_coin(s, coin_matrix(4 * pi * u(rng), 2 * pi * u(rng))),
            apply_coin(s, biased_coin(rho, BiasVariant::pi)),
            apply_coin(s, biased_coin(rho, BiasVariant::minus_half_pi)),
            apply_coin(s, reflection_pulse()),
            apply_kick_bessel(s, KickParams{k1, k2}),
            apply_kick_grid(s, KickParams{k1, k2}),
            apply_free_evolution(s, 4 * pi),
            apply_free_evolution(s, 20 * u(rng)),
            apply_ideal_shift(s, 1 + static_cast<int>(3 * u(rng))),
        };
        for (const SpinorState& o : outs) {
            worst = std::max(worst, std::abs(o.norm_squared() - 1.0));
        }
    }
    return {worst < kNormTol, "max |norm - 1| = " + fmt(worst, 3) + " over 1000 states x 11 operators"};
}

Outcome criterion2() {
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (double k : {0.5, 1.2, 1.45, 1.8, 3.0}) {
        for (int i = 0; i < 100; ++i) {
            const SpinorState s = random_state(rng, 40, 5, 0.0);
            worst = std::max(worst, max_diff(apply_kick_bessel(s, KickParams{-k, k}),
                                             apply_kick_grid(s, KickParams{-k, k})));
        }
    }
    return {worst < kKickOracleTol, "max bin-wise |Bessel - grid| = " + fmt(worst, 3)};
}

Outcome criterion3() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uk(-5.0, 5.0);
    std::uniform_real_distribution<double> uphi(-pi, pi);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double k = uk(rng);
        const double phi = uphi(rng);
        const SpinorState s = new_ratchet_state(2, phi, 0.0, 40);
        const double dp = mean_momentum(apply_kick_bessel(s, KickParams{k, -k})) - mean_momentum(s);
        worst = std::max(worst, std::abs(dp + k * std::sin(phi) / 2));
    }
    const SpinorState s = new_ratchet_state(2, pi / 2, 0.0, 40);
    const double dp = mean_momentum(apply_kick_bessel(s, KickParams{1.45, -1.45})) - mean_momentum(s);
    const bool pass = worst < kRatchetTol && std::abs(dp + 0.725) < kRatchetTol;
    return {pass, "max error " + fmt(worst, 3) + "; k=1.45, phi=pi/2 gives " + format_double(dp)};
}

Outcome criterion4() {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const SpinorState s = random_state(rng, 60, 60, 0.0);
        worst = std::max(worst, max_diff(apply_free_evolution(s, 4 * pi), s));
    }
    return {worst < kTalbotTol, "max |F(4 pi) psi - psi| = " + fmt(worst, 3)};
}

Outcome criterion5() {
    const WalkConfig quantum;
    const ScalingFit qf = fit_scaling(run_walk(quantum));

    WalkConfig noisy;
    noisy.noise_fraction = 1.0;
    noisy.num_noise_realizations = kClassicalTrajectories;
    noisy.seed = 5;
    const WalkRecord nr = run_ensemble(noisy);
    const ScalingFit nf = fit_scaling(nr);

    // The binomial is the classical limit of the +-1 walk; compare it to the
    // fully randomized ideal-shift walk started from |1>|0>.
    WalkConfig ideal = noisy;
    ideal.shift = ShiftKind::ideal;
    ideal.initial_components = 1;
    ideal.steps = 10;
    const WalkRecord ir = run_ensemble(ideal);
    const Distribution& d10 = ir.steps[10].distribution;
    const double tv = total_variation(d10, classical_walk_reference(10, 0.5, d10.grid_half_width));

    // Same distance for the physical kicked walk, for information.
    const Distribution& p10 = nr.steps[10].distribution;
    const Distribution binomial = classical_walk_reference(10, 0.5, p10.grid_half_width);
    const double tv_physical = total_variation(p10, binomial);

    const bool pass = qf.exponent >= kQuantumGammaLo && qf.exponent <= kQuantumGammaHi &&
                      nf.exponent >= kClassicalGammaLo && nf.exponent <= kClassicalGammaHi && tv < kClassicalTv;
    return {pass, "quantum gamma " + fmt(qf.exponent) + ", r=1 gamma " + fmt(nf.exponent) +
                      ", TV(ideal-shift r=1 walk, binomial) at j=10 = " + fmt(tv, 3) +
                      " (kicked walk TV " + fmt(tv_physical, 3) + ", info only)"};
}

Outcome criterion6() {
    const WalkConfig c;
    const double k = 1.45;
    std::vector<double> phis;
    for (int i = 0; i < kScanPoints; ++i) phis.push_back(2 * pi * i / kScanPoints);
    const int at[] = {5};
    const auto scan = scan_coin_phase(c, phis, at);
    const double spacing = 2 * pi / kScanPoints;

    std::vector<double> crossings;
    for (int i = 0; i < kScanPoints; ++i) {
        const double a = scan[static_cast<std::size_t>(i)].mean_p - 0.5;
        const double b = scan[static_cast<std::size_t>((i + 1) % kScanPoints)].mean_p - 0.5;
        if (a == 0.0 || (a < 0) != (b < 0)) {
            crossings.push_back(phis[static_cast<std::size_t>(i)] + spacing * a / (a - b));
        }
    }
    auto circular = [](double x, double y) { return std::abs(std::remainder(x - y, 2 * pi)); };
    auto near = [&](double target) {
        return std::any_of(crossings.begin(), crossings.end(),
                           [&](double x) { return circular(x, target) <= spacing; });
    };
    const double t1 = std::fmod(2 * k, 2 * pi);
    const double t2 = std::fmod(2 * k + pi, 2 * pi);
    const bool crossings_ok = near(t1) && near(t2);

    // Antisymmetric phases sit a quarter period away from the crossings.
    auto p_at = [&](double phi) {
        const double phis1[] = {phi};
        return scan_coin_phase(c, phis1, at)[0].mean_p;
    };
    const double dev_a = std::abs(p_at(t1 + pi / 2) - 0.5);
    const double dev_b = std::abs(p_at(t1 - pi / 2) - 0.5);
    double max_dev = 0.0;
    for (const ScanPoint& p : scan) max_dev = std::max(max_dev, std::abs(p.mean_p - 0.5));
    const bool amplitude_ok = dev_a > kScanAmplitude && dev_b > kScanAmplitude;

    std::string where;
    for (double x : crossings) where += (where.empty() ? "" : ", ") + fmt(x, 4);
    return {crossings_ok && amplitude_ok,
            "crossings at {" + where + "} vs 2k=" + fmt(t1) + ", 2k+pi=" + fmt(t2) +
                (crossings_ok ? " (ok)" : " (missed)") + "; deviation at antisymmetric phases " + fmt(dev_a, 3) +
                " / " + fmt(dev_b, 3) + ", largest on grid " + fmt(max_dev, 3) + ", required > " +
                fmt(kScanAmplitude)};
}

Outcome criterion7() {
    WalkConfig same;
    same.gate_chi = -pi / 2;
    const double d3 = std::abs(run_walk(same).steps[3].mean_p - 0.5);
    double worst = 0.0;
    for (const StepRecord& s : run_walk(WalkConfig{}).steps) worst = std::max(worst, std::abs(s.mean_p - 0.5));
    return {d3 > kAsymmetryMin && worst < kSymmetryTol,
            "gate=coin |<p>(3) - 0.5| = " + fmt(d3, 3) + "; Hadamard gate max |<p> - 0.5| = " + fmt(worst, 3)};
}

Outcome criterion8() {
    WalkConfig bc;
    bc.rho = 0.7;
    WalkConfig br;
    br.kick = {-1.7, 1.0};
    const WalkRecord rbc = run_walk(bc);
    const WalkRecord rbr = run_walk(br);
    double sym = 0.0;
    for (const StepRecord& s : run_walk(WalkConfig{}).steps) sym = std::max(sym, std::abs(s.mean_p - 0.5));
    const double dbc = std::abs(rbc.steps[15].mean_p - 0.5);
    const double dbr = std::abs(rbr.steps[15].mean_p - 0.5);
    const bool mbc = monotone_after_step2(rbc);
    const bool mbr = monotone_after_step2(rbr);
    const bool pass = dbc > kSteeringMin && dbr > kSteeringMin && mbc && mbr && sym < kSymmetryTol;
    return {pass, "biased coin rho=0.7: |<p>(15) - 0.5| = " + fmt(dbc, 3) + (mbc ? " monotone" : " not monotone") +
                      "; biased ratchet: " + fmt(dbr, 3) + (mbr ? " monotone" : " not monotone") +
                      "; symmetric max dev " + fmt(sym, 3) + "; required > " + fmt(kSteeringMin)};
}

Outcome criterion9() {
    WalkConfig c;
    c.steps = 8;
    const WalkRecord a = reverse_walk(c, ReverseMode::adjoint);
    const WalkRecord b = reverse_walk(c, ReverseMode::composed);
    const double fa = fidelity(*a.initial_state, *a.final_state);
    const double fab = fidelity(*a.final_state, *b.final_state);

    WalkConfig e = c;
    e.beta_fwhm = 0.025;
    e.thermal_fraction = 0.075;
    e.num_beta_samples = kEnsembleTrajectories;
    e.seed = 9;
    const WalkRecord er = reverse_walk(e, ReverseMode::composed);
    const double e0 = er.steps.front().energy;
    const double e8 = er.steps[8].energy;
    const double e16 = er.steps.back().energy;
    const bool turns = e8 > er.steps[7].energy && er.steps[9].energy < e8;
    const bool pass = std::abs(fa - 1) < kFidelityTol && std::abs(fab - 1) < kFidelityTol && e16 > e0 && turns;
    return {pass, "adjoint fidelity 1 - " + fmt(1 - fa, 3) + "; composed vs adjoint overlap 1 - " + fmt(1 - fab, 3) +
                      "; ensemble energy " + fmt(e0) + " -> " + fmt(e8) + " -> " + fmt(e16)};
}

Outcome criterion10() {
    auto energy = [](double fwhm) {
        WalkConfig c;
        c.beta_fwhm = fwhm;
        c.num_beta_samples = kEnsembleTrajectories;
        c.seed = 10;
        return (fwhm > 0 ? run_ensemble(c) : run_walk(c)).steps[15].energy;
    };
    const double e0 = energy(0.0);
    const double e25 = energy(0.025);
    const double e40 = energy(0.04);
    return {e40 < e25 && e25 < e0,
            "E(15): beta=0 " + fmt(e0) + ", FWHM 0.025 " + fmt(e25) + ", FWHM 0.04 " + fmt(e40) + " (" +
                std::to_string(kEnsembleTrajectories) + " trajectories)"};
}

Outcome criterion11() {
    std::string mismatched;
    for (const Preset& p : presets()) {
        if (!same_records(run_preset(p), interpret(parse(preset_script(p)), p.config))) {
            mismatched += " " + p.name;
        }
    }
    return {mismatched.empty(), std::to_string(presets().size()) + " presets compared" +
                                    (mismatched.empty() ? "" : "; mismatched:" + mismatched)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion12() {
    const fs::path root = fs::temp_directory_path() / "qwalk-acceptance";
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> runs{
        {"run", "--k", "1.45", "--steps", "15", "--seed", "7"},
        {"run", "--noise", "0.2", "--beta-fwhm", "0.025", "--thermal", "0.075", "--trajectories", "64", "--seed",
         "7", "--threads", "1"},
        {"scan-phase", "--k", "1.45", "--points", "16", "--at-steps", "2,5"},
        {"noise-sweep", "--noise-list", "0.2,1", "--trajectories", "32", "--threads", "1"},
        {"reverse", "--steps", "8", "--mode", "composed"},
    };
    int compared = 0;
    std::string failures;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const fs::path first = root / ("a" + std::to_string(i));
        const fs::path second = root / ("b" + std::to_string(i));
        std::vector<std::string> args = runs[i];
        args.insert(args.end(), {"--out", first.string()});
        std::ostringstream sink;
        if (run_cli(args, sink, sink) != 0) {
            failures += " " + runs[i][0] + "(run)";
            continue;
        }
        const std::vector<std::string> replay{runs[i][0], "--config", (first / "manifest.txt").string(), "--threads",
                                              "4",        "--out",    second.string()};
        if (run_cli(replay, sink, sink) != 0) {
            failures += " " + runs[i][0] + "(replay)";
            continue;
        }
        for (const auto& entry : fs::directory_iterator(first)) {
            const std::string name = entry.path().filename().string();
            if (name == "manifest.txt") continue;
            ++compared;
            if (slurp(entry.path()) != slurp(second / name)) {
                failures += " " + runs[i][0] + "/" + name;
            }
        }
    }
    fs::remove_all(root);
    return {failures.empty() && compared > 0,
            std::to_string(compared) + " output files replayed from manifests with 4 threads" +
                (failures.empty() ? "" : "; differing:" + failures)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"unitarity and normalization", criterion1},
        {"Bessel kick equals angle-grid kick", criterion2},
        {"single-kick ratchet current", criterion3},
        {"Talbot-time free evolution is the identity", criterion4},
        {"ballistic vs diffusive scaling", criterion5},
        {"compensation-phase scan symmetry", criterion6},
        {"gate/coin asymmetry", criterion7},
        {"biased steering", criterion8},
        {"time reversal", criterion9},
        {"quasimomentum dephasing", criterion10},
        {"script and direct runs are bit-identical", criterion11},
        {"manifest replay is byte-identical", criterion12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o{false, ""};
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
