#include "qwalk/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

#include "qwalk/analysis.hpp"
#include "qwalk/config_io.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/presets.hpp"
#include "qwalk/sequence.hpp"

namespace qwalk {

const char* version() noexcept { return QWALK_VERSION; }

namespace {

namespace fs = std::filesystem;

// Flags shared by every walk-driving subcommand. Unset optionals leave the
// config file (or defaults) alone.
struct WalkFlags {
    std::string config_path;
    std::string preset;
    std::optional<double> k, k1, k2, noise, beta_fwhm, thermal, rho, beta, tau, phi_c;
    std::optional<int> steps, grid, trajectories;
    std::optional<std::uint64_t> seed;
    std::string phase_policy;
    bool ideal_shift = false;
};

struct Common {
    std::string out_dir = "qwalk-out";
    unsigned threads = 0;
};

void add_walk_flags(CLI::App* app, WalkFlags& f) {
    app->add_option("--config", f.config_path, "key = value config file (a manifest works too)");
    app->add_option("--preset", f.preset, "start from a named experiment");
    app->add_option("--k", f.k, "symmetric kick strength: k1 = -k, k2 = k");
    app->add_option("--k1", f.k1, "kick strength on level 1");
    app->add_option("--k2", f.k2, "kick strength on level 2");
    app->add_option("--steps", f.steps, "number of walk steps");
    app->add_option("--seed", f.seed, "seed for all random draws");
    app->add_option("--noise", f.noise, "coin-phase noise fraction r in [0, 1]");
    app->add_option("--beta", f.beta, "quasimomentum (centre of the ensemble draw)");
    app->add_option("--beta-fwhm", f.beta_fwhm, "FWHM of the quasimomentum spread");
    app->add_option("--thermal", f.thermal, "thermal fraction with uniform quasimomentum");
    app->add_option("--rho", f.rho, "biased gate and coins with this diagonal weight");
    app->add_option("--grid", f.grid, "momentum grid half width (0 = automatic)");
    app->add_option("--trajectories", f.trajectories, "ensemble size");
    app->add_option("--tau", f.tau, "free-evolution period");
    app->add_option("--phase-policy", f.phase_policy, "compensated, uncompensated or explicit")
        ->check(CLI::IsMember({"compensated", "uncompensated", "explicit"}));
    app->add_option("--phi-c", f.phi_c, "compensation phase per kick in explicit mode");
    app->add_flag("--ideal-shift", f.ideal_shift, "replace the kick by the ideal +-1 shift");
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out_dir, "output directory");
    app->add_option("--threads", c.threads, "worker threads (results do not depend on it)");
}

RunSettings resolve(const WalkFlags& f) {
    RunSettings s;
    if (!f.config_path.empty()) {
        s = load_config(f.config_path);
    }
    if (!f.preset.empty()) {
        const Preset& p = find_preset(f.preset);
        if (!f.config_path.empty()) {
            throw InvalidArgument("--preset and --config are exclusive");
        }
        s.config = p.config;
    }
    WalkConfig& c = s.config;
    if (f.k) c.kick = KickParams::symmetric(*f.k);
    if (f.k1) c.kick.k1 = *f.k1;
    if (f.k2) c.kick.k2 = *f.k2;
    if (f.steps) c.steps = *f.steps;
    if (f.seed) c.seed = *f.seed;
    if (f.noise) c.noise_fraction = *f.noise;
    if (f.beta) c.beta = *f.beta;
    if (f.beta_fwhm) c.beta_fwhm = *f.beta_fwhm;
    if (f.thermal) c.thermal_fraction = *f.thermal;
    if (f.rho) c.rho = *f.rho;
    if (f.grid) c.grid_half_width = *f.grid;
    if (f.trajectories) {
        c.num_beta_samples = 1;
        c.num_noise_realizations = *f.trajectories;
    }
    if (f.tau) c.tau = *f.tau;
    if (!f.phase_policy.empty()) set_config_value(c, "phase_policy", f.phase_policy);
    if (f.phi_c) c.phase_policy.phi_c = *f.phi_c;
    if (f.ideal_shift) c.shift = ShiftKind::ideal;
    c.validate();
    return s;
}

class Output {
  public:
    Output(const std::string& dir, std::string subcommand, std::string command)
        : dir_(dir), subcommand_(std::move(subcommand)), command_(std::move(command)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw InvalidArgument("cannot create output directory " + dir_.string() + ": " + ec.message());
        }
    }

    void file(const std::string& key, const std::string& name, const std::function<void(std::ostream&)>& write) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) {
            throw InvalidArgument("cannot write " + (dir_ / name).string());
        }
        write(out);
        out.close();
        if (!out) {
            throw InvalidArgument("failed writing " + (dir_ / name).string());
        }
        outputs_.emplace_back("output." + key, name);
    }

    void param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }

    void manifest(const WalkConfig& config, int grid, std::size_t trajectories) {
        std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
        out << "# qwalk run manifest; rerun with: qwalk " << subcommand_ << " --config manifest.txt\n";
        out << "version = " << version() << '\n';
        out << "subcommand = " << subcommand_ << '\n';
        out << "command = " << command_ << '\n';
        WalkConfig resolved = config;
        if (grid > 0) {
            resolved.grid_half_width = grid;
        }
        for (const auto& [k, v] : config_entries(resolved)) {
            out << k << " = " << v << '\n';
        }
        out << "trajectories_total = " << trajectories << '\n';
        for (const auto& [k, v] : params_) {
            out << k << " = " << v << '\n';
        }
        for (const auto& [k, v] : outputs_) {
            out << k << " = " << v << '\n';
        }
        if (!out) {
            throw InvalidArgument("cannot write " + (dir_ / "manifest.txt").string());
        }
    }

    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::string subcommand_;
    std::string command_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

std::vector<double> parse_real_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw InvalidArgument(std::string("bad ") + what + " list '" + text + "': expected comma-separated numbers");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw InvalidArgument(std::string("empty ") + what + " list");
    }
    return values;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> values;
    for (double v : parse_real_list(text, what)) {
        if (v != std::floor(v) || v < 0 || v > 1e6) {
            throw InvalidArgument(std::string("bad ") + what + " list '" + text + "': expected non-negative integers");
        }
        values.push_back(static_cast<int>(v));
    }
    return values;
}

std::string join(const std::vector<std::string>& args) {
    std::string s = "qwalk";
    for (const auto& a : args) {
        s += ' ' + a;
    }
    return s;
}

std::string extra(const RunSettings& s, const std::string& key, const std::string& fallback) {
    const auto it = s.extras.find(key);
    return it == s.extras.end() ? fallback : it->second;
}

void write_record(Output& o, const WalkRecord& rec) {
    o.file("walk", "walk.csv", [&](std::ostream& out) { write_walk_csv(out, rec); });
    o.file("series", "series.csv", [&](std::ostream& out) { write_series_csv(out, rec); });
}

void print_summary(std::ostream& out, const WalkRecord& rec) {
    const StepRecord& last = rec.steps.back();
    out << "records " << rec.steps.size() << ", trajectories " << rec.trajectories << ", grid "
        << rec.grid_half_width << "\nfinal <p> " << format_double(last.mean_p) << ", E "
        << format_double(last.energy) << ", sigma " << format_double(last.stddev) << '\n';
}

struct SelftestCase {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<SelftestCase> selftest_cases() {
    std::vector<SelftestCase> cases;
    {
        SpinorState s = new_ratchet_state(3, 0.7, 0.0, 40);
        s = apply_coin(std::move(s), coin_matrix(std::numbers::pi / 2, 0.3));
        const KickParams k{-1.45, 2.2};
        const SpinorState a = apply_kick_bessel(s, k);
        const SpinorState b = apply_kick_grid(s, k);
        double diff = 0.0;
        for (Level l : kLevels) {
            for (std::size_t i = 0; i < a.bins(); ++i) {
                diff = std::max(diff, std::abs(a.level(l)[i] - b.level(l)[i]));
            }
        }
        cases.push_back({"bessel kick matches angle-grid kick", diff < 1e-10, "max |diff| " + format_double(diff)});
    }
    {
        double worst = 0.0;
        for (double phi : {0.3, std::numbers::pi / 2, 2.0, -1.1}) {
            const SpinorState s = new_ratchet_state(2, phi, 0.0, 30);
            const double k = 1.45;
            const double dp = mean_momentum(apply_kick_bessel(s, KickParams{k, -k})) - mean_momentum(s);
            worst = std::max(worst, std::abs(dp - (-k * std::sin(phi) / 2)));
        }
        cases.push_back({"ratchet current -k sin(phi)/2", worst < 1e-12, "max error " + format_double(worst)});
    }
    for (ReverseMode mode : {ReverseMode::adjoint, ReverseMode::composed}) {
        WalkConfig c;
        c.steps = 8;
        const WalkRecord r = reverse_walk(c, mode);
        const double f = fidelity(*r.initial_state, *r.final_state);
        cases.push_back({std::string(to_string(mode)) + " reversal fidelity", std::abs(f - 1.0) < 1e-10,
                         "fidelity " + format_double(f)});
    }
    return cases;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qwalk: momentum-space quantum walks on a kicked-rotor ratchet"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    Common common;
    WalkFlags flags;

    auto* run = app.add_subcommand("run", "run a walk from a config file and flags");
    add_walk_flags(run, flags);
    add_common(run, common);

    auto* script = app.add_subcommand("script", "run a .qws pulse-sequence program");
    std::string script_path;
    std::vector<std::string> defines;
    script->add_option("program", script_path, "program file (defaults to the config's program key)");
    script->add_option("--define", defines, "name=value constant, overrides script defines")->take_all();
    add_walk_flags(script, flags);
    add_common(script, common);

    auto* scan = app.add_subcommand("scan-phase", "sweep the explicit compensation phase over [0, 2 pi)");
    std::optional<int> points;
    std::string at_steps;
    scan->add_option("--points", points, "number of phases (default 64)");
    scan->add_option("--at-steps", at_steps, "comma-separated steps to record (default 2,5)");
    add_walk_flags(scan, flags);
    add_common(scan, common);

    auto* sweep = app.add_subcommand("noise-sweep", "ensemble walks over a list of noise fractions");
    std::string noise_list;
    sweep->add_option("--noise-list", noise_list, "comma-separated noise fractions (default 0,0.2,0.5,1)");
    add_walk_flags(sweep, flags);
    add_common(sweep, common);

    auto* reverse = app.add_subcommand("reverse", "forward walk followed by its time reversal");
    std::string mode;
    reverse->add_option("--mode", mode, "adjoint or composed (default adjoint)")
        ->check(CLI::IsMember({"adjoint", "composed"}));
    add_walk_flags(reverse, flags);
    add_common(reverse, common);

    auto* bias = app.add_subcommand("bias", "compare the standard, biased-coin and biased-ratchet walks");
    std::optional<double> bias_k1;
    std::optional<double> bias_k2;
    bias->add_option("--bias-k1", bias_k1, "level-1 kick of the biased ratchet (default -1.7)");
    bias->add_option("--bias-k2", bias_k2, "level-2 kick of the biased ratchet (default 1.0)");
    add_walk_flags(bias, flags);
    add_common(bias, common);

    auto* classical = app.add_subcommand("classical", "binomial reference distribution");
    int classical_steps = 15;
    double step_bias = 0.5;
    bool classical_file = false;
    classical->add_option("--steps", classical_steps, "number of steps")->check(CLI::NonNegativeNumber);
    classical->add_option("--bias", step_bias, "probability of a +1 move")->check(CLI::Range(0.0, 1.0));
    classical->add_option("--out", common.out_dir, "output directory")
        ->each([&](const std::string&) { classical_file = true; });

    auto* selftest = app.add_subcommand("selftest", "oracle cross-checks");

    std::vector<std::string> argv_storage{"qwalk"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "qwalk: " << e.what() << "\n";
        return kExitUsage;
    }

    const std::string command = join(args);
    const ExecutionOptions exec{common.threads};
    try {
        if (*classical) {
            const Distribution d = classical_walk_reference(classical_steps, step_bias);
            write_distribution_csv(out, d);
            if (classical_file) {
                Output o(common.out_dir, "classical", command);
                o.file("classical", "classical.csv", [&](std::ostream& s) { write_distribution_csv(s, d); });
            }
            return kExitOk;
        }
        if (*selftest) {
            bool ok = true;
            for (const auto& c : selftest_cases()) {
                out << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
                ok = ok && c.pass;
            }
            return ok ? kExitOk : kExitNumerical;
        }

        RunSettings settings = resolve(flags);
        const WalkConfig& config = settings.config;

        if (*run) {
            Output o(common.out_dir, "run", command);
            const WalkRecord rec = config.is_ensemble() ? run_ensemble(config, exec) : run_walk(config, exec);
            write_record(o, rec);
            o.manifest(config, rec.grid_half_width, rec.trajectories);
            print_summary(out, rec);
            return kExitOk;
        }
        if (*script) {
            fs::path path = script_path;
            if (path.empty()) {
                const std::string from_config = extra(settings, "program", "");
                if (from_config.empty()) {
                    throw InvalidArgument("script needs a program file (argument or 'program' config key)");
                }
                path = fs::path(flags.config_path).parent_path() / from_config;
            }
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                throw InvalidArgument("cannot read program file " + path.string());
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            const std::string source = buf.str();

            InterpretOptions opts;
            opts.execution = exec;
            for (const auto& [key, value] : settings.extras) {
                if (key.rfind("define.", 0) == 0) {
                    opts.overrides[key.substr(7)] = parse_real(key, value);
                }
            }
            for (const std::string& d : defines) {
                const auto eq = d.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw InvalidArgument("--define expects name=value, got '" + d + "'");
                }
                const std::string name = d.substr(0, eq);
                opts.overrides[name] = parse_real("--define " + name, d.substr(eq + 1));
            }
            SequenceProgram program;
            try {
                program = parse(source);
            } catch (const ParseError& e) {
                throw InvalidArgument(path.string() + ":" + e.what());
            }
            const WalkRecord rec = interpret(program, config, opts);
            Output o(common.out_dir, "script", command);
            write_record(o, rec);
            o.file("program", "program.qws", [&](std::ostream& s) { s << source; });
            o.param("program", "program.qws");
            for (const auto& [name, value] : opts.overrides) {
                o.param("define." + name, format_double(value));
            }
            o.manifest(config, rec.grid_half_width, rec.trajectories);
            print_summary(out, rec);
            return kExitOk;
        }
        if (*scan) {
            const int n = points.value_or(std::stoi(extra(settings, "points", "64")));
            if (n < 1) {
                throw InvalidArgument("--points must be >= 1");
            }
            const std::string steps_text = at_steps.empty() ? extra(settings, "at_steps", "2,5") : at_steps;
            const std::vector<int> steps = parse_int_list(steps_text, "step");
            std::vector<double> phis;
            for (int i = 0; i < n; ++i) {
                phis.push_back(2.0 * std::numbers::pi * i / n);
            }
            const auto result = scan_coin_phase(config, phis, steps, exec);
            Output o(common.out_dir, "scan-phase", command);
            o.file("scan", "scan.csv", [&](std::ostream& s) { write_scan_csv(s, result); });
            o.param("points", std::to_string(n));
            o.param("at_steps", steps_text);
            WalkConfig scanned = config;
            scanned.steps = *std::max_element(steps.begin(), steps.end());
            o.manifest(config, resolve_grid(scanned, build_program(scanned)), config.trajectories());
            out << "scanned " << n << " phases at steps " << steps_text << '\n';
            return kExitOk;
        }
        if (*sweep) {
            const std::string list = noise_list.empty() ? extra(settings, "noise_list", "0,0.2,0.5,1") : noise_list;
            const std::vector<double> rs = parse_real_list(list, "noise");
            Output o(common.out_dir, "noise-sweep", command);
            std::ostringstream rows;
            std::ostringstream fits;
            rows << "noise_fraction,step,mean_p,energy,stddev,entropy\n";
            fits << "noise_fraction,gamma,r_squared\n";
            int grid = 0;
            for (double r : rs) {
                WalkConfig c = config;
                c.noise_fraction = r;
                c.validate();
                const WalkRecord rec = run_ensemble(c, exec);
                grid = rec.grid_half_width;
                for (std::size_t j = 0; j < rec.steps.size(); ++j) {
                    const StepRecord& s = rec.steps[j];
                    rows << format_double(r) << ',' << j << ',' << format_double(s.mean_p) << ','
                         << format_double(s.energy) << ',' << format_double(s.stddev) << ','
                         << format_double(s.entropy) << '\n';
                }
                if (rec.steps.size() >= 6) {
                    const ScalingFit f = fit_scaling(rec);
                    fits << format_double(r) << ',' << format_double(f.exponent) << ','
                         << format_double(f.r_squared) << '\n';
                    out << "r = " << format_double(r) << ": gamma " << format_double(f.exponent) << '\n';
                }
            }
            o.file("sweep", "sweep.csv", [&](std::ostream& s) { s << rows.str(); });
            o.file("fits", "sweep_fit.csv", [&](std::ostream& s) { s << fits.str(); });
            o.param("noise_list", list);
            o.manifest(config, grid, config.trajectories());
            return kExitOk;
        }
        if (*reverse) {
            const std::string m = mode.empty() ? extra(settings, "mode", "adjoint") : mode;
            const ReverseMode rm = m == "composed" ? ReverseMode::composed : ReverseMode::adjoint;
            if (m != "composed" && m != "adjoint") {
                throw InvalidArgument("reverse mode must be adjoint or composed, got '" + m + "'");
            }
            const WalkRecord rec = reverse_walk(config, rm, exec);
            Output o(common.out_dir, "reverse", command);
            write_record(o, rec);
            o.param("mode", m);
            o.manifest(config, rec.grid_half_width, rec.trajectories);
            print_summary(out, rec);
            if (rec.initial_state && rec.final_state) {
                out << "fidelity to initial state " << format_double(fidelity(*rec.initial_state, *rec.final_state))
                    << '\n';
            }
            return kExitOk;
        }
        if (*bias) {
            WalkConfig biased_coin_cfg = config;
            if (!biased_coin_cfg.rho) {
                biased_coin_cfg.rho = 0.7;
            }
            WalkConfig biased_ratchet_cfg = config;
            biased_ratchet_cfg.rho.reset();
            const double bk1 = bias_k1 ? *bias_k1 : parse_real("bias_k1", extra(settings, "bias_k1", "-1.7"));
            const double bk2 = bias_k2 ? *bias_k2 : parse_real("bias_k2", extra(settings, "bias_k2", "1.0"));
            biased_ratchet_cfg.kick = {bk1, bk2};
            WalkConfig standard_cfg = config;
            standard_cfg.rho.reset();
            std::ostringstream rows;
            rows << "walk,step,mean_p,energy,stddev,entropy\n";
            int grid = 0;
            for (const auto& [name, c] : {std::pair<std::string, const WalkConfig&>{"standard", standard_cfg},
                                          {"biased_coin", biased_coin_cfg},
                                          {"biased_ratchet", biased_ratchet_cfg}}) {
                c.validate();
                const WalkRecord rec = c.is_ensemble() ? run_ensemble(c, exec) : run_walk(c, exec);
                grid = std::max(grid, rec.grid_half_width);
                for (std::size_t j = 0; j < rec.steps.size(); ++j) {
                    const StepRecord& s = rec.steps[j];
                    rows << name << ',' << j << ',' << format_double(s.mean_p) << ',' << format_double(s.energy)
                         << ',' << format_double(s.stddev) << ',' << format_double(s.entropy) << '\n';
                }
                out << name << ": final <p> " << format_double(rec.steps.back().mean_p) << '\n';
            }
            Output o(common.out_dir, "bias", command);
            o.file("bias", "bias.csv", [&](std::ostream& s) { s << rows.str(); });
            o.param("bias_k1", format_double(bk1));
            o.param("bias_k2", format_double(bk2));
            o.manifest(config, 0, config.trajectories());
            return kExitOk;
        }
    } catch (const NumericalGuardError& e) {
        err << "qwalk: numerical guard: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "qwalk: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace qwalk
