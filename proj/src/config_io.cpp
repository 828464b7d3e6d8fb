#include "qwalk/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qwalk/errors.hpp"
#include "qwalk/sequence.hpp"

namespace qwalk {

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

double parse_real(const std::string& key, const std::string& value) {
    try {
        const SequenceProgram p = parse("v(" + value + ");");
        if (p.statements.size() != 1 || p.statements[0].args.size() != 1) {
            throw InvalidArgument("expected a single number");
        }
        const double v = evaluate(p.statements[0].args[0], Constants{{"pi", std::numbers::pi}});
        if (!std::isfinite(v)) {
            throw InvalidArgument("value is not finite");
        }
        return v;
    } catch (const Error& e) {
        throw InvalidArgument("bad value for " + key + " ('" + value + "'): " + e.what());
    }
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw InvalidArgument("bad value for " + key + " ('" + value + "'): expected an integer");
    }
    return v;
}

bool is_extra_key(const std::string& key) {
    static const char* const plain[] = {"version", "command", "subcommand", "program", "points", "at_steps",
                                        "noise_list", "mode",    "preset",     "trajectories_total", "bias_k1", "bias_k2"};
    for (const char* k : plain) {
        if (key == k) return true;
    }
    return key.rfind("output.", 0) == 0 || key.rfind("define.", 0) == 0;
}

}  // namespace

void set_config_value(WalkConfig& c, const std::string& key, const std::string& value) {
    auto real = [&] { return parse_real(key, value); };
    auto integer = [&] { return parse_int(key, value); };
    if (key == "steps") c.steps = integer();
    else if (key == "k") c.kick = KickParams::symmetric(real());
    else if (key == "k1") c.kick.k1 = real();
    else if (key == "k2") c.kick.k2 = real();
    else if (key == "k_max") c.k_max = real();
    else if (key == "shift") {
        if (value == "ratchet") c.shift = ShiftKind::ratchet;
        else if (value == "ideal") c.shift = ShiftKind::ideal;
        else throw InvalidArgument("bad value for shift ('" + value + "'): expected ratchet or ideal");
    } else if (key == "shift_q") c.shift_q = integer();
    else if (key == "gate_alpha") c.gate_alpha = real();
    else if (key == "gate_chi") c.gate_chi = real();
    else if (key == "coin_alpha") c.coin_alpha = real();
    else if (key == "coin_chi") c.coin_chi = real();
    else if (key == "rho") {
        if (value == "none") c.rho.reset();
        else c.rho = real();
    } else if (key == "phase_policy") {
        if (value == "compensated") c.phase_policy.mode = GlobalPhasePolicy::Mode::compensated;
        else if (value == "uncompensated") c.phase_policy.mode = GlobalPhasePolicy::Mode::uncompensated;
        else if (value == "explicit") c.phase_policy.mode = GlobalPhasePolicy::Mode::explicit_phase;
        else throw InvalidArgument("bad value for phase_policy ('" + value +
                                   "'): expected compensated, uncompensated or explicit");
    } else if (key == "phi_c") c.phase_policy.phi_c = real();
    else if (key == "tau") c.tau = real();
    else if (key == "noise_fraction") c.noise_fraction = real();
    else if (key == "beta") c.beta = real();
    else if (key == "beta_fwhm") c.beta_fwhm = real();
    else if (key == "thermal_fraction") c.thermal_fraction = real();
    else if (key == "num_beta_samples") c.num_beta_samples = integer();
    else if (key == "num_noise_realizations") c.num_noise_realizations = integer();
    else if (key == "seed") {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw InvalidArgument("bad value for seed ('" + value + "'): expected a non-negative 64-bit integer");
        }
        c.seed = v;
    } else if (key == "grid_half_width") c.grid_half_width = integer();
    else if (key == "initial_components") c.initial_components = integer();
    else if (key == "initial_phase") c.initial_phase = real();
    else throw InvalidArgument("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const WalkConfig& c) {
    const char* policy = c.phase_policy.mode == GlobalPhasePolicy::Mode::compensated     ? "compensated"
                         : c.phase_policy.mode == GlobalPhasePolicy::Mode::uncompensated ? "uncompensated"
                                                                                         : "explicit";
    return {
        {"steps", std::to_string(c.steps)},
        {"k1", format_double(c.kick.k1)},
        {"k2", format_double(c.kick.k2)},
        {"k_max", format_double(c.k_max)},
        {"shift", std::string(to_string(c.shift))},
        {"shift_q", std::to_string(c.shift_q)},
        {"gate_alpha", format_double(c.gate_alpha)},
        {"gate_chi", format_double(c.gate_chi)},
        {"coin_alpha", format_double(c.coin_alpha)},
        {"coin_chi", format_double(c.coin_chi)},
        {"rho", c.rho ? format_double(*c.rho) : std::string("none")},
        {"phase_policy", policy},
        {"phi_c", format_double(c.phase_policy.phi_c)},
        {"tau", format_double(c.tau)},
        {"noise_fraction", format_double(c.noise_fraction)},
        {"beta", format_double(c.beta)},
        {"beta_fwhm", format_double(c.beta_fwhm)},
        {"thermal_fraction", format_double(c.thermal_fraction)},
        {"num_beta_samples", std::to_string(c.num_beta_samples)},
        {"num_noise_realizations", std::to_string(c.num_noise_realizations)},
        {"seed", std::to_string(c.seed)},
        {"grid_half_width", std::to_string(c.grid_half_width)},
        {"initial_components", std::to_string(c.initial_components)},
        {"initial_phase", format_double(c.initial_phase)},
    };
}

RunSettings parse_config(std::string_view text, const std::string& source_name) {
    RunSettings s;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        const std::string where = source_name + ":" + std::to_string(number) + ": ";
        if (eq == std::string::npos) {
            throw InvalidArgument(where + "expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw InvalidArgument(where + "expected 'key = value'");
        }
        if (is_extra_key(key)) {
            s.extras[key] = value;
            continue;
        }
        try {
            set_config_value(s.config, key, value);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(where + e.what());
        }
    }
    return s;
}

RunSettings load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

void write_walk_csv(std::ostream& out, const WalkRecord& record) {
    out << "step,n,P,P_sigma1,P_sigma2\n";
    for (std::size_t j = 0; j < record.steps.size(); ++j) {
        const Distribution& d = record.steps[j].distribution;
        for (std::size_t i = 0; i < d.probabilities.size(); ++i) {
            out << j << ',' << static_cast<int>(i) - d.grid_half_width << ',' << format_double(d.probabilities[i])
                << ',';
            if (d.per_sigma) {
                out << format_double((*d.per_sigma)[0][i]) << ',' << format_double((*d.per_sigma)[1][i]);
            } else {
                out << ',';
            }
            out << '\n';
        }
    }
}

void write_series_csv(std::ostream& out, const WalkRecord& record) {
    out << "step,mean_p,energy,stddev,entropy\n";
    for (std::size_t j = 0; j < record.steps.size(); ++j) {
        const StepRecord& r = record.steps[j];
        out << j << ',' << format_double(r.mean_p) << ',' << format_double(r.energy) << ','
            << format_double(r.stddev) << ',' << format_double(r.entropy) << '\n';
    }
}

void write_scan_csv(std::ostream& out, std::span<const ScanPoint> points) {
    out << "phi_c,step,mean_p\n";
    for (const ScanPoint& p : points) {
        out << format_double(p.phi_c) << ',' << p.step << ',' << format_double(p.mean_p) << '\n';
    }
}

void write_distribution_csv(std::ostream& out, const Distribution& dist) {
    out << "n,P\n";
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
        if (dist.probabilities[i] != 0.0) {
            out << static_cast<int>(i) - dist.grid_half_width << ',' << format_double(dist.probabilities[i]) << '\n';
        }
    }
}

}  // namespace qwalk
