#include "qwalk/presets.hpp"

#include <numbers>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

std::vector<Preset> make_presets() {
    std::vector<Preset> out;

    Preset standard;
    standard.name = "standard";
    standard.description = "symmetric ratchet walk, Hadamard gate, compensated coins";
    standard.gate_call = "gate(pi/2, pi);";
    standard.coin_call = "coin(pi/2, -pi/2);";
    out.push_back(standard);

    Preset similar = standard;
    similar.name = "similar-gate";
    similar.description = "gate equal to the coin M(pi/2, -pi/2); drifts from step 3";
    similar.config.gate_chi = -std::numbers::pi / 2;
    similar.gate_call = "gate(pi/2, -pi/2);";
    out.push_back(similar);

    Preset ideal = standard;
    ideal.name = "ideal-shift";
    ideal.description = "Hadamard walk with the ideal +-1 shift";
    ideal.config.shift = ShiftKind::ideal;
    ideal.step_call = "ideal_shift(1);";
    out.push_back(ideal);

    Preset biased_coin = standard;
    biased_coin.name = "biased-coin";
    biased_coin.description = "unequal-superposition gate and coins, rho = 0.7";
    biased_coin.config.rho = 0.7;
    biased_coin.gate_call = "biased_coin(rho, pi);";
    biased_coin.coin_call = "biased_coin(rho, -pi/2);";
    out.push_back(biased_coin);

    Preset biased_ratchet = standard;
    biased_ratchet.name = "biased-ratchet";
    biased_ratchet.description = "unequal kicks k1 = -1.7, k2 = 1.0";
    biased_ratchet.config.kick = {-1.7, 1.0};
    biased_ratchet.step_call = "kick(-1.7, 1.0);";
    out.push_back(biased_ratchet);

    Preset noisy = standard;
    noisy.name = "noisy";
    noisy.description = "20% coin-phase noise, 200 realizations";
    noisy.config.noise_fraction = 0.2;
    noisy.config.num_noise_realizations = 200;
    noisy.config.seed = 1;
    out.push_back(noisy);

    Preset thermal = standard;
    thermal.name = "thermal";
    thermal.description = "quasimomentum FWHM 0.025 with a 7.5% thermal fraction, 200 samples";
    thermal.config.beta_fwhm = 0.025;
    thermal.config.thermal_fraction = 0.075;
    thermal.config.num_beta_samples = 200;
    thermal.config.seed = 1;
    out.push_back(thermal);

    Preset reversed = standard;
    reversed.name = "reversed";
    reversed.description = "8 forward steps undone by the composed reversal";
    reversed.config.steps = 8;
    reversed.reverse = ReverseMode::composed;
    out.push_back(reversed);

    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = make_presets();
    return table;
}

const Preset& find_preset(const std::string& name) {
    for (const Preset& p : presets()) {
        if (p.name == name) {
            return p;
        }
    }
    std::string known;
    for (const Preset& p : presets()) {
        known += (known.empty() ? "" : ", ") + p.name;
    }
    throw InvalidArgument("unknown preset '" + name + "'; known presets: " + known);
}

std::string preset_script(const Preset& preset) {
    std::string s = "# " + preset.description + "\n";
    s += "measure(init);\n";
    const int steps = preset.config.steps;
    if (steps >= 1) {
        s += preset.gate_call + "\n" + preset.step_call + "\nfree(tau);\nmeasure(step);\n";
    }
    if (steps >= 2) {
        s += "repeat " + std::to_string(steps - 1) + " {\n";
        s += "    " + preset.coin_call + "\n    " + preset.step_call + "\n    free(tau);\n    measure(step);\n}\n";
    }
    if (preset.reverse) {
        s += std::string("reverse(") + std::string(to_string(*preset.reverse)) + ");\n";
    }
    return s;
}

WalkRecord run_preset(const Preset& preset, const ExecutionOptions& options) {
    if (preset.reverse) {
        return reverse_walk(preset.config, *preset.reverse, options);
    }
    return preset.config.is_ensemble() ? run_ensemble(preset.config, options) : run_walk(preset.config, options);
}

}  // namespace qwalk
