#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwalk/walk.hpp"

namespace qwalk {

/// A named experiment, available both as a WalkConfig and as a script.
struct Preset {
    std::string name;
    std::string description;
    WalkConfig config;
    std::optional<ReverseMode> reverse;  ///< forward walk followed by this reversal
    std::string gate_call;               ///< script text of the step-1 pulse
    std::string coin_call;               ///< script text of the later pulses
    std::string step_call = "kick(k1, k2);";
};

const std::vector<Preset>& presets();

/// Throws InvalidArgument for an unknown name.
const Preset& find_preset(const std::string& name);

/// Script reproducing preset.config.steps steps of the preset.
std::string preset_script(const Preset& preset);

/// The direct (non-script) run of a preset: run_walk, run_ensemble or reverse_walk.
WalkRecord run_preset(const Preset& preset, const ExecutionOptions& options = {});

}  // namespace qwalk
