#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qwalk/operators.hpp"
#include "qwalk/state.hpp"

namespace qwalk {

enum class ShiftKind { ratchet, ideal };
enum class ReverseMode { adjoint, composed };

std::string_view to_string(ShiftKind kind) noexcept;
std::string_view to_string(ReverseMode mode) noexcept;

/// Everything needed to reproduce one experiment.
///
/// Defaults describe the standard walk: |k| = 1.45 with |1> kicked by -k,
/// Hadamard gate M(pi/2, pi), coins M(pi/2, -pi/2), compensated phases,
/// ratchet initial state (|0> + i|1>)/sqrt(2), no noise, beta = 0.
struct WalkConfig {
    int steps = 15;
    KickParams kick{};
    double k_max = kDefaultKickCap;
    ShiftKind shift = ShiftKind::ratchet;
    int shift_q = 1;  ///< ideal shift only

    double gate_alpha = std::numbers::pi / 2;
    double gate_chi = std::numbers::pi;
    double coin_alpha = std::numbers::pi / 2;
    double coin_chi = -std::numbers::pi / 2;
    /// When set, the gate is the biased M_rho(pi) and every coin M_rho(-pi/2);
    /// the alpha/chi fields above are ignored.
    std::optional<double> rho;

    GlobalPhasePolicy phase_policy{};
    double tau = 4.0 * std::numbers::pi;

    double noise_fraction = 0.0;  ///< coin-phase noise, uniform over a window of width r * 2 pi
    double beta = 0.0;            ///< single-run quasimomentum and centre of the ensemble draw
    double beta_fwhm = 0.0;
    double thermal_fraction = 0.0;
    int num_beta_samples = 1;
    int num_noise_realizations = 1;
    std::uint64_t seed = 0;

    int grid_half_width = 0;  ///< 0 selects the window automatically
    int initial_components = 2;
    double initial_phase = std::numbers::pi / 2;

    void validate() const;

    CoinMatrix gate_pulse() const;
    CoinMatrix coin_pulse() const;

    std::size_t trajectories() const noexcept;
    /// More than one trajectory or a quasimomentum spread.
    bool is_ensemble() const noexcept;
};

struct ExecutionOptions {
    unsigned threads = 0;  ///< 0 = hardware concurrency; never changes results
};

// Flat pulse program shared by the config-driven engine and the script
// interpreter. Scheduled pulses receive phase compensation and coin noise;
// unscheduled ones (reversal helpers) are applied verbatim.
struct PulseOp {
    CoinMatrix matrix;
    bool scheduled = true;
};
struct KickOp {
    KickParams kick;
};
struct FreeOp {
    double tau = 0.0;
};
struct ShiftOp {
    int q = 1;
};
struct MeasureOp {
    std::string label;
};
struct ReverseOp {
    ReverseMode mode = ReverseMode::adjoint;
};

using Operation = std::variant<PulseOp, KickOp, FreeOp, ShiftOp, MeasureOp, ReverseOp>;

struct Instruction {
    Operation op;
    int origin = -1;  ///< walk step or script statement the instruction came from
};

struct PulseProgram {
    std::vector<Instruction> instructions;
    std::string origin_kind = "step";  ///< how errors name an origin: "step" or "statement"
};

struct StepRecord {
    std::string label;
    Distribution distribution;
    double mean_p = 0.0;
    double energy = 0.0;
    double stddev = 0.0;
    double entropy = 0.0;
};

struct WalkRecord {
    WalkConfig config;
    int grid_half_width = 0;
    std::size_t trajectories = 1;
    std::vector<StepRecord> steps;
    /// Final wavefunction of a single-trajectory run; empty for ensembles.
    std::optional<SpinorState> final_state;
    std::optional<SpinorState> initial_state;
};

/// measure(init), then per step: pulse, kick (or ideal shift), free, measure.
PulseProgram build_program(const WalkConfig& config);

/// Momentum window for a program: the config's explicit value, otherwise
/// 4 + 2 * (kicks executed, reversals included) * (largest minimal kick order).
int resolve_grid(const WalkConfig& config, const PulseProgram& program);

/// Quasimomentum of ensemble trajectory i: with probability thermal_fraction
/// uniform on [0, 1), otherwise Gaussian of the configured FWHM around beta.
/// Wrapped into [-1/2, 1/2).
double draw_quasimomentum(const WalkConfig& config, std::uint64_t trajectory);

/// Coin-phase noise for one pulse: uniform on [-r pi, r pi].
double coin_noise(const WalkConfig& config, std::uint64_t trajectory, std::uint64_t pulse_index);

/// chi_j = chi_base + eps_j for the gate (j = 1) and coins (j = 2..steps).
std::vector<double> coin_phase_schedule(const WalkConfig& config, std::uint64_t trajectory);

/// Runs a pulse program. Single-trajectory runs use beta = config.beta and
/// trajectory index 0; ensembles average config.trajectories() runs.
WalkRecord run_program(const PulseProgram& program, const WalkConfig& config, bool ensemble,
                       const ExecutionOptions& options = {});

WalkRecord run_walk(const WalkConfig& config, const ExecutionOptions& options = {});
WalkRecord run_ensemble(const WalkConfig& config, const ExecutionOptions& options = {});

/// config.steps forward steps followed by their reversal; 2 * steps + 1 records.
/// Composed mode requires k2 = -k1 and refuses otherwise.
WalkRecord reverse_walk(const WalkConfig& config, ReverseMode mode, const ExecutionOptions& options = {});

struct ScanPoint {
    double phi_c = 0.0;
    int step = 0;
    double mean_p = 0.0;
};

/// <p> at the requested steps for each explicit compensation phase.
std::vector<ScanPoint> scan_coin_phase(const WalkConfig& config, std::span<const double> phi_c_values,
                                       std::span<const int> at_steps, const ExecutionOptions& options = {});

/// Galton-board distribution after `steps` +-1 moves, right-move probability
/// step_bias. grid_half_width <= 0 uses max(steps, 1).
Distribution classical_walk_reference(int steps, double step_bias, int grid_half_width = 0);

}  // namespace qwalk
