#include "qwalk/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "qwalk/bessel.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/rng.hpp"

namespace qwalk {

std::string_view to_string(ShiftKind kind) noexcept {
    return kind == ShiftKind::ideal ? "ideal" : "ratchet";
}

std::string_view to_string(ReverseMode mode) noexcept {
    return mode == ReverseMode::composed ? "composed" : "adjoint";
}

namespace {

template <class T>
void require_range(const char* name, T value, T lo, T hi) {
    if (!(value >= lo && value <= hi)) {
        throw InvalidArgument(std::string(name) + " = " + std::to_string(value) + " outside [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    }
}

}  // namespace

void WalkConfig::validate() const {
    if (steps < 0) {
        throw InvalidArgument("steps must be non-negative, got " + std::to_string(steps));
    }
    if (shift == ShiftKind::ratchet) {
        validate_kick(kick, k_max);
    } else if (shift_q < 1) {
        throw InvalidArgument("ideal shift q must be positive, got " + std::to_string(shift_q));
    }
    if (rho) {
        require_range("rho", *rho, 0.0, 1.0);
    }
    for (double v : {gate_alpha, gate_chi, coin_alpha, coin_chi, tau, phase_policy.phi_c, initial_phase}) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("pulse angles, tau and phases must be finite");
        }
    }
    require_range("noise_fraction", noise_fraction, 0.0, 1.0);
    require_range("thermal_fraction", thermal_fraction, 0.0, 1.0);
    if (!(beta_fwhm >= 0.0) || !std::isfinite(beta_fwhm)) {
        throw InvalidArgument("beta_fwhm must be a finite non-negative number");
    }
    if (!std::isfinite(beta) || std::abs(beta) >= 1.0) {
        throw InvalidArgument("beta must satisfy |beta| < 1, got " + std::to_string(beta));
    }
    if (num_beta_samples < 1 || num_noise_realizations < 1) {
        throw InvalidArgument("zero trajectories: num_beta_samples and num_noise_realizations must be >= 1");
    }
    if (grid_half_width < 0) {
        throw InvalidArgument("grid_half_width must be >= 0 (0 = automatic)");
    }
    if (initial_components < 1) {
        throw InvalidArgument("initial state needs at least one momentum component");
    }
    if (grid_half_width > 0 && grid_half_width < initial_components) {
        throw InvalidArgument("grid half width " + std::to_string(grid_half_width) + " too small for " +
                              std::to_string(initial_components) + " components");
    }
}

CoinMatrix WalkConfig::gate_pulse() const {
    if (rho) {
        CoinMatrix m = biased_coin(*rho, BiasVariant::pi);
        m.label = CoinLabel::biased_gate;
        return m;
    }
    return coin_matrix(gate_alpha, gate_chi, CoinLabel::gate);
}

CoinMatrix WalkConfig::coin_pulse() const {
    if (rho) {
        return biased_coin(*rho, BiasVariant::minus_half_pi);
    }
    return coin_matrix(coin_alpha, coin_chi, CoinLabel::coin);
}

std::size_t WalkConfig::trajectories() const noexcept {
    return static_cast<std::size_t>(std::max(num_beta_samples, 1)) *
           static_cast<std::size_t>(std::max(num_noise_realizations, 1));
}

bool WalkConfig::is_ensemble() const noexcept {
    return trajectories() > 1 || beta_fwhm > 0.0 || thermal_fraction > 0.0;
}

PulseProgram build_program(const WalkConfig& config) {
    PulseProgram program;
    program.instructions.push_back({MeasureOp{"init"}, 0});
    const CoinMatrix gate = config.gate_pulse();
    const CoinMatrix coin = config.coin_pulse();
    for (int j = 1; j <= config.steps; ++j) {
        program.instructions.push_back({PulseOp{j == 1 ? gate : coin, true}, j});
        if (config.shift == ShiftKind::ideal) {
            program.instructions.push_back({ShiftOp{config.shift_q}, j});
        } else {
            program.instructions.push_back({KickOp{config.kick}, j});
        }
        program.instructions.push_back({FreeOp{config.tau}, j});
        program.instructions.push_back({MeasureOp{std::to_string(j)}, j});
    }
    return program;
}

int resolve_grid(const WalkConfig& config, const PulseProgram& program) {
    if (config.grid_half_width > 0) {
        return config.grid_half_width;
    }
    long long executed = 0;
    long long since_reverse = 0;
    int widest = 0;
    for (const Instruction& ins : program.instructions) {
        if (const auto* k = std::get_if<KickOp>(&ins.op)) {
            ++executed;
            ++since_reverse;
            widest = std::max({widest, minimal_kick_order(k->kick.k1), minimal_kick_order(k->kick.k2)});
        } else if (const auto* s = std::get_if<ShiftOp>(&ins.op)) {
            ++executed;
            ++since_reverse;
            widest = std::max(widest, std::abs(s->q));
        } else if (std::holds_alternative<ReverseOp>(ins.op)) {
            executed += since_reverse;
            since_reverse = 0;
        }
    }
    const long long n = 4 + 2 * executed * widest;
    if (n > 1'000'000) {
        throw InvalidArgument("automatic momentum grid of half width " + std::to_string(n) +
                              " is too large; set grid_half_width explicitly");
    }
    return std::max(static_cast<int>(n), config.initial_components);
}

double draw_quasimomentum(const WalkConfig& config, std::uint64_t trajectory) {
    const CounterRng rng(config.seed, Stream::quasimomentum, trajectory);
    double b = config.beta;
    if (config.thermal_fraction > 0.0 && rng.uniform(0) < config.thermal_fraction) {
        b = rng.uniform(1);
    } else if (config.beta_fwhm > 0.0) {
        const double sigma = config.beta_fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
        b = config.beta + sigma * rng.normal(1);
    } else {
        return b;
    }
    b -= std::floor(b + 0.5);
    return b;
}

double coin_noise(const WalkConfig& config, std::uint64_t trajectory, std::uint64_t pulse_index) {
    if (config.noise_fraction <= 0.0) {
        return 0.0;
    }
    const CounterRng rng(config.seed, Stream::coin_noise, trajectory);
    return config.noise_fraction * std::numbers::pi * (2.0 * rng.uniform(pulse_index) - 1.0);
}

std::vector<double> coin_phase_schedule(const WalkConfig& config, std::uint64_t trajectory) {
    std::vector<double> chis;
    chis.reserve(static_cast<std::size_t>(std::max(config.steps, 0)));
    for (int j = 1; j <= config.steps; ++j) {
        double base = 0.0;
        if (config.rho) {
            base = j == 1 ? std::numbers::pi : -std::numbers::pi / 2;
        } else {
            base = j == 1 ? config.gate_chi : config.coin_chi;
        }
        chis.push_back(base + coin_noise(config, trajectory, static_cast<std::uint64_t>(j - 1)));
    }
    return chis;
}

namespace {

// Observables of one measurement on one trajectory.
struct Snapshot {
    std::string label;
    std::array<std::vector<double>, 2> per_sigma;
    double beta = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double entropy = 0.0;
};

struct TrajectoryResult {
    std::vector<Snapshot> snapshots;
    std::optional<SpinorState> initial;
    std::optional<SpinorState> final;
};

// One operator actually applied to the state, as needed for reversal.
struct Applied {
    enum class Kind { pulse, kick, free, shift } kind;
    CoinMatrix matrix{};
    KickParams kick{};
    double tau = 0.0;
    int q = 0;
};

Snapshot measure(const SpinorState& state, const std::string& label) {
    Snapshot s;
    s.label = label;
    s.beta = state.beta();
    const std::size_t bins = state.bins();
    const int half = state.grid_half_width();
    for (Level l : kLevels) {
        const auto a = state.level(l);
        auto& p = s.per_sigma[static_cast<std::size_t>(l)];
        p.resize(bins);
        for (std::size_t i = 0; i < bins; ++i) {
            p[i] = std::norm(a[i]);
        }
    }
    for (std::size_t i = 0; i < bins; ++i) {
        const double prob = s.per_sigma[0][i] + s.per_sigma[1][i];
        const double p = static_cast<double>(static_cast<int>(i) - half) + s.beta;
        s.m1 += p * prob;
        s.m2 += p * p * prob;
    }
    s.entropy = coin_entropy(state);
    return s;
}

class Executor {
  public:
    Executor(const PulseProgram& program, const WalkConfig& config, int grid, std::uint64_t trajectory, double beta)
        : program_(program),
          config_(config),
          trajectory_(trajectory),
          state_(new_ratchet_state(config.initial_components, config.initial_phase, beta, grid)) {}

    TrajectoryResult run(bool keep_states) {
        TrajectoryResult result;
        if (keep_states) {
            result.initial = state_;
        }
        for (const Instruction& ins : program_.instructions) {
            try {
                std::visit([&](const auto& op) { execute(op, result); }, ins.op);
            } catch (const GridLeakageError& e) {
                throw GridLeakageError(where(ins) + e.what());
            } catch (const TruncationError& e) {
                throw TruncationError(where(ins) + e.what());
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(where(ins) + e.what());
            }
        }
        if (keep_states) {
            result.final = state_;
        }
        return result;
    }

  private:
    std::string where(const Instruction& ins) const {
        return ins.origin >= 0 ? program_.origin_kind + " " + std::to_string(ins.origin) + ": " : std::string{};
    }

    void apply_pulse(const CoinMatrix& m) {
        state_ = apply_coin(std::move(state_), m);
        history_.push_back({Applied::Kind::pulse, m});
    }

    void apply_kick(const KickParams& k) {
        state_ = apply_kick_bessel(std::move(state_), k);
        Applied a{Applied::Kind::kick};
        a.kick = k;
        history_.push_back(a);
    }

    void apply_free(double tau) {
        state_ = apply_free_evolution(std::move(state_), tau);
        Applied a{Applied::Kind::free};
        a.tau = tau;
        history_.push_back(a);
    }

    void apply_shift(int q) {
        state_ = apply_ideal_shift(std::move(state_), q);
        check_grid_leakage(state_);
        Applied a{Applied::Kind::shift};
        a.q = q;
        history_.push_back(a);
    }

    void execute(const PulseOp& op, TrajectoryResult&) {
        if (!op.scheduled) {
            apply_pulse(op.matrix);
            return;
        }
        const double eps = coin_noise(config_, trajectory_, pulse_counter_++);
        apply_pulse(phase_shifted(op.matrix, eps - accumulated_phase_));
    }

    void execute(const KickOp& op, TrajectoryResult&) {
        apply_kick(op.kick);
        accumulated_phase_ += config_.phase_policy.phase_after_kick(op.kick);
    }

    void execute(const FreeOp& op, TrajectoryResult&) { apply_free(op.tau); }

    void execute(const ShiftOp& op, TrajectoryResult&) {
        apply_shift(op.q);
        accumulated_phase_ += config_.phase_policy.phase_after_shift();
    }

    void execute(const MeasureOp& op, TrajectoryResult& result) { result.snapshots.push_back(measure(state_, op.label)); }

    void execute(const ReverseOp& op, TrajectoryResult& result);

    // Forward history split at each kick or shift: ops before it (pulses and
    // frees), the kick itself, and the frees that follow.
    struct Group {
        std::vector<Applied> ops;
        std::size_t step_index = 0;
    };

    void undo(const Applied& a) {
        switch (a.kind) {
            case Applied::Kind::pulse:
                state_ = apply_coin(std::move(state_), a.matrix.adjoint());
                break;
            case Applied::Kind::kick:
                state_ = apply_kick_bessel(std::move(state_), KickParams{-a.kick.k1, -a.kick.k2});
                break;
            case Applied::Kind::free:
                state_ = apply_free_evolution(std::move(state_), -a.tau);
                break;
            case Applied::Kind::shift:
                state_ = apply_ideal_shift(std::move(state_), -a.q);
                break;
        }
    }

    const PulseProgram& program_;
    const WalkConfig& config_;
    std::uint64_t trajectory_;
    SpinorState state_;
    std::vector<Applied> history_;
    double accumulated_phase_ = 0.0;
    std::uint64_t pulse_counter_ = 0;
};

bool is_step(const Applied& a) { return a.kind == Applied::Kind::kick || a.kind == Applied::Kind::shift; }

void Executor::execute(const ReverseOp& op, TrajectoryResult& result) {
    std::vector<Group> groups;
    std::vector<Applied> trailing;
    {
        Group current;
        bool has_step = false;
        for (const Applied& a : history_) {
            if (has_step && (a.kind == Applied::Kind::pulse || is_step(a))) {
                groups.push_back(std::move(current));
                current = Group{};
                has_step = false;
            }
            if (is_step(a)) {
                current.step_index = current.ops.size();
                has_step = true;
            }
            current.ops.push_back(a);
        }
        if (has_step) {
            groups.push_back(std::move(current));
        } else {
            trailing = std::move(current.ops);
        }
    }
    if (groups.empty()) {
        throw InvalidArgument("reverse needs at least one executed kick or shift before it");
    }

    if (op.mode == ReverseMode::adjoint) {
        for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
            undo(*it);
        }
        for (auto g = groups.rbegin(); g != groups.rend(); ++g) {
            for (auto it = g->ops.rbegin(); it != g->ops.rend(); ++it) {
                undo(*it);
            }
            result.snapshots.push_back(measure(state_, "reverse"));
        }
    } else {
        // Conjugating a kick with the level swap X = M(pi, pi/2) exchanges k1 and
        // k2, which inverts it when k2 = -k1. Each reversed step is then
        // (X' C^dagger X) K F with X' = M(pi, -pi/2), the pulse products
        // telescoping into the reflection at the start and C_1^dagger X at the end.
        for (const Group& g : groups) {
            const Applied& step = g.ops[g.step_index];
            if (step.kind == Applied::Kind::kick && !step.kick.is_antisymmetric()) {
                throw InvalidArgument("composed reversal requires k2 = -k1 (got k1 = " + std::to_string(step.kick.k1) +
                                      ", k2 = " + std::to_string(step.kick.k2) +
                                      "); the level-swap conjugation does not invert an asymmetric kick");
            }
            if (step.kind == Applied::Kind::shift) {
                throw InvalidArgument("composed reversal is defined for physical kicks only; use adjoint mode");
            }
        }
        const CoinMatrix swap = coin_matrix(std::numbers::pi, std::numbers::pi / 2, CoinLabel::custom);
        const CoinMatrix reflection = reflection_pulse();
        CoinMatrix pending = CoinMatrix::identity();
        for (const Applied& a : trailing) {
            if (a.kind == Applied::Kind::pulse) {
                pending = pending * a.matrix.adjoint();
            }
        }
        std::vector<double> trailing_frees;
        for (const Applied& a : trailing) {
            if (a.kind == Applied::Kind::free) {
                trailing_frees.push_back(a.tau);
            }
        }
        for (double tau : trailing_frees) {
            state_ = apply_free_evolution(std::move(state_), tau);
        }
        for (std::size_t gi = groups.size(); gi-- > 0;) {
            const Group& g = groups[gi];
            CoinMatrix block = reflection * pending;
            state_ = apply_coin(std::move(state_), block);
            state_ = apply_kick_bessel(std::move(state_), g.ops[g.step_index].kick);
            CoinMatrix before = CoinMatrix::identity();
            for (std::size_t i = 0; i < g.ops.size(); ++i) {
                const Applied& a = g.ops[i];
                if (a.kind == Applied::Kind::free) {
                    state_ = apply_free_evolution(std::move(state_), a.tau);
                } else if (a.kind == Applied::Kind::pulse && i < g.step_index) {
                    before = a.matrix * before;
                }
            }
            pending = before.adjoint() * swap;
            if (gi == 0) {
                state_ = apply_coin(std::move(state_), pending);
            }
            result.snapshots.push_back(measure(state_, "reverse"));
        }
    }
    history_.clear();
    accumulated_phase_ = 0.0;
}

// Mixture accumulator for one measurement label.
struct Accumulator {
    std::string label;
    std::array<std::vector<double>, 2> per_sigma;
    double m1 = 0.0;
    double m2 = 0.0;
    double entropy = 0.0;

    void add(const Snapshot& s) {
        label = s.label;
        for (std::size_t l = 0; l < 2; ++l) {
            if (per_sigma[l].empty()) {
                per_sigma[l].assign(s.per_sigma[l].size(), 0.0);
            }
            for (std::size_t i = 0; i < s.per_sigma[l].size(); ++i) {
                per_sigma[l][i] += s.per_sigma[l][i];
            }
        }
        m1 += s.m1;
        m2 += s.m2;
        entropy += s.entropy;
    }
};

StepRecord single_record(const Snapshot& s, int grid) {
    StepRecord r;
    r.label = s.label;
    r.distribution.grid_half_width = grid;
    r.distribution.beta = s.beta;
    r.distribution.probabilities.resize(s.per_sigma[0].size());
    for (std::size_t i = 0; i < s.per_sigma[0].size(); ++i) {
        r.distribution.probabilities[i] = s.per_sigma[0][i] + s.per_sigma[1][i];
    }
    r.distribution.per_sigma = s.per_sigma;
    r.mean_p = s.m1;
    r.energy = 0.5 * s.m2;
    r.stddev = std_dev(r.distribution);
    r.entropy = s.entropy;
    return r;
}

StepRecord ensemble_record(Accumulator acc, std::size_t count, int grid, double centre) {
    const double w = 1.0 / static_cast<double>(count);
    StepRecord r;
    r.label = std::move(acc.label);
    r.distribution.grid_half_width = grid;
    r.distribution.beta = centre;
    for (auto& p : acc.per_sigma) {
        for (double& v : p) {
            v *= w;
        }
    }
    r.distribution.probabilities.resize(acc.per_sigma[0].size());
    for (std::size_t i = 0; i < acc.per_sigma[0].size(); ++i) {
        r.distribution.probabilities[i] = acc.per_sigma[0][i] + acc.per_sigma[1][i];
    }
    r.distribution.per_sigma = std::move(acc.per_sigma);
    // Moments of the mixture, each trajectory at its own n + beta.
    r.mean_p = acc.m1 * w;
    r.energy = 0.5 * acc.m2 * w;
    r.stddev = std::sqrt(std::max(acc.m2 * w - r.mean_p * r.mean_p, 0.0));
    r.entropy = acc.entropy * w;
    return r;
}

unsigned worker_count(const ExecutionOptions& options, std::size_t work) {
    unsigned n = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, work));
}

}  // namespace

WalkRecord run_program(const PulseProgram& program, const WalkConfig& config, bool ensemble,
                       const ExecutionOptions& options) {
    config.validate();
    const int grid = resolve_grid(config, program);
    WalkRecord record;
    record.config = config;
    record.grid_half_width = grid;

    if (!ensemble) {
        Executor exec(program, config, grid, 0, config.beta);
        TrajectoryResult res = exec.run(true);
        record.trajectories = 1;
        for (const Snapshot& s : res.snapshots) {
            record.steps.push_back(single_record(s, grid));
        }
        record.initial_state = std::move(res.initial);
        record.final_state = std::move(res.final);
        return record;
    }

    const std::size_t total = config.trajectories();
    record.trajectories = total;
    std::vector<Accumulator> acc;
    const std::size_t chunk = 64;
    std::vector<TrajectoryResult> results(chunk);
    std::vector<std::exception_ptr> errors(chunk);
    for (std::size_t start = 0; start < total; start += chunk) {
        const std::size_t count = std::min(chunk, total - start);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    const std::uint64_t t = start + i;
                    Executor exec(program, config, grid, t, draw_quasimomentum(config, t));
                    results[i] = exec.run(false);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        const unsigned workers = worker_count(options, count);
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back(work);
            }
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (errors[i]) {
                std::rethrow_exception(errors[i]);
            }
            const auto& snaps = results[i].snapshots;
            if (acc.empty()) {
                acc.resize(snaps.size());
            }
            for (std::size_t s = 0; s < snaps.size(); ++s) {
                acc[s].add(snaps[s]);
            }
            results[i] = TrajectoryResult{};
        }
    }
    for (Accumulator& a : acc) {
        record.steps.push_back(ensemble_record(std::move(a), total, grid, config.beta));
    }
    return record;
}

WalkRecord run_walk(const WalkConfig& config, const ExecutionOptions& options) {
    return run_program(build_program(config), config, false, options);
}

WalkRecord run_ensemble(const WalkConfig& config, const ExecutionOptions& options) {
    return run_program(build_program(config), config, true, options);
}

WalkRecord reverse_walk(const WalkConfig& config, ReverseMode mode, const ExecutionOptions& options) {
    if (config.steps < 1) {
        throw InvalidArgument("reverse needs at least one forward step");
    }
    if (mode == ReverseMode::composed && config.shift == ShiftKind::ratchet && !config.kick.is_antisymmetric()) {
        throw InvalidArgument("composed reversal requires k2 = -k1; the level-swap conjugation does not invert an "
                              "asymmetric kick");
    }
    PulseProgram program = build_program(config);
    program.instructions.push_back({ReverseOp{mode}, config.steps + 1});
    return run_program(program, config, config.is_ensemble(), options);
}

std::vector<ScanPoint> scan_coin_phase(const WalkConfig& config, std::span<const double> phi_c_values,
                                       std::span<const int> at_steps, const ExecutionOptions& options) {
    if (at_steps.empty()) {
        throw InvalidArgument("scan needs at least one step to record");
    }
    WalkConfig cfg = config;
    cfg.steps = *std::max_element(at_steps.begin(), at_steps.end());
    if (*std::min_element(at_steps.begin(), at_steps.end()) < 0) {
        throw InvalidArgument("scan steps must be non-negative");
    }
    std::vector<ScanPoint> points;
    for (double phi : phi_c_values) {
        cfg.phase_policy = GlobalPhasePolicy::explicit_phase(phi);
        const WalkRecord rec = cfg.is_ensemble() ? run_ensemble(cfg, options) : run_walk(cfg, options);
        for (int s : at_steps) {
            points.push_back({phi, s, rec.steps[static_cast<std::size_t>(s)].mean_p});
        }
    }
    return points;
}

Distribution classical_walk_reference(int steps, double step_bias, int grid_half_width) {
    if (steps < 0) {
        throw InvalidArgument("steps must be non-negative");
    }
    require_range("step_bias", step_bias, 0.0, 1.0);
    const int half = grid_half_width > 0 ? grid_half_width : std::max(steps, 1);
    if (half < steps) {
        throw InvalidArgument("grid half width " + std::to_string(half) + " cannot hold " + std::to_string(steps) +
                              " classical steps");
    }
    const std::size_t bins = static_cast<std::size_t>(2 * half + 1);
    std::vector<double> p(bins, 0.0);
    p[static_cast<std::size_t>(half)] = 1.0;
    for (int j = 0; j < steps; ++j) {
        std::vector<double> next(bins, 0.0);
        for (std::size_t i = 0; i < bins; ++i) {
            if (p[i] == 0.0) {
                continue;
            }
            next[i + 1] += step_bias * p[i];
            next[i - 1] += (1.0 - step_bias) * p[i];
        }
        p = std::move(next);
    }
    Distribution d;
    d.grid_half_width = half;
    d.probabilities = std::move(p);
    return d;
}

}  // namespace qwalk
