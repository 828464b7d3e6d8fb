#include "qwalk/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "qwalk/bessel.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitarityTolerance = 1e-12;
constexpr double kCompletenessTolerance = 1e-12;

// Bessel coefficients below this magnitude contribute < 1e-44 in probability.
constexpr double kNegligibleBessel = 1e-22;

}  // namespace

std::string_view to_string(CoinLabel label) noexcept {
    switch (label) {
        case CoinLabel::gate: return "gate";
        case CoinLabel::coin: return "coin";
        case CoinLabel::biased_gate: return "biased_gate";
        case CoinLabel::biased_coin: return "biased_coin";
        case CoinLabel::reflection: return "reflection";
        case CoinLabel::custom: return "custom";
    }
    return "custom";
}

CoinMatrix CoinMatrix::adjoint() const noexcept {
    return {{std::conj(entries[0]), std::conj(entries[2]), std::conj(entries[1]), std::conj(entries[3])}, label};
}

double CoinMatrix::unitarity_defect() const noexcept {
    const CoinMatrix p = adjoint() * *this;
    return std::max({std::abs(p.entries[0] - 1.0), std::abs(p.entries[1]), std::abs(p.entries[2]),
                     std::abs(p.entries[3] - 1.0)});
}

CoinMatrix CoinMatrix::identity() noexcept { return {{1.0, 0.0, 0.0, 1.0}, CoinLabel::custom}; }

CoinMatrix operator*(const CoinMatrix& a, const CoinMatrix& b) noexcept {
    return {{a.entries[0] * b.entries[0] + a.entries[1] * b.entries[2],
             a.entries[0] * b.entries[1] + a.entries[1] * b.entries[3],
             a.entries[2] * b.entries[0] + a.entries[3] * b.entries[2],
             a.entries[2] * b.entries[1] + a.entries[3] * b.entries[3]},
            CoinLabel::custom};
}

CoinMatrix coin_matrix(double alpha, double chi, CoinLabel label) {
    if (!std::isfinite(alpha) || !std::isfinite(chi)) {
        throw InvalidArgument("coin angles must be finite");
    }
    const double reduced = std::remainder(chi, 2.0 * kPi);
    const double c = std::cos(0.5 * alpha);
    const double s = std::sin(0.5 * alpha);
    return {{complex(c, 0.0), std::polar(s, -reduced), -std::polar(s, reduced), complex(c, 0.0)}, label};
}

CoinMatrix biased_coin(double rho, BiasVariant variant) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw InvalidArgument("bias factor rho must lie in [0, 1], got " + std::to_string(rho));
    }
    const double d = std::sqrt(rho);
    const double o = std::sqrt(1.0 - rho);
    if (variant == BiasVariant::pi) {
        return {{complex(d, 0.0), complex(-o, 0.0), complex(o, 0.0), complex(d, 0.0)}, CoinLabel::biased_gate};
    }
    return {{complex(d, 0.0), complex(0.0, o), complex(0.0, o), complex(d, 0.0)}, CoinLabel::biased_coin};
}

CoinMatrix reflection_pulse() { return coin_matrix(kPi, -0.5 * kPi, CoinLabel::reflection); }

CoinMatrix phase_shifted(const CoinMatrix& m, double delta_chi) {
    if (delta_chi == 0.0) {
        return m;
    }
    const double reduced = std::remainder(delta_chi, 2.0 * kPi);
    CoinMatrix out = m;
    out.entries[1] *= std::polar(1.0, -reduced);
    out.entries[2] *= std::polar(1.0, reduced);
    return out;
}

bool KickParams::is_antisymmetric() const noexcept {
    return std::abs(k1 + k2) <= 1e-12 * std::max({1.0, std::abs(k1), std::abs(k2)});
}

void validate_kick(const KickParams& kick, double k_max) {
    if (!std::isfinite(kick.k1) || !std::isfinite(kick.k2)) {
        throw InvalidArgument("kick strengths must be finite");
    }
    if (std::abs(kick.k1) > k_max || std::abs(kick.k2) > k_max) {
        throw InvalidArgument("kick strength exceeds the cap |k| <= " + std::to_string(k_max));
    }
}

double GlobalPhasePolicy::phase_after_kick(const KickParams& kick) const noexcept {
    switch (mode) {
        case Mode::compensated: return kick.k2 - kick.k1;
        case Mode::uncompensated: return 0.0;
        case Mode::explicit_phase: return phi_c;
    }
    return 0.0;
}

double GlobalPhasePolicy::phase_after_shift() const noexcept {
    return mode == Mode::explicit_phase ? phi_c : 0.0;
}

SpinorState apply_coin(SpinorState state, const CoinMatrix& m) {
    if (m.unitarity_defect() > kUnitarityTolerance) {
        throw InvalidArgument("coin matrix is not unitary (defect " + std::to_string(m.unitarity_defect()) + ")");
    }
    auto a1 = state.level(Level::one);
    auto a2 = state.level(Level::two);
    for (std::size_t i = 0; i < a1.size(); ++i) {
        const complex x = a1[i];
        const complex y = a2[i];
        a1[i] = m.entries[0] * x + m.entries[1] * y;
        a2[i] = m.entries[2] * x + m.entries[3] * y;
    }
    return state;
}

namespace {

void check_norm_loss(double before, double after) {
    if (before - after > kLeakageThreshold * std::max(before, 1e-300)) {
        throw GridLeakageError("grid leakage: " + std::to_string(before - after) +
                               " of the population left the momentum window; increase the grid");
    }
}

// out[n'] = sum_m a_m in[n' + m] for one level, a_{-m} = a_m.
void convolve_kick(std::span<const complex> in, std::span<complex> out, std::span<const complex> coeff) {
    const auto bins = static_cast<std::ptrdiff_t>(in.size());
    const auto order = static_cast<std::ptrdiff_t>(coeff.size()) - 1;
    for (std::ptrdiff_t i = 0; i < bins; ++i) {
        complex acc = coeff[0] * in[static_cast<std::size_t>(i)];
        const std::ptrdiff_t up = std::min(order, bins - 1 - i);
        const std::ptrdiff_t down = std::min(order, i);
        const std::ptrdiff_t both = std::min(up, down);
        std::ptrdiff_t m = 1;
        for (; m <= both; ++m) {
            acc += coeff[static_cast<std::size_t>(m)] * (in[static_cast<std::size_t>(i + m)] + in[static_cast<std::size_t>(i - m)]);
        }
        for (std::ptrdiff_t r = m; r <= up; ++r) {
            acc += coeff[static_cast<std::size_t>(r)] * in[static_cast<std::size_t>(i + r)];
        }
        for (std::ptrdiff_t r = m; r <= down; ++r) {
            acc += coeff[static_cast<std::size_t>(r)] * in[static_cast<std::size_t>(i - r)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
}

std::vector<complex> kick_coefficients(double k, int order) {
    const auto j = bessel_j_table(order, k);
    std::size_t used = j.size();
    while (used > 1 && std::abs(j[used - 1]) < kNegligibleBessel) {
        --used;
    }
    std::vector<complex> coeff(used);
    const complex dc = std::polar(1.0, -k);
    complex minus_i_pow{1.0, 0.0};
    for (std::size_t m = 0; m < used; ++m) {
        coeff[m] = dc * minus_i_pow * j[m];
        minus_i_pow *= complex(0.0, -1.0);
    }
    return coeff;
}

}  // namespace

SpinorState apply_kick_bessel(SpinorState state, const KickParams& kick, int truncation_order) {
    if (!std::isfinite(kick.k1) || !std::isfinite(kick.k2)) {
        throw InvalidArgument("kick strengths must be finite");
    }
    const double before = state.norm_squared();
    SpinorState out(state.grid_half_width(), state.beta());
    for (Level l : kLevels) {
        const double k = l == Level::one ? kick.k1 : kick.k2;
        const int order = truncation_order > 0 ? truncation_order : default_truncation_order(k);
        if (truncation_defect(k, order) > kCompletenessTolerance) {
            throw TruncationError("Bessel truncation order " + std::to_string(order) + " is insufficient for k = " +
                                  std::to_string(k));
        }
        const auto coeff = kick_coefficients(k, order);
        convolve_kick(state.level(l), out.level(l), coeff);
    }
    check_norm_loss(before, out.norm_squared());
    check_grid_leakage(out);
    return out;
}

int next_fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7}) {
            while (r % p == 0) {
                r /= p;
            }
        }
        if (r == 1) {
            return m;
        }
    }
}

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPair {
  public:
    explicit FftPair(int n) : n_(n) {
        std::lock_guard lock(planner_mutex());
        buffer_ = fftw_alloc_complex(static_cast<std::size_t>(n));
        forward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPair() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;

    std::span<complex> data() noexcept {
        return {reinterpret_cast<complex*>(buffer_), static_cast<std::size_t>(n_)};
    }
    void forward() noexcept { fftw_execute(forward_); }
    void backward() noexcept { fftw_execute(backward_); }

  private:
    int n_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace

SpinorState apply_kick_grid(SpinorState state, const KickParams& kick, int num_angle_points) {
    const int half = state.grid_half_width();
    const int bins = 2 * half + 1;
    const int points = num_angle_points > 0 ? num_angle_points : next_fft_size(4 * bins);
    if (points < 2 * bins) {
        throw InvalidArgument("angle grid of " + std::to_string(points) + " points is too small for " +
                              std::to_string(bins) + " momentum bins (need at least " + std::to_string(2 * bins) + ")");
    }
    const double before = state.norm_squared();
    FftPair fft(points);
    auto buf = fft.data();
    auto wrap = [points](int n) { return static_cast<std::size_t>(((n % points) + points) % points); };
    for (Level l : kLevels) {
        const double k = l == Level::one ? kick.k1 : kick.k2;
        auto amps = state.level(l);
        std::fill(buf.begin(), buf.end(), complex{});
        for (int n = -half; n <= half; ++n) {
            buf[wrap(n)] = amps[static_cast<std::size_t>(n + half)];
        }
        fft.backward();  // psi(theta_l) = sum_n c_n e^{i n theta_l}
        for (int i = 0; i < points; ++i) {
            const double theta = 2.0 * kPi * i / points;
            buf[static_cast<std::size_t>(i)] *= std::polar(1.0, -k * (1.0 + std::cos(theta)));
        }
        fft.forward();
        const double scale = 1.0 / points;
        for (int n = -half; n <= half; ++n) {
            amps[static_cast<std::size_t>(n + half)] = buf[wrap(n)] * scale;
        }
    }
    check_norm_loss(before, state.norm_squared());
    check_grid_leakage(state);
    return state;
}

SpinorState apply_free_evolution(SpinorState state, double tau) {
    if (!std::isfinite(tau)) {
        throw InvalidArgument("free evolution time must be finite");
    }
    // e^{-i tau p^2 / 2} = e^{-2 pi i (tau / 4 pi) p^2}; reducing the cycle
    // count mod 1 keeps the Talbot-time identity exact for integer p.
    const double talbot_fraction = tau / (4.0 * kPi);
    const int half = state.grid_half_width();
    for (int n = -half; n <= half; ++n) {
        const double p = n + state.beta();
        const double cycles = talbot_fraction * p * p;
        const double frac = cycles - std::floor(cycles);
        const complex phase = frac == 0.0 ? complex(1.0, 0.0) : std::polar(1.0, -2.0 * kPi * frac);
        for (Level l : kLevels) {
            state.level(l)[static_cast<std::size_t>(n + half)] *= phase;
        }
    }
    return state;
}

SpinorState apply_ideal_shift(SpinorState state, int q) {
    if (q == 0) {
        return state;
    }
    const double before = state.norm_squared();
    SpinorState out(state.grid_half_width(), state.beta());
    const auto bins = static_cast<std::ptrdiff_t>(state.bins());
    for (Level l : kLevels) {
        const std::ptrdiff_t shift = l == Level::one ? q : -q;
        const auto in = state.level(l);
        auto dst = out.level(l);
        for (std::ptrdiff_t i = 0; i < bins; ++i) {
            const std::ptrdiff_t j = i + shift;
            if (j >= 0 && j < bins) {
                dst[static_cast<std::size_t>(j)] = in[static_cast<std::size_t>(i)];
            }
        }
    }
    check_norm_loss(before, out.norm_squared());
    check_grid_leakage(out);
    return out;
}

}  // namespace qwalk
