#pragma once

#include <array>
#include <string_view>

#include "qwalk/state.hpp"

namespace qwalk {

enum class CoinLabel { gate, coin, biased_gate, biased_coin, reflection, custom };

std::string_view to_string(CoinLabel label) noexcept;

/// 2x2 unitary acting on the internal levels, bin by bin.
struct CoinMatrix {
    std::array<complex, 4> entries{};  ///< row-major
    CoinLabel label = CoinLabel::custom;

    complex operator()(int row, int col) const noexcept { return entries[static_cast<std::size_t>(2 * row + col)]; }

    CoinMatrix adjoint() const noexcept;

    /// max |(M^dagger M - I)_ij|
    double unitarity_defect() const noexcept;

    static CoinMatrix identity() noexcept;
};

/// Matrix product, right operand applied first. The label becomes custom.
CoinMatrix operator*(const CoinMatrix& a, const CoinMatrix& b) noexcept;

/// M(alpha, chi) = [[cos(a/2), e^{-i chi} sin(a/2)], [-e^{i chi} sin(a/2), cos(a/2)]].
/// chi is reduced mod 2 pi; alpha is taken as given (the matrix has period 4 pi in alpha).
CoinMatrix coin_matrix(double alpha, double chi, CoinLabel label = CoinLabel::coin);

enum class BiasVariant { pi, minus_half_pi };

/// Unequal-superposition pulses, rho in [0, 1] on the diagonal:
///   pi            -> [[sqrt(rho), -sqrt(1-rho)], [sqrt(1-rho), sqrt(rho)]]
///   minus_half_pi -> [[sqrt(rho), i sqrt(1-rho)], [i sqrt(1-rho), sqrt(rho)]]
CoinMatrix biased_coin(double rho, BiasVariant variant);

/// M(pi, -pi/2): swaps the levels up to phase, used by the composed reversal.
CoinMatrix reflection_pulse();

/// The same pulse with its azimuthal phase moved by delta_chi:
/// M(alpha, chi) -> M(alpha, chi + delta_chi). Works for any 2x2 matrix by
/// conjugating with diag(e^{-i delta/2}, e^{i delta/2}).
CoinMatrix phase_shifted(const CoinMatrix& m, double delta_chi);

/// Kick strengths seen by |1> and |2>. The symmetric walk has k2 = -k1.
struct KickParams {
    double k1 = -1.45;
    double k2 = 1.45;

    static KickParams symmetric(double k) noexcept { return {-k, k}; }
    bool is_antisymmetric() const noexcept;
};

inline constexpr double kDefaultKickCap = 5.0;

void validate_kick(const KickParams& kick, double k_max = kDefaultKickCap);

/// How the coin schedule handles the relative phase each kick imprints.
struct GlobalPhasePolicy {
    enum class Mode { compensated, uncompensated, explicit_phase };
    Mode mode = Mode::compensated;
    double phi_c = 0.0;  ///< used by explicit_phase only

    static GlobalPhasePolicy compensated() noexcept { return {}; }
    static GlobalPhasePolicy uncompensated() noexcept { return {Mode::uncompensated, 0.0}; }
    static GlobalPhasePolicy explicit_phase(double phi) noexcept { return {Mode::explicit_phase, phi}; }

    /// Phase the coin schedule must subtract after this kick.
    double phase_after_kick(const KickParams& kick) const noexcept;
    /// Same for an ideal shift, which carries no dc phase of its own.
    double phase_after_shift() const noexcept;
};

/// (c_{n,1}, c_{n,2}) <- M (c_{n,1}, c_{n,2}) for every n.
/// Throws InvalidArgument when M is not unitary to 1e-12.
SpinorState apply_coin(SpinorState state, const CoinMatrix& m);

/// Physical ratchet kick in the Bessel expansion:
///   c'_{n-m,s} += e^{-i k_s} (-i)^m J_m(k_s) c_{n,s},  |m| <= truncation_order,
/// with the dc prefactor always applied. truncation_order <= 0 picks
/// default_truncation_order. Throws TruncationError if the order drops more
/// than 1e-12 of probability, GridLeakageError if population reaches the edge.
SpinorState apply_kick_bessel(SpinorState state, const KickParams& kick, int truncation_order = 0);

/// Same operator evaluated on a uniform angle grid: multiply by
/// e^{-i k_s (1 + cos theta)} between a momentum->angle transform and its
/// inverse. Independent of the Bessel route; used as its cross-check.
/// num_angle_points <= 0 picks the next FFT-friendly size >= 4 (2N+1).
SpinorState apply_kick_grid(SpinorState state, const KickParams& kick, int num_angle_points = 0);

/// Smallest 2^a 3^b 5^c 7^d that is >= n.
int next_fft_size(int n);

/// c_{n,s} <- e^{-i tau (n + beta)^2 / 2} c_{n,s}.
SpinorState apply_free_evolution(SpinorState state, double tau);

/// c_{n+q,1} <- c_{n,1}, c_{n-q,2} <- c_{n,2}.
SpinorState apply_ideal_shift(SpinorState state, int q);

}  // namespace qwalk
