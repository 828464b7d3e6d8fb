#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qwalk {

using complex = std::complex<double>;

/// Internal (coin) level of the walker: the two hyperfine states |1> and |2>.
enum class Level : int { one = 0, two = 1 };

inline constexpr std::array<Level, 2> kLevels{Level::one, Level::two};

/// Spinor wavefunction on a truncated momentum ladder.
///
/// Amplitudes c[n][sigma] live on n in [-N, N] (units of two-photon recoils)
/// for both internal levels. The quasimomentum offset beta is a per-state
/// scalar: the physical momentum of bin n is n + beta. All operators in the
/// library conserve beta.
class SpinorState {
  public:
    /// Zero state on [-N, N]. Callers fill the amplitudes and normalize.
    SpinorState(int grid_half_width, double beta);

    /// |level> (x) |n>.
    static SpinorState basis(int grid_half_width, double beta, int n, Level level);

    int grid_half_width() const noexcept { return half_width_; }
    std::size_t bins() const noexcept { return amplitudes_[0].size(); }
    double beta() const noexcept { return beta_; }

    bool contains(int n) const noexcept { return n >= -half_width_ && n <= half_width_; }

    complex& operator()(int n, Level level);
    const complex& operator()(int n, Level level) const;

    /// Contiguous amplitudes of one level, index 0 corresponds to n = -N.
    std::span<complex> level(Level l) noexcept { return amplitudes_[index(l)]; }
    std::span<const complex> level(Level l) const noexcept { return amplitudes_[index(l)]; }

    double norm_squared() const noexcept;
    void normalize();

    bool same_grid(const SpinorState& other) const noexcept;

  private:
    static std::size_t index(Level l) noexcept { return static_cast<std::size_t>(l); }

    int half_width_;
    double beta_;
    std::array<std::vector<complex>, 2> amplitudes_;
};

/// Momentum distribution P(n) = |c_{n,1}|^2 + |c_{n,2}|^2.
struct Distribution {
    int grid_half_width = 0;
    double beta = 0.0;  ///< momentum of bin n is n + beta
    std::vector<double> probabilities;
    /// P_{|1>}(n) and P_{|2>}(n); absent when the levels were imaged together.
    std::optional<std::array<std::vector<double>, 2>> per_sigma;

    double at(int n) const;
    double total() const;
};

/// (1/sqrt(L)) sum_{n=0}^{L-1} e^{i n phi} |n>, all population in |1>.
SpinorState new_ratchet_state(int num_components, double phi, double beta, int grid_half_width);

Distribution momentum_distribution(const SpinorState& state);

double mean_momentum(const SpinorState& state);
double mean_momentum(const Distribution& dist);
/// E = sum (n + beta)^2 P(n) / 2 in the kicked-rotor's dimensionless units.
double mean_energy(const SpinorState& state);
double mean_energy(const Distribution& dist);
double std_dev(const Distribution& dist);

/// |<a|b>|^2. Throws InvalidArgument when the grids or beta differ.
double fidelity(const SpinorState& a, const SpinorState& b);

/// Von Neumann entropy (nats) of the reduced 2x2 coin density matrix.
double coin_entropy(const SpinorState& state);

/// Population within the two outermost bins on the low and high edge.
std::array<double, 2> edge_populations(const SpinorState& state);

inline constexpr double kLeakageThreshold = 1e-8;

/// Throws GridLeakageError when either edge holds kLeakageThreshold or more.
void check_grid_leakage(const SpinorState& state);

}  // namespace qwalk
