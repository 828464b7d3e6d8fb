#include "qwalk/state.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

SpinorState::SpinorState(int grid_half_width, double beta) : half_width_(grid_half_width), beta_(beta) {
    if (grid_half_width < 1) {
        throw InvalidArgument("grid half width must be positive, got " + std::to_string(grid_half_width));
    }
    if (!std::isfinite(beta) || std::abs(beta) >= 1.0) {
        throw InvalidArgument("quasimomentum must satisfy |beta| < 1, got " + std::to_string(beta));
    }
    const auto size = static_cast<std::size_t>(2 * grid_half_width + 1);
    amplitudes_[0].assign(size, complex{});
    amplitudes_[1].assign(size, complex{});
}

SpinorState SpinorState::basis(int grid_half_width, double beta, int n, Level level) {
    SpinorState s(grid_half_width, beta);
    s(n, level) = 1.0;
    return s;
}

complex& SpinorState::operator()(int n, Level level) {
    if (!contains(n)) {
        throw InvalidArgument("momentum index " + std::to_string(n) + " outside grid [-" + std::to_string(half_width_) +
                              ", " + std::to_string(half_width_) + "]");
    }
    return amplitudes_[index(level)][static_cast<std::size_t>(n + half_width_)];
}

const complex& SpinorState::operator()(int n, Level level) const {
    return const_cast<SpinorState&>(*this)(n, level);
}

double SpinorState::norm_squared() const noexcept {
    double sum = 0.0;
    for (const auto& amps : amplitudes_) {
        for (const complex& c : amps) {
            sum += std::norm(c);
        }
    }
    return sum;
}

void SpinorState::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) {
        throw InvalidArgument("cannot normalize a zero state");
    }
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& amps : amplitudes_) {
        for (complex& c : amps) {
            c *= scale;
        }
    }
}

bool SpinorState::same_grid(const SpinorState& other) const noexcept {
    return half_width_ == other.half_width_ && beta_ == other.beta_;
}

double Distribution::at(int n) const {
    if (n < -grid_half_width || n > grid_half_width) {
        return 0.0;
    }
    return probabilities[static_cast<std::size_t>(n + grid_half_width)];
}

double Distribution::total() const {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

SpinorState new_ratchet_state(int num_components, double phi, double beta, int grid_half_width) {
    if (num_components < 1) {
        throw InvalidArgument("ratchet state needs at least one momentum component");
    }
    if (grid_half_width < num_components) {
        throw InvalidArgument("grid half width " + std::to_string(grid_half_width) + " too small for " +
                              std::to_string(num_components) + " components");
    }
    SpinorState s(grid_half_width, beta);
    const double amp = 1.0 / std::sqrt(static_cast<double>(num_components));
    for (int n = 0; n < num_components; ++n) {
        s(n, Level::one) = std::polar(amp, n * phi);
    }
    return s;
}

Distribution momentum_distribution(const SpinorState& state) {
    Distribution d;
    d.grid_half_width = state.grid_half_width();
    d.beta = state.beta();
    const std::size_t bins = state.bins();
    std::array<std::vector<double>, 2> parts{std::vector<double>(bins), std::vector<double>(bins)};
    d.probabilities.resize(bins);
    const auto a1 = state.level(Level::one);
    const auto a2 = state.level(Level::two);
    for (std::size_t i = 0; i < bins; ++i) {
        parts[0][i] = std::norm(a1[i]);
        parts[1][i] = std::norm(a2[i]);
        d.probabilities[i] = parts[0][i] + parts[1][i];
    }
    d.per_sigma = std::move(parts);
    return d;
}

namespace {

// First and second raw moments of p = n + beta.
std::array<double, 2> raw_moments(const Distribution& dist) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
        const double p = static_cast<double>(static_cast<int>(i) - dist.grid_half_width) + dist.beta;
        m1 += p * dist.probabilities[i];
        m2 += p * p * dist.probabilities[i];
    }
    return {m1, m2};
}

}  // namespace

double mean_momentum(const Distribution& dist) { return raw_moments(dist)[0]; }

double mean_energy(const Distribution& dist) { return 0.5 * raw_moments(dist)[1]; }

double mean_momentum(const SpinorState& state) { return mean_momentum(momentum_distribution(state)); }

double mean_energy(const SpinorState& state) { return mean_energy(momentum_distribution(state)); }

double std_dev(const Distribution& dist) {
    // Centre on the mean first; the one-pass formula loses digits for narrow
    // distributions far from n = 0.
    const double mean = raw_moments(dist)[0];
    double var = 0.0;
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
        const double p = static_cast<double>(static_cast<int>(i) - dist.grid_half_width) + dist.beta;
        var += (p - mean) * (p - mean) * dist.probabilities[i];
    }
    return std::sqrt(std::max(var, 0.0));
}

double fidelity(const SpinorState& a, const SpinorState& b) {
    if (!a.same_grid(b)) {
        throw InvalidArgument("fidelity requires states on the same grid and quasimomentum");
    }
    complex overlap{};
    for (Level l : kLevels) {
        const auto x = a.level(l);
        const auto y = b.level(l);
        for (std::size_t i = 0; i < x.size(); ++i) {
            overlap += std::conj(x[i]) * y[i];
        }
    }
    return std::norm(overlap);
}

double coin_entropy(const SpinorState& state) {
    double p1 = 0.0;
    double p2 = 0.0;
    complex coherence{};
    const auto a1 = state.level(Level::one);
    const auto a2 = state.level(Level::two);
    for (std::size_t i = 0; i < a1.size(); ++i) {
        p1 += std::norm(a1[i]);
        p2 += std::norm(a2[i]);
        coherence += a1[i] * std::conj(a2[i]);
    }
    const double trace = p1 + p2;
    if (!(trace > 0.0)) {
        return 0.0;
    }
    const double half_gap = std::hypot(0.5 * (p1 - p2), std::abs(coherence)) / trace;
    double entropy = 0.0;
    for (double lambda : {0.5 + half_gap, 0.5 - half_gap}) {
        if (lambda > 1e-300) {
            entropy -= lambda * std::log(lambda);
        }
    }
    return std::max(entropy, 0.0);
}

std::array<double, 2> edge_populations(const SpinorState& state) {
    const std::size_t bins = state.bins();
    std::array<double, 2> edges{0.0, 0.0};
    for (Level l : kLevels) {
        const auto a = state.level(l);
        edges[0] += std::norm(a[0]) + std::norm(a[1]);
        edges[1] += std::norm(a[bins - 1]) + std::norm(a[bins - 2]);
    }
    return edges;
}

void check_grid_leakage(const SpinorState& state) {
    const auto edges = edge_populations(state);
    if (edges[0] >= kLeakageThreshold || edges[1] >= kLeakageThreshold) {
        throw GridLeakageError("grid leakage: edge population " + std::to_string(std::max(edges[0], edges[1])) +
                               " on grid half width " + std::to_string(state.grid_half_width()) +
                               "; increase the grid");
    }
}

}  // namespace qwalk
