#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/operators.hpp"
#include "test_util.hpp"

using namespace qwalk;
using std::numbers::pi;

namespace {

// c'_{n-m} += e^{-ik} (-i)^m J_m(k) c_n with J from quadrature.
SpinorState reference_kick(const SpinorState& s, double k1, double k2, int order) {
    SpinorState out(s.grid_half_width(), s.beta());
    const int half = s.grid_half_width();
    for (Level l : kLevels) {
        const double k = l == Level::one ? k1 : k2;
        for (int m = -order; m <= order; ++m) {
            const complex c = std::exp(complex(0, -k)) * std::pow(complex(0, -1), m) *
                              testing::bessel_by_quadrature(m, k);
            for (int n = -half; n <= half; ++n) {
                if (out.contains(n - m)) {
                    out(n - m, l) += c * s(n, l);
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("coin matrix entries") {
    const double a = 0.8;
    const double chi = -1.3;
    const CoinMatrix m = coin_matrix(a, chi);
    CHECK(std::abs(m(0, 0) - std::cos(a / 2)) < 1e-16);
    CHECK(std::abs(m(0, 1) - std::exp(complex(0, -chi)) * std::sin(a / 2)) < 1e-16);
    CHECK(std::abs(m(1, 0) + std::exp(complex(0, chi)) * std::sin(a / 2)) < 1e-16);
    CHECK(std::abs(m(1, 1) - std::cos(a / 2)) < 1e-16);
    CHECK(m.unitarity_defect() < 1e-15);
}

TEST_CASE("Hadamard-like gate and standard coin") {
    const CoinMatrix g = coin_matrix(pi / 2, pi);
    const double r = 1 / std::sqrt(2.0);
    CHECK(std::abs(g(0, 0) - r) < 1e-15);
    CHECK(std::abs(g(0, 1) + r) < 1e-15);
    CHECK(std::abs(g(1, 0) - r) < 1e-15);
    const CoinMatrix c = coin_matrix(pi / 2, -pi / 2);
    CHECK(std::abs(c(0, 1) - complex(0, r)) < 1e-15);
    CHECK(std::abs(c(1, 0) - complex(0, r)) < 1e-15);
}

TEST_CASE("chi is 2 pi periodic") {
    const CoinMatrix a = coin_matrix(1.1, 0.4);
    const CoinMatrix b = coin_matrix(1.1, 0.4 + 6 * pi);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(a.entries[i] - b.entries[i]) < 1e-14);
    }
}

TEST_CASE("biased coins") {
    for (double rho : {0.0, 0.3, 0.5, 0.7, 1.0}) {
        const CoinMatrix p = biased_coin(rho, BiasVariant::pi);
        const CoinMatrix h = biased_coin(rho, BiasVariant::minus_half_pi);
        CHECK(std::abs(p(0, 0) - std::sqrt(rho)) < 1e-15);
        CHECK(std::abs(p(0, 1) + std::sqrt(1 - rho)) < 1e-15);
        CHECK(std::abs(p(1, 0) - std::sqrt(1 - rho)) < 1e-15);
        CHECK(std::abs(h(0, 1) - complex(0, std::sqrt(1 - rho))) < 1e-15);
        CHECK(std::abs(h(1, 0) - complex(0, std::sqrt(1 - rho))) < 1e-15);
        // Same family as M(alpha, chi) with cos(alpha/2) = sqrt(rho).
        const double alpha = 2 * std::acos(std::sqrt(rho));
        const CoinMatrix mp = coin_matrix(alpha, pi);
        const CoinMatrix mh = coin_matrix(alpha, -pi / 2);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(p.entries[i] - mp.entries[i]) < 1e-15);
            CHECK(std::abs(h.entries[i] - mh.entries[i]) < 1e-15);
        }
    }
    const CoinMatrix half = biased_coin(0.5, BiasVariant::pi);
    const CoinMatrix gate = coin_matrix(pi / 2, pi);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(half.entries[i] - gate.entries[i]) < 1e-15);
    }
    CHECK_THROWS_AS(biased_coin(1.2, BiasVariant::pi), InvalidArgument);
    CHECK_THROWS_AS(biased_coin(-0.1, BiasVariant::pi), InvalidArgument);
}

TEST_CASE("phase shift moves chi") {
    const CoinMatrix a = phase_shifted(coin_matrix(0.9, -0.4), 1.7);
    const CoinMatrix b = coin_matrix(0.9, 1.3);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(a.entries[i] - b.entries[i]) < 1e-15);
    }
}

TEST_CASE("adjoint and product") {
    const CoinMatrix m = coin_matrix(1.2, 0.5);
    const CoinMatrix id = m.adjoint() * m;
    CHECK(std::abs(id(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(id(0, 1)) < 1e-15);
    CHECK(std::abs(id(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("non-unitary coin is refused") {
    CoinMatrix bad{{1.0, 1.0, 0.0, 1.0}, CoinLabel::custom};
    CHECK_THROWS_AS(apply_coin(SpinorState::basis(3, 0.0, 0, Level::one), bad), InvalidArgument);
}

TEST_CASE("coin acts bin by bin") {
    SpinorState s = SpinorState::basis(3, 0.0, 2, Level::one);
    s = apply_coin(std::move(s), coin_matrix(pi / 2, -pi / 2));
    CHECK(std::abs(s(2, Level::one) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(s(2, Level::two) - complex(0, 1 / std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("Bessel kick against the quadrature convolution") {
    std::mt19937_64 rng(11);
    const SpinorState s = testing::random_state(rng, 30, 3);
    const SpinorState a = apply_kick_bessel(s, KickParams{-1.45, 0.7});
    const SpinorState b = reference_kick(s, -1.45, 0.7, 20);
    CHECK(testing::max_abs_diff(a, b) < 1e-13);
}

TEST_CASE("Bessel kick against the angle-grid kick") {
    std::mt19937_64 rng(5);
    for (double k : {0.5, 1.45, 3.0, 4.9}) {
        const SpinorState s = testing::random_state(rng, 40, 4);
        const SpinorState a = apply_kick_bessel(s, KickParams{k, -k});
        const SpinorState b = apply_kick_grid(s, KickParams{k, -k});
        CHECK(testing::max_abs_diff(a, b) < 1e-10);
    }
}

TEST_CASE("kick conserves quasimomentum and norm") {
    std::mt19937_64 rng(6);
    const SpinorState s = testing::random_state(rng, 30, 3, 0.21);
    const SpinorState k = apply_kick_bessel(s, KickParams{});
    CHECK(k.beta() == 0.21);
    CHECK(std::abs(k.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("kick inverse") {
    std::mt19937_64 rng(8);
    const SpinorState s = testing::random_state(rng, 30, 3);
    const KickParams k{-1.7, 1.0};
    const SpinorState back = apply_kick_bessel(apply_kick_bessel(s, k), KickParams{-k.k1, -k.k2});
    CHECK(testing::max_abs_diff(back, s) < 1e-13);
}

TEST_CASE("dc prefactor gives the 2k level phase") {
    // A zero-momentum state picks up e^{-ik(1 + cos)}; its n = 0 amplitude
    // is e^{-ik} J_0(k) per level.
    SpinorState s(20, 0.0);
    s(0, Level::one) = 1 / std::sqrt(2.0);
    s(0, Level::two) = 1 / std::sqrt(2.0);
    const double k = 1.45;
    const SpinorState out = apply_kick_bessel(s, KickParams{-k, k});
    const double rel = std::arg(out(0, Level::one) / out(0, Level::two));
    CHECK(rel == doctest::Approx(std::remainder(2 * k, 2 * pi)).epsilon(1e-13));
}

TEST_CASE("ratchet current of a single kick") {
    for (double phi : {0.0, 0.4, pi / 2, 2.5, -1.0}) {
        for (double k : {0.3, 1.45, 2.7}) {
            const SpinorState s = new_ratchet_state(2, phi, 0.0, 30);
            const double dp = mean_momentum(apply_kick_bessel(s, KickParams{k, -k})) - mean_momentum(s);
            CHECK(dp == doctest::Approx(-k * std::sin(phi) / 2).epsilon(1e-12));
        }
    }
}

TEST_CASE("kick guards") {
    SpinorState s = SpinorState::basis(6, 0.0, 0, Level::one);
    CHECK_THROWS_AS(apply_kick_bessel(s, KickParams{-1.45, 1.45}), GridLeakageError);
    SpinorState wide = SpinorState::basis(60, 0.0, 0, Level::one);
    CHECK_THROWS_AS(apply_kick_bessel(wide, KickParams{-1.45, 1.45}, 2), TruncationError);
    CHECK_THROWS_AS(validate_kick(KickParams{-6.0, 1.0}), InvalidArgument);
    CHECK_NOTHROW(validate_kick(KickParams{-5.0, 5.0}));
}

TEST_CASE("free evolution") {
    std::mt19937_64 rng(9);
    const SpinorState s = testing::random_state(rng, 25, 25);
    CHECK(testing::max_abs_diff(apply_free_evolution(s, 4 * pi), s) == 0.0);
    CHECK(testing::max_abs_diff(apply_free_evolution(s, 8 * pi), s) == 0.0);
    const double beta = 0.3;
    const SpinorState t = testing::random_state(rng, 10, 10, beta);
    const SpinorState f = apply_free_evolution(t, 4 * pi);
    for (int n = -10; n <= 10; ++n) {
        const complex expect = t(n, Level::two) * std::exp(complex(0, -4 * pi * (n + beta) * (n + beta) / 2));
        CHECK(std::abs(f(n, Level::two) - expect) < 1e-12);
    }
    CHECK(testing::max_abs_diff(apply_free_evolution(f, -4 * pi), t) < 1e-13);
}

TEST_CASE("ideal shift") {
    SpinorState s(5, 0.0);
    s(0, Level::one) = 0.6;
    s(0, Level::two) = 0.8;
    const SpinorState t = apply_ideal_shift(s, 2);
    CHECK(t(2, Level::one) == complex(0.6));
    CHECK(t(-2, Level::two) == complex(0.8));
    CHECK(t(0, Level::one) == complex{});
    CHECK(testing::max_abs_diff(apply_ideal_shift(t, -2), s) == 0.0);
    CHECK_THROWS_AS(apply_ideal_shift(s, 4), GridLeakageError);
}

TEST_CASE("phase policy") {
    const KickParams k{-1.7, 1.0};
    CHECK(GlobalPhasePolicy::compensated().phase_after_kick(k) == doctest::Approx(2.7));
    CHECK(GlobalPhasePolicy::uncompensated().phase_after_kick(k) == 0.0);
    CHECK(GlobalPhasePolicy::explicit_phase(0.4).phase_after_kick(k) == 0.4);
    CHECK(GlobalPhasePolicy::compensated().phase_after_shift() == 0.0);
    CHECK(GlobalPhasePolicy::explicit_phase(0.4).phase_after_shift() == 0.4);
}

TEST_CASE("fft sizes") {
    CHECK(next_fft_size(1) == 1);
    CHECK(next_fft_size(11) == 12);
    CHECK(next_fft_size(121) == 125);
    CHECK(next_fft_size(2197) == 2205);
}
