#include <doctest.h>

#include <cmath>
#include <random>

#include "qwalk/analysis.hpp"
#include "qwalk/errors.hpp"

using namespace qwalk;

namespace {

Distribution random_distribution(std::mt19937_64& rng, int half) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Distribution d;
    d.grid_half_width = half;
    double total = 0.0;
    for (int i = 0; i < 2 * half + 1; ++i) {
        d.probabilities.push_back(u(rng) < 0.3 ? 0.0 : u(rng));
        total += d.probabilities.back();
    }
    for (double& p : d.probabilities) p /= total;
    return d;
}

Distribution delta(int half, int n) {
    Distribution d;
    d.grid_half_width = half;
    d.probabilities.assign(static_cast<std::size_t>(2 * half + 1), 0.0);
    d.probabilities[static_cast<std::size_t>(n + half)] = 1.0;
    return d;
}

}  // namespace

TEST_CASE("power law recovered exactly") {
    for (double gamma : {0.5, 0.93, 1.0, 1.7}) {
        std::vector<double> s{0.0};
        for (int j = 1; j <= 15; ++j) s.push_back(2.3 * std::pow(j, gamma));
        const ScalingFit f = fit_scaling(s);
        CHECK(std::abs(f.exponent - gamma) < 1e-9);
        CHECK(f.prefactor == doctest::Approx(2.3).epsilon(1e-9));
        CHECK(f.first_step == 3);
        CHECK(f.last_step == 15);
        CHECK(f.r_squared == doctest::Approx(1.0));
    }
}

TEST_CASE("classical reference scales as sqrt(j)") {
    std::vector<double> s;
    for (int j = 0; j <= 15; ++j) s.push_back(std_dev(classical_walk_reference(j, 0.5, 15)));
    CHECK(std::abs(fit_scaling(s).exponent - 0.5) < 1e-6);
}

TEST_CASE("ideal Hadamard walk spreads ballistically") {
    WalkConfig c;
    c.shift = ShiftKind::ideal;
    c.initial_components = 1;
    const ScalingFit f = fit_scaling(run_walk(c));
    CHECK(f.exponent >= 0.9);
    CHECK(f.exponent <= 1.1);
}

TEST_CASE("noisy walk spreads slower than the quantum walk") {
    WalkConfig c;
    const double quantum = fit_scaling(run_walk(c)).exponent;
    c.noise_fraction = 0.2;
    c.num_noise_realizations = 200;
    c.seed = 1;
    const double noisy = fit_scaling(run_ensemble(c)).exponent;
    CHECK(noisy < quantum);
}

TEST_CASE("scaling fit errors") {
    const std::vector<double> zeros(16, 0.0);
    CHECK_THROWS_WITH_AS(fit_scaling(zeros), doctest::Contains("degenerate sigma"), InvalidArgument);
    const std::vector<double> short_series{0.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(fit_scaling(short_series), InvalidArgument);
    const std::vector<double> ok{0, 1, 2, 3, 4, 5};
    CHECK_THROWS_AS(fit_scaling(ok, 0), InvalidArgument);
    CHECK_NOTHROW(fit_scaling(ok, 1, 3));
}

TEST_CASE("line fit") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{3, 5, 7, 9};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
}

TEST_CASE("total variation basics") {
    std::mt19937_64 rng(1);
    const Distribution d = random_distribution(rng, 6);
    CHECK(total_variation(d, d) == 0.0);
    CHECK(total_variation(delta(4, -2), delta(4, 3)) == 1.0);
    CHECK_THROWS_AS(total_variation(delta(4, 0), delta(5, 0)), InvalidArgument);
}

TEST_CASE("total variation is a metric") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 500; ++i) {
        const Distribution a = random_distribution(rng, 5);
        const Distribution b = random_distribution(rng, 5);
        const Distribution c = random_distribution(rng, 5);
        const double ab = total_variation(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab == total_variation(b, a));
        CHECK(total_variation(a, c) <= ab + total_variation(b, c) + 1e-15);
    }
}

TEST_CASE("peaks") {
    const auto single = peak_positions(delta(5, 2));
    REQUIRE(single.size() == 1);
    CHECK(single[0].n == 2);
    CHECK(single[0].probability == 1.0);
    CHECK_FALSE(outer_peak_separation(delta(5, 2)));

    Distribution d;
    d.grid_half_width = 4;
    d.probabilities = {0.0, 0.3, 0.05, 0.1, 0.005, 0.008, 0.01, 0.4, 0.035};
    const auto peaks = peak_positions(d);
    REQUIRE(peaks.size() == 3);
    CHECK(peaks[0].n == -3);
    CHECK(peaks[1].n == -1);
    CHECK(peaks[2].n == 3);
    CHECK(*outer_peak_separation(d) == 6);
    CHECK(peak_positions(d, 0.5).size() == 2);
    CHECK(peak_positions(d, 0.8).size() == 1);
}

TEST_CASE("growth model comparison") {
    std::vector<double> lin{0.0};
    std::vector<double> diff{0.0};
    for (int j = 1; j <= 15; ++j) {
        lin.push_back(0.5 + 0.9 * j + 0.01 * std::sin(j));
        diff.push_back(0.2 + 1.1 * std::sqrt(j) + 0.01 * std::cos(j));
    }
    CHECK_FALSE(compare_growth_models(lin).sqrt_preferred());
    CHECK(compare_growth_models(diff).sqrt_preferred());
}

