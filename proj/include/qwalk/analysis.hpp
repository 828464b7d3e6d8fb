#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qwalk/state.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

/// sigma(j) = prefactor * j^exponent, fitted in log-log over [first_step, last_step].
struct ScalingFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    int first_step = 0;
    int last_step = 0;
    double r_squared = 0.0;
};

/// Steps 0-2 are transient and excluded by default. last_step < 0 means the
/// final record. Throws InvalidArgument on fewer than 3 points or sigma <= 0.
ScalingFit fit_scaling(const WalkRecord& record, int first_step = 3, int last_step = -1);
/// Same on a sigma series indexed by step (sigma[0] is the initial state).
ScalingFit fit_scaling(std::span<const double> sigma, int first_step = 3, int last_step = -1);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;  ///< squared Pearson correlation
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// (1/2) sum |a - b|. Throws InvalidArgument when the grids differ.
double total_variation(const Distribution& a, const Distribution& b);

struct Peak {
    int n = 0;
    double probability = 0.0;
};

/// Strict local maxima with P(n) >= relative_floor * max P.
std::vector<Peak> peak_positions(const Distribution& dist, double relative_floor = 0.02);

/// Distance between the outermost peaks; empty with fewer than two peaks.
std::optional<int> outer_peak_separation(const Distribution& dist, double relative_floor = 0.02);

/// Least-squares fits of sigma = a + b j and sigma = a + b sqrt(j) over the
/// window, compared by AIC (equal parameter counts, so this ranks residuals).
struct GrowthComparison {
    double aic_linear = 0.0;
    double aic_sqrt = 0.0;
    bool sqrt_preferred() const noexcept { return aic_sqrt < aic_linear; }
};

GrowthComparison compare_growth_models(std::span<const double> sigma, int first_step = 3, int last_step = -1);

/// stddev column of a record.
std::vector<double> sigma_series(const WalkRecord& record);

}  // namespace qwalk
