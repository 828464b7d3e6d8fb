#include "qwalk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

struct Window {
    int first;
    int last;
};

Window resolve_window(std::size_t size, int first_step, int last_step) {
    const int last = last_step < 0 ? static_cast<int>(size) - 1 : last_step;
    if (first_step < 1 || last >= static_cast<int>(size) || last - first_step + 1 < 3) {
        throw InvalidArgument("fit window [" + std::to_string(first_step) + ", " + std::to_string(last) +
                              "] needs at least 3 steps >= 1 inside a record of " + std::to_string(size) + " entries");
    }
    return {first_step, last};
}

double residual_sum(std::span<const double> x, std::span<const double> y, const LineFit& f) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    return rss;
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("line fit needs two equally long series of at least 2 points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw InvalidArgument("line fit with all x equal");
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

ScalingFit fit_scaling(std::span<const double> sigma, int first_step, int last_step) {
    const Window w = resolve_window(sigma.size(), first_step, last_step);
    std::vector<double> lx;
    std::vector<double> ly;
    for (int j = w.first; j <= w.last; ++j) {
        const double s = sigma[static_cast<std::size_t>(j)];
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw InvalidArgument("degenerate sigma at step " + std::to_string(j) + ": scaling fit needs sigma > 0");
        }
        lx.push_back(std::log(static_cast<double>(j)));
        ly.push_back(std::log(s));
    }
    const LineFit f = fit_line(lx, ly);
    return {f.slope, std::exp(f.intercept), w.first, w.last, f.r_squared};
}

std::vector<double> sigma_series(const WalkRecord& record) {
    std::vector<double> s;
    s.reserve(record.steps.size());
    for (const StepRecord& r : record.steps) {
        s.push_back(r.stddev);
    }
    return s;
}

ScalingFit fit_scaling(const WalkRecord& record, int first_step, int last_step) {
    return fit_scaling(sigma_series(record), first_step, last_step);
}

double total_variation(const Distribution& a, const Distribution& b) {
    if (a.grid_half_width != b.grid_half_width || a.probabilities.size() != b.probabilities.size()) {
        throw InvalidArgument("total variation needs distributions on the same grid (half widths " +
                              std::to_string(a.grid_half_width) + " and " + std::to_string(b.grid_half_width) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
        sum += std::abs(a.probabilities[i] - b.probabilities[i]);
    }
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

std::vector<Peak> peak_positions(const Distribution& dist, double relative_floor) {
    const auto& p = dist.probabilities;
    std::vector<Peak> peaks;
    if (p.empty()) {
        return peaks;
    }
    const double floor = relative_floor * *std::max_element(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double left = i > 0 ? p[i - 1] : -std::numeric_limits<double>::infinity();
        const double right = i + 1 < p.size() ? p[i + 1] : -std::numeric_limits<double>::infinity();
        if (p[i] > left && p[i] > right && p[i] >= floor && p[i] > 0.0) {
            peaks.push_back({static_cast<int>(i) - dist.grid_half_width, p[i]});
        }
    }
    return peaks;
}

std::optional<int> outer_peak_separation(const Distribution& dist, double relative_floor) {
    const auto peaks = peak_positions(dist, relative_floor);
    if (peaks.size() < 2) {
        return std::nullopt;
    }
    return peaks.back().n - peaks.front().n;
}

GrowthComparison compare_growth_models(std::span<const double> sigma, int first_step, int last_step) {
    const Window w = resolve_window(sigma.size(), first_step, last_step);
    std::vector<double> j;
    std::vector<double> rj;
    std::vector<double> y;
    for (int s = w.first; s <= w.last; ++s) {
        j.push_back(static_cast<double>(s));
        rj.push_back(std::sqrt(static_cast<double>(s)));
        y.push_back(sigma[static_cast<std::size_t>(s)]);
    }
    const double n = static_cast<double>(y.size());
    auto aic = [&](std::span<const double> x) {
        const double rss = std::max(residual_sum(x, y, fit_line(x, y)), 1e-300);
        return n * std::log(rss / n) + 2.0 * 2.0;
    };
    return {aic(j), aic(rj)};
}

}  // namespace qwalk
