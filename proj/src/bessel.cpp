#include "qwalk/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

std::vector<double> bessel_j_table(int max_order, double x) {
    if (max_order < 0) {
        throw InvalidArgument("Bessel table order must be non-negative");
    }
    if (!std::isfinite(x)) {
        throw InvalidArgument("Bessel argument must be finite");
    }
    std::vector<double> j(static_cast<std::size_t>(max_order) + 1, 0.0);
    const double ax = std::abs(x);
    if (ax == 0.0) {
        j[0] = 1.0;
        return j;
    }

    // Start far enough above both the requested order and the argument that
    // the dominant (Y-like) solution has died out by the time we reach them.
    const int base = std::max(max_order, static_cast<int>(std::ceil(ax)));
    int start = base + 30 + static_cast<int>(std::sqrt(40.0 * base));
    start += start % 2;

    double next = 0.0;  // J_{m+1}
    double curr = 1e-300;  // J_m, arbitrary scale
    double norm = 0.0;
    for (int m = start; m >= 1; --m) {
        const double prev = 2.0 * m / ax * curr - next;  // J_{m-1}
        next = curr;
        curr = prev;
        const int order = m - 1;
        if (order <= max_order) {
            j[static_cast<std::size_t>(order)] = curr;
        }
        if (order > 0 && order % 2 == 0) {
            norm += 2.0 * curr;
        }
        if (std::abs(curr) > 1e250) {
            curr *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for (double& v : j) {
                v *= 1e-250;
            }
        }
    }
    norm += curr;  // J_0 term
    for (double& v : j) {
        v /= norm;
    }
    if (x < 0.0) {
        for (std::size_t m = 1; m < j.size(); m += 2) {
            j[m] = -j[m];
        }
    }
    return j;
}

double truncation_defect(double k, int order) {
    const auto j = bessel_j_table(order, k);
    double sum = j[0] * j[0];
    for (std::size_t m = 1; m < j.size(); ++m) {
        sum += 2.0 * j[m] * j[m];
    }
    return 1.0 - sum;
}

int minimal_kick_order(double k, double tolerance) {
    const int cap = static_cast<int>(std::ceil(std::abs(k))) * 2 + 60;
    const auto j = bessel_j_table(cap, k);
    double sum = j[0] * j[0];
    if (sum > 1.0 - tolerance) {
        return 0;
    }
    for (int m = 1; m <= cap; ++m) {
        sum += 2.0 * j[static_cast<std::size_t>(m)] * j[static_cast<std::size_t>(m)];
        if (sum > 1.0 - tolerance) {
            return m;
        }
    }
    throw TruncationError("no Bessel order up to " + std::to_string(cap) + " reaches completeness for k = " +
                          std::to_string(k));
}

int default_truncation_order(double k) {
    const double ak = std::abs(k);
    if (ak <= 3.0) {
        return 40;
    }
    return std::max(40, 2 * minimal_kick_order(ak, 1e-14) + 10);
}

}  // namespace qwalk
