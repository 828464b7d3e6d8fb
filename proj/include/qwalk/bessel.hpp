#pragma once

#include <vector>

namespace qwalk {

/// J_0(x) .. J_max_order(x), Bessel functions of the first kind.
///
/// Miller's backward recurrence normalized with J_0 + 2 sum J_2k = 1, which is
/// stable for every order at once and accurate to a few ulp for |x| well below
/// the starting order. Negative x uses J_m(-x) = (-1)^m J_m(x).
std::vector<double> bessel_j_table(int max_order, double x);

/// Smallest M with sum_{|m| <= M} J_m(k)^2 > 1 - tolerance.
int minimal_kick_order(double k, double tolerance = 1e-12);

/// Expansion order used for a kick of strength k: 40 up to |k| = 3, grown
/// with k beyond that so completeness keeps a wide margin.
int default_truncation_order(double k);

/// 1 - sum_{|m| <= order} J_m(k)^2, the probability a truncated kick drops.
double truncation_defect(double k, int order);

}  // namespace qwalk
