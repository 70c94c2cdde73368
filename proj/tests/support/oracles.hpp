#pragma once

// Reference computations that do not go through the library's own
// pseudoinverse or image formula.

#include "acyl/linalg.hpp"
#include "generators.hpp"

namespace acyl::testing {

/// (A^T A + eps I)^-1 A^T evaluated in binary128 and rounded back.
Mat tikhonov_pinv_quad(const Mat& a, double eps);

/// min x^T Q x subject to C x = y, through an LU kernel basis and a
/// least-squares solve. C must have full row rank.
double min_form_on_fiber(const Mat& q, const Mat& c, const Vec& y);

/// (C (Q + eps I)^-1 C^T)^-1 in binary128: image of the inflated ellipsoid.
Mat inflated_image(const Mat& q, const Mat& c, double eps);

/// Point with x^T Q x <= 1; `boundary` puts it on x^T Q x = 1 when Q x != 0.
/// Kernel components of size up to `spread` are added on top.
Vec sample_in_cylinder(Gen& g, const Mat& q, bool boundary, double spread = 10.0);

/// z' = -lambda z + b f, g f^2 <= 1. Largest p certifying {p z^2 <= 1} at alpha
/// (0 when alpha >= 2 lambda), and the optimal bound b^2 / (g lambda^2).
double scalar_certificate(double lambda, double b, double g, double alpha);
double scalar_bound(double lambda, double b, double g);

}  // namespace acyl::testing
