#pragma once

#include "sphr/math.hpp"
#include "sphr/metric.hpp"

namespace sphr {

/// Compact-support cubic B-spline smoothing weight.
///
/// The profile in the support coordinate q on [0, 1]:
///
///     w(q) = 1 - 6 q^2 + 6 q^3        q <= 1/2
///     w(q) = 2 (1 - q)^3              1/2 < q <= 1
///     w(q) = 0                        q > 1
///
/// Isotropic support of radius h uses q = r/h and the normalization
/// 8/(pi h^3); a metric-adapted support uses q^2 = dx^T Q dx with
/// normalization 8 sqrt(det Q)/pi, which integrates to one over space for
/// any symmetric positive-definite Q. The isotropic case is the special
/// form Q = I/h^2, and both run through the same code path.
class KernelSpec {
public:
    /// Spherical support of radius h > 0.
    static KernelSpec isotropic(double h);

    /// Ellipsoidal support {dx : dx^T form dx <= xi_support}.
    static KernelSpec metric_adapted(const Mat3& form, double xi_support = 1.0);
    static KernelSpec metric_adapted(const MetricTensor& m, double xi_support = 1.0);

    /// W(dx): non-negative, maximal at dx = 0, exactly zero outside support.
    double value(const Vec3& dx) const;

    /// Analytic gradient of W with respect to the first particle position at
    /// separation dx = x_i - x_j; zero at dx = 0 and outside support.
    Vec3 gradient(const Vec3& dx) const;

    /// W(0), the peak value (equals the normalization constant).
    double peak() const noexcept { return norm_; }

    /// Geometric-mean semi-axis of the support: h for isotropic specs. The
    /// pair scale the artificial-viscosity term measures separations by.
    double support_length() const noexcept { return support_length_; }

    /// Unit-support quadratic form Q (q^2 = dx^T Q dx).
    const Mat3& form() const noexcept { return q_; }

    bool is_isotropic() const noexcept { return iso_; }

private:
    KernelSpec(const Mat3& q, double norm, double support_length, bool iso)
        : q_(q), norm_(norm), support_length_(support_length), iso_(iso) {}

    friend KernelSpec pair_spec(const KernelSpec& a, const KernelSpec& b);

    Mat3 q_;
    double norm_;
    double support_length_;
    bool iso_;
};

/// Shared spec for a pair of particles, symmetric in its arguments bit for
/// bit, so W_ij = W_ji and grad_i W_ij = -grad_j W_ji hold exactly.
///
/// Isotropic pairs average the radii: h_ij = (h_i + h_j)/2. Metric-adapted
/// pairs average the shapes in inverse-form space (renormalizing det back to
/// one) and average the support lengths, which reduces to the isotropic rule
/// when both shapes are spherical.
KernelSpec pair_spec(const KernelSpec& a, const KernelSpec& b);

} // namespace sphr
