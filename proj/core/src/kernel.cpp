#include "sphr/kernel.hpp"

#include "sphr/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sphr {

namespace {

double profile(double q) {
    if (q <= 0.5) return 1.0 + 6.0 * q * q * (q - 1.0);
    if (q <= 1.0) {
        const double t = 1.0 - q;
        return 2.0 * t * t * t;
    }
    return 0.0;
}

double profile_derivative(double q) {
    if (q <= 0.5) return 6.0 * q * (3.0 * q - 2.0);
    if (q <= 1.0) {
        const double t = 1.0 - q;
        return -6.0 * t * t;
    }
    return 0.0;
}

double normalization(const Mat3& q) {
    return 8.0 * std::sqrt(q.det()) / std::numbers::pi;
}

} // namespace

KernelSpec KernelSpec::isotropic(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidArgument("kernel support radius must be positive, got " + std::to_string(h));
    }
    const Mat3 q = Mat3::diagonal(1.0 / (h * h), 1.0 / (h * h), 1.0 / (h * h));
    return KernelSpec(q, 8.0 / (std::numbers::pi * h * h * h), h, true);
}

KernelSpec KernelSpec::metric_adapted(const Mat3& form, double xi_support) {
    if (!(xi_support > 0.0) || !std::isfinite(xi_support)) {
        throw InvalidArgument("kernel xi_support must be positive, got "
                              + std::to_string(xi_support));
    }
    // Validates symmetry and positive-definiteness.
    (void)MetricTensor::from_form(form, MetricKind::mahalanobis);
    Mat3 q = symmetric_part(form);
    q *= 1.0 / xi_support;
    return KernelSpec(q, normalization(q), std::pow(q.det(), -1.0 / 6.0), false);
}

KernelSpec KernelSpec::metric_adapted(const MetricTensor& m, double xi_support) {
    if (!(xi_support > 0.0) || !std::isfinite(xi_support)) {
        throw InvalidArgument("kernel xi_support must be positive, got "
                              + std::to_string(xi_support));
    }
    Mat3 q = m.form();
    q *= 1.0 / xi_support;
    return KernelSpec(q, normalization(q), std::pow(q.det(), -1.0 / 6.0), false);
}

double KernelSpec::value(const Vec3& dx) const {
    if (!is_finite(dx)) {
        throw InvalidArgument("kernel value: non-finite separation");
    }
    const double q2 = quad_form(q_, dx);
    if (q2 >= 1.0) return 0.0;
    return norm_ * profile(std::sqrt(q2));
}

Vec3 KernelSpec::gradient(const Vec3& dx) const {
    if (!is_finite(dx)) {
        throw InvalidArgument("kernel gradient: non-finite separation");
    }
    const double q2 = quad_form(q_, dx);
    if (q2 >= 1.0 || q2 == 0.0) return Vec3{};
    const double q = std::sqrt(q2);
    return (norm_ * profile_derivative(q) / q) * (q_ * dx);
}

KernelSpec pair_spec(const KernelSpec& a, const KernelSpec& b) {
    if (a.is_isotropic() && b.is_isotropic()) {
        return KernelSpec::isotropic(0.5 * (a.support_length() + b.support_length()));
    }
    // Split each form into a det-1 shape and a support length, average both
    // halves, and reassemble. Addition is commutative bit for bit, so the
    // result is identical under argument swap.
    const double len_a = a.support_length();
    const double len_b = b.support_length();
    const Mat3 shape_a = (len_a * len_a) * a.form();
    const Mat3 shape_b = (len_b * len_b) * b.form();
    Mat3 mixed = inverse_sym(0.5 * (inverse_sym(shape_a) + inverse_sym(shape_b)));
    mixed *= std::pow(mixed.det(), -1.0 / 3.0);
    const double len = 0.5 * (len_a + len_b);
    Mat3 q = symmetric_part(mixed);
    q *= 1.0 / (len * len);
    return KernelSpec(q, normalization(q), std::pow(q.det(), -1.0 / 6.0), false);
}

} // namespace sphr
