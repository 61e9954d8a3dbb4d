#include "sphr/metric.hpp"

#include "sphr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sphr {

MetricTensor MetricTensor::euclidean() {
    return MetricTensor(Mat3::identity(), MetricKind::euclidean, 1.0, 1.0);
}

MetricTensor MetricTensor::from_form(const Mat3& form, MetricKind kind) {
    if (!is_finite(form)) {
        throw InvalidArgument("metric form has non-finite entries");
    }
    if (kind == MetricKind::euclidean) {
        if (!(form == Mat3::identity())) {
            throw InvalidArgument("euclidean metric must be the identity form");
        }
        return euclidean();
    }
    if (!is_symmetric(form)) {
        throw InvalidArgument("metric form is not symmetric within tolerance");
    }
    const SymEigen3 eig = eigen_sym3(form);
    if (!(eig.values[2] > 0.0)) {
        throw InvalidArgument("metric form is not positive-definite (min eigenvalue "
                              + std::to_string(eig.values[2]) + ")");
    }
    return MetricTensor(symmetric_part(form), kind, eig.values[2], eig.values[0]);
}

double quadratic_distance(const MetricTensor& m, const Vec3& xi, const Vec3& xj) {
    if (!is_finite(xi) || !is_finite(xj)) {
        throw InvalidArgument("quadratic_distance: non-finite input vector");
    }
    return quad_form(m.form(), xi - xj);
}

Mat3 estimate_covariance(const Vec3& center, std::span<const Vec3> neighbor_positions) {
    if (neighbor_positions.empty()) {
        throw InvalidArgument("covariance estimate needs at least one position");
    }
    Mat3 sum = Mat3::zero();
    for (const Vec3& p : neighbor_positions) {
        const Vec3 d = p - center;
        sum += outer(d, d);
    }
    sum *= 1.0 / static_cast<double>(neighbor_positions.size());
    return symmetric_part(sum);
}

MetricTensor invert_spd(const Mat3& s, double floor_fraction, MetricKind kind) {
    if (!(floor_fraction > 0.0) || floor_fraction > 1.0) {
        throw InvalidArgument("floor_fraction must lie in (0, 1], got "
                              + std::to_string(floor_fraction));
    }
    if (!is_finite(s)) {
        throw InvalidArgument("invert_spd: non-finite input matrix");
    }
    if (!is_symmetric(s)) {
        throw InvalidArgument("invert_spd: input is not symmetric within tolerance");
    }
    const SymEigen3 eig = eigen_sym3(s);
    const double lambda_max = eig.values[0];
    if (!(lambda_max > 0.0)) {
        // Zero (or negative-roundoff) moment matrix: declared identity fallback.
        return MetricTensor::from_form(Mat3::identity(), kind);
    }
    const double floor = floor_fraction * lambda_max;
    Mat3 form = Mat3::zero();
    for (int i = 0; i < 3; ++i) {
        const double lambda = std::max(eig.values[i], floor);
        form += (1.0 / lambda) * outer(eig.vectors[i], eig.vectors[i]);
    }
    return MetricTensor::from_form(symmetric_part(form), kind);
}

MetricTensor det_normalized(const MetricTensor& m) {
    const double d = m.form().det();
    if (!(d > 0.0)) {
        throw NumericError("metric form determinant not positive: " + std::to_string(d));
    }
    Mat3 form = m.form();
    form *= std::pow(d, -1.0 / 3.0);
    return MetricTensor::from_form(form, m.kind());
}

Ellipsoid neighbor_ellipsoid(const MetricTensor& m, const Vec3& center, double xi_max) {
    if (!(xi_max > 0.0) || !std::isfinite(xi_max)) {
        throw InvalidArgument("neighbor_ellipsoid: xi_max must be positive, got "
                              + std::to_string(xi_max));
    }
    if (!is_finite(center)) {
        throw InvalidArgument("neighbor_ellipsoid: non-finite center");
    }
    const SymEigen3 eig = eigen_sym3(m.form());
    Ellipsoid e;
    e.center = center;
    // Ascending eigenvalues give descending semi-axes.
    for (int i = 0; i < 3; ++i) {
        e.axes[i] = eig.vectors[2 - i];
        e.semi_axes[i] = std::sqrt(xi_max / eig.values[2 - i]);
    }
    return e;
}

} // namespace sphr
