#pragma once

#include "sphr/math.hpp"

#include <array>
#include <span>

namespace sphr {

enum class MetricKind { euclidean, mahalanobis, stress };

/// A symmetric positive-definite quadratic form defining anisotropic distance.
///
/// The stored matrix is the *inverse* tensor entering the form: the inverse
/// covariance for the mahalanobis kind, the inverse stress tensor for the
/// stress kind, and exactly the identity for the euclidean kind. Distances
/// measured by it are squared (length^2 under an inverse-covariance form);
/// all ordering comparisons use the squared value directly and square roots
/// are taken only for reporting.
class MetricTensor {
public:
    /// Identity form.
    static MetricTensor euclidean();

    /// Validates symmetry (1e-12 relative) and positive-definiteness.
    /// The euclidean kind is reserved for the identity; use euclidean().
    static MetricTensor from_form(const Mat3& form, MetricKind kind = MetricKind::mahalanobis);

    const Mat3& form() const noexcept { return form_; }
    MetricKind kind() const noexcept { return kind_; }

    /// Smallest eigenvalue, cached at construction. Lower-bounds the form:
    /// xi(dx) >= min_eigenvalue * |dx|^2, the inequality k-NN pruning relies on.
    double min_eigenvalue() const noexcept { return lambda_min_; }
    double max_eigenvalue() const noexcept { return lambda_max_; }

private:
    MetricTensor(const Mat3& form, MetricKind kind, double lmin, double lmax)
        : form_(form), kind_(kind), lambda_min_(lmin), lambda_max_(lmax) {}

    Mat3 form_;
    MetricKind kind_;
    double lambda_min_;
    double lambda_max_;
};

/// Squared anisotropic distance (x_i - x_j)^T M (x_i - x_j).
/// Symmetric in its arguments and zero iff they coincide.
double quadratic_distance(const MetricTensor& m, const Vec3& xi, const Vec3& xj);

/// Second-moment matrix (1/k) sum_j (x_j - center)(x_j - center)^T about the
/// query position. Symmetric positive-semidefinite; throws on an empty list.
Mat3 estimate_covariance(const Vec3& center, std::span<const Vec3> neighbor_positions);

/// Inverts a symmetric PSD matrix in its eigenbasis, clamping eigenvalues below
/// floor_fraction * lambda_max up to that floor so degenerate (flattened or
/// rank-deficient) moment matrices still produce a valid form. An all-zero
/// input falls back to the identity form.
MetricTensor invert_spd(const Mat3& s, double floor_fraction = 1e-3,
                        MetricKind kind = MetricKind::mahalanobis);

/// Rescales the form so det = 1: the tensor then controls neighborhood shape
/// while the neighbor count controls effective volume.
MetricTensor det_normalized(const MetricTensor& m);

/// Level set {x : (x - center)^T M (x - center) = xi_max} of a metric form.
struct Ellipsoid {
    Vec3 center;
    std::array<Vec3, 3> axes;       ///< orthonormal principal directions
    std::array<double, 3> semi_axes; ///< descending, semi_axes[i] pairs with axes[i]
};

/// Boundary of the neighborhood at squared distance xi_max: principal axes are
/// the form's eigenvectors, semi-axis lengths sqrt(xi_max / lambda).
Ellipsoid neighbor_ellipsoid(const MetricTensor& m, const Vec3& center, double xi_max);

} // namespace sphr
