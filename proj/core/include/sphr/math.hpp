#pragma once

#include <array>
#include <cmath>

namespace sphr {

/// 3-component vector, the basic geometric type of the engine.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
    double& operator[](int a) { return a == 0 ? x : (a == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= 1.0 / s; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec3& a, const Vec3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm2(const Vec3& a) { return dot(a, a); }

inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline bool is_finite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Dense 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> a{};

    static constexpr Mat3 zero() { return {}; }
    static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static constexpr Mat3 diagonal(double dx, double dy, double dz) {
        return Mat3{{dx, 0, 0, 0, dy, 0, 0, 0, dz}};
    }

    constexpr double operator()(int r, int c) const { return a[3 * r + c]; }
    double& operator()(int r, int c) { return a[static_cast<std::size_t>(3 * r + c)]; }

    constexpr Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) a[i] += o.a[i];
        return *this;
    }
    constexpr Mat3& operator-=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) a[i] -= o.a[i];
        return *this;
    }
    constexpr Mat3& operator*=(double s) {
        for (double& v : a) v *= s;
        return *this;
    }

    friend constexpr Mat3 operator+(Mat3 m, const Mat3& o) { return m += o; }
    friend constexpr Mat3 operator-(Mat3 m, const Mat3& o) { return m -= o; }
    friend constexpr Mat3 operator*(Mat3 m, double s) { return m *= s; }
    friend constexpr Mat3 operator*(double s, Mat3 m) { return m *= s; }
    friend constexpr bool operator==(const Mat3& m, const Mat3& o) { return m.a == o.a; }

    friend constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
        return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
                m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
                m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
    }

    constexpr double trace() const { return a[0] + a[4] + a[8]; }

    constexpr double det() const {
        return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
               + a[2] * (a[3] * a[7] - a[4] * a[6]);
    }

    constexpr Mat3 transposed() const {
        return Mat3{{a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]}};
    }
};

constexpr Mat3 outer(const Vec3& u, const Vec3& v) {
    return Mat3{{u.x * v.x, u.x * v.y, u.x * v.z,
                 u.y * v.x, u.y * v.y, u.y * v.z,
                 u.z * v.x, u.z * v.y, u.z * v.z}};
}

/// v^T M v. The hot quadratic form; exploits nothing, trusts the optimizer.
constexpr double quad_form(const Mat3& m, const Vec3& v) {
    const Vec3 mv = m * v;
    return dot(v, mv);
}

inline double max_abs(const Mat3& m) {
    double r = 0.0;
    for (double v : m.a) r = std::max(r, std::abs(v));
    return r;
}

/// Symmetric within `rel_tol` of the largest entry magnitude.
inline bool is_symmetric(const Mat3& m, double rel_tol = 1e-12) {
    const double scale = max_abs(m);
    const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);
    return std::abs(m(0, 1) - m(1, 0)) <= tol && std::abs(m(0, 2) - m(2, 0)) <= tol
           && std::abs(m(1, 2) - m(2, 1)) <= tol;
}

constexpr Mat3 symmetric_part(const Mat3& m) {
    return 0.5 * (m + m.transposed());
}

inline bool is_finite(const Mat3& m) {
    for (double v : m.a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

/// Inverse of a symmetric 3x3 matrix via the adjugate. Caller guarantees det != 0.
Mat3 inverse_sym(const Mat3& m);

/// Eigendecomposition of a symmetric 3x3 matrix.
///
/// Deterministic by construction: analytic (trigonometric) eigenvalues, cross-product
/// eigenvectors with an orthogonal-complement fallback for clustered eigenvalues,
/// followed by a Gram-Schmidt polish. Results are sorted by descending eigenvalue and
/// each eigenvector is oriented so its largest-magnitude component is positive.
struct SymEigen3 {
    std::array<double, 3> values;  ///< descending
    std::array<Vec3, 3> vectors;   ///< orthonormal, values[i] pairs with vectors[i]
};

/// Decomposes the symmetric part of `m`.
SymEigen3 eigen_sym3(const Mat3& m);

} // namespace sphr
