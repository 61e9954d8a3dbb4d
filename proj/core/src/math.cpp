#include "sphr/math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sphr {

Mat3 inverse_sym(const Mat3& m) {
    const double d = m.det();
    Mat3 inv;
    inv(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    inv(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    inv(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    inv(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    inv(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    inv(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    inv(1, 0) = inv(0, 1);
    inv(2, 0) = inv(0, 2);
    inv(2, 1) = inv(1, 2);
    inv *= 1.0 / d;
    return symmetric_part(inv);
}

namespace {

// Orient so the largest-magnitude component (lowest index on ties) is positive.
Vec3 canonical_sign(Vec3 v) {
    int best = 0;
    double mag = std::abs(v.x);
    if (std::abs(v.y) > mag) { best = 1; mag = std::abs(v.y); }
    if (std::abs(v.z) > mag) { best = 2; }
    if (v[best] < 0.0) v = -v;
    return v;
}

Vec3 normalized(const Vec3& v) {
    return v / norm(v);
}

// Unit eigenvector of (A - eval*I) via the largest cross product of its rows.
// Returns false when the rows are numerically parallel (eigenvalue multiplicity > 1).
bool eigenvector_from_rows(const Mat3& a, double eval, Vec3& out) {
    const Vec3 r0{a(0, 0) - eval, a(0, 1), a(0, 2)};
    const Vec3 r1{a(1, 0), a(1, 1) - eval, a(1, 2)};
    const Vec3 r2{a(2, 0), a(2, 1), a(2, 2) - eval};
    const Vec3 c01 = cross(r0, r1);
    const Vec3 c02 = cross(r0, r2);
    const Vec3 c12 = cross(r1, r2);
    const double n01 = norm2(c01);
    const double n02 = norm2(c02);
    const double n12 = norm2(c12);
    double best = n01;
    Vec3 v = c01;
    if (n02 > best) { best = n02; v = c02; }
    if (n12 > best) { best = n12; v = c12; }
    const double row_scale = std::max({norm2(r0), norm2(r1), norm2(r2)});
    if (best <= 1e-24 * row_scale * row_scale) return false;
    out = v / std::sqrt(best);
    return true;
}

// Orthonormal pair spanning the plane orthogonal to unit vector w.
void orthogonal_complement(const Vec3& w, Vec3& u, Vec3& v) {
    if (std::abs(w.x) > std::abs(w.y)) {
        u = normalized(Vec3{-w.z, 0.0, w.x});
    } else {
        u = normalized(Vec3{0.0, w.z, -w.y});
    }
    v = cross(w, u);
}

// Eigenvector for `eval` constrained to the plane {u, v}.
Vec3 eigenvector_in_plane(const Mat3& a, double eval, const Vec3& u, const Vec3& v) {
    const Vec3 au = a * u;
    const Vec3 av = a * v;
    const double m00 = dot(u, au) - eval;
    const double m01 = dot(u, av);
    const double m11 = dot(v, av) - eval;
    const double abs00 = std::abs(m00);
    const double abs11 = std::abs(m11);
    const double abs01 = std::abs(m01);
    if (abs00 >= abs11) {
        if (std::max(abs00, abs01) > 0.0) {
            const double s = 1.0 / std::hypot(m00, m01);
            return (m01 * s) * u - (m00 * s) * v;
        }
        return u;
    }
    if (std::max(abs11, abs01) > 0.0) {
        const double s = 1.0 / std::hypot(m11, m01);
        return (m11 * s) * u - (m01 * s) * v;
    }
    return u;
}

} // namespace

SymEigen3 eigen_sym3(const Mat3& input) {
    const Mat3 a = symmetric_part(input);
    const double scale = max_abs(a);

    SymEigen3 out;
    if (scale == 0.0) {
        out.values = {0.0, 0.0, 0.0};
        out.vectors = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
        return out;
    }

    const double off2 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off2 <= 1e-30 * scale * scale) {
        // Numerically diagonal: eigenpairs are the diagonal entries and coordinate axes.
        std::array<int, 3> idx{0, 1, 2};
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int l, int r) { return a(l, l) > a(r, r); });
        for (int i = 0; i < 3; ++i) {
            out.values[i] = a(idx[i], idx[i]);
            Vec3 e{};
            e[idx[i]] = 1.0;
            out.vectors[i] = e;
        }
        return out;
    }

    // Analytic eigenvalues of the scaled matrix (trigonometric solution of the
    // characteristic cubic), then eigenvectors via row cross products with an
    // in-plane solve for the clustered pair.
    Mat3 b = a;
    b *= 1.0 / scale;
    const double q = b.trace() / 3.0;
    const double p1 = b(0, 1) * b(0, 1) + b(0, 2) * b(0, 2) + b(1, 2) * b(1, 2);
    const double p2 = (b(0, 0) - q) * (b(0, 0) - q) + (b(1, 1) - q) * (b(1, 1) - q)
                      + (b(2, 2) - q) * (b(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 c = b;
    c(0, 0) -= q;
    c(1, 1) -= q;
    c(2, 2) -= q;
    c *= 1.0 / p;
    const double r = std::clamp(c.det() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e0 = q + 2.0 * p * std::cos(phi);
    const double e2 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e1 = 3.0 * q - e0 - e2;

    Vec3 v0, v1, v2;
    if (e0 - e1 >= e1 - e2) {
        // e0 is the best separated: anchor on it.
        if (!eigenvector_from_rows(b, e0, v0)) v0 = Vec3{1, 0, 0};
        Vec3 u, w;
        orthogonal_complement(v0, u, w);
        v1 = eigenvector_in_plane(b, e1, u, w);
        v2 = cross(v0, v1);
    } else {
        if (!eigenvector_from_rows(b, e2, v2)) v2 = Vec3{0, 0, 1};
        Vec3 u, w;
        orthogonal_complement(v2, u, w);
        v1 = eigenvector_in_plane(b, e1, u, w);
        v0 = cross(v1, v2);
    }

    // Polish: re-orthonormalize and take Rayleigh quotients on the unscaled matrix.
    v0 = normalized(v0);
    v1 = normalized(v1 - dot(v1, v0) * v0);
    v2 = normalized(v2 - dot(v2, v0) * v0 - dot(v2, v1) * v1);

    std::array<double, 3> vals{dot(v0, a * v0), dot(v1, a * v1), dot(v2, a * v2)};
    std::array<Vec3, 3> vecs{v0, v1, v2};
    std::array<int, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int l, int r) { return vals[l] > vals[r]; });
    for (int i = 0; i < 3; ++i) {
        out.values[i] = vals[idx[i]];
        out.vectors[i] = canonical_sign(vecs[idx[i]]);
    }
    return out;
}

} // namespace sphr
