// geometry.hpp - small fixed-size vector/matrix types shared by every module.
//
// Positions are double precision throughout; the renderer converts to screen
// space on its own.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mvedit {

struct Vec3 {
    double x{}, y{}, z{};

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    const double len = length(v);
    return len > 0.0 ? v / len : Vec3{};
}

inline Vec3 component_min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}

inline Vec3 component_max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Row-major 3x3 matrix. Used for rotations and the camera basis.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
    }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        return {{c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z}};
    }

    double operator()(int r, int c) const { return m[static_cast<size_t>(r * 3 + c)]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(r * 3 + c)]; }

    Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
    Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

    Vec3 operator*(const Vec3& v) const { return {dot(row(0), v), dot(row(1), v), dot(row(2), v)}; }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r(i, j) = dot(row(i), o.column(j));
        return r;
    }
    Mat3 transposed() const { return from_columns(row(0), row(1), row(2)); }

    bool operator==(const Mat3&) const = default;
};

// Unit quaternion (w, x, y, z). Only used to carry primitive orientations.
struct Quat {
    double w{1}, x{}, y{}, z{};

    Mat3 to_matrix() const {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        const double qw = w / n, qx = x / n, qy = y / n, qz = z / n;
        Mat3 r;
        r(0, 0) = 1 - 2 * (qy * qy + qz * qz);
        r(0, 1) = 2 * (qx * qy - qz * qw);
        r(0, 2) = 2 * (qx * qz + qy * qw);
        r(1, 0) = 2 * (qx * qy + qz * qw);
        r(1, 1) = 1 - 2 * (qx * qx + qz * qz);
        r(1, 2) = 2 * (qy * qz - qx * qw);
        r(2, 0) = 2 * (qx * qz - qy * qw);
        r(2, 1) = 2 * (qy * qz + qx * qw);
        r(2, 2) = 1 - 2 * (qx * qx + qy * qy);
        return r;
    }

    bool operator==(const Quat&) const = default;
};

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void expand(const Vec3& p) {
        lo = component_min(lo, p);
        hi = component_max(hi, p);
    }
    bool empty() const { return lo.x > hi.x; }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return (lo + hi) * 0.5; }
    bool contains(const Vec3& p, double eps = 0.0) const {
        return p.x >= lo.x - eps && p.x <= hi.x + eps && p.y >= lo.y - eps && p.y <= hi.y + eps &&
               p.z >= lo.z - eps && p.z <= hi.z + eps;
    }
};

// Any unit vector orthogonal to n (n must be unit length).
// Branchless construction from Duff et al., "Building an Orthonormal Basis, Revisited".
inline void orthonormal_basis(const Vec3& n, Vec3& b1, Vec3& b2) {
    const double sign = std::copysign(1.0, n.z);
    const double a = -1.0 / (sign + n.z);
    const double b = n.x * n.y * a;
    b1 = {1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x};
    b2 = {b, sign + n.y * n.y * a, -n.y};
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace mvedit
