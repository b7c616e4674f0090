#pragma once

// Rotation and frame primitives.
//
// Frame convention used throughout the library:
//   * XYU is the local navigation frame, third axis pointing up. Gravity is
//     g = (0, 0, -g0).
//   * An orientation matrix C maps XYU coordinates to body coordinates:
//     a_body = C * a_xyu. Hence C^T * f resolves a body-frame specific force
//     in XYU.
//   * V(a) is the frame-update matrix for a body that turned by the vector
//     angle a (body axes): C_new = V(a) * C_old. In terms of the usual
//     cross-product matrix [a]x this is V(a) = exp(-[a]x) = exp(skew(a)).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "footnav/errors.hpp"

namespace footnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RotMat = Eigen::Matrix3d;
using SkewMat = Eigen::Matrix3d;

constexpr double kDefaultGravity = 9.81;
constexpr double kSmallAngle = 1e-12;

inline Vec3 gravity_vector(double g0 = kDefaultGravity) { return Vec3(0.0, 0.0, -g0); }

/// Skew-symmetric matrix with the component layout
///   [  0   b3  -b2 ]
///   [ -b3   0   b1 ]
///   [  b2 -b1    0 ]
/// so that skew(b) * x == x.cross(b).
inline SkewMat skew(const Vec3& b) {
    SkewMat m;
    m << 0.0, b.z(), -b.y(),
        -b.z(), 0.0, b.x(),
         b.y(), -b.x(), 0.0;
    return m;
}

/// Closed-form Rodrigues frame update V(a) = exp(skew(a)).
inline RotMat rotation_from_vector_angle(const Vec3& a) {
    const double angle = a.norm();
    const SkewMat s = skew(a);
    if (angle < kSmallAngle) {
        return RotMat::Identity() + s + 0.5 * s * s;
    }
    const double sin_term = std::sin(angle) / angle;
    const double cos_term = (1.0 - std::cos(angle)) / (angle * angle);
    return RotMat::Identity() + sin_term * s + cos_term * s * s;
}

/// Inverse of rotation_from_vector_angle for angles below pi.
inline Vec3 vector_angle_from_rotation(const RotMat& r) {
    const double cos_angle = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
    const double angle = std::acos(cos_angle);
    const Mat3 asym = 0.5 * (r - r.transpose());
    const Vec3 v(asym(1, 2), asym(2, 0), asym(0, 1));
    if (angle < 1e-6) return v * (1.0 + angle * angle / 6.0);
    return v * (angle / std::sin(angle));
}

/// Nearest rotation matrix in the Frobenius sense (polar projection via SVD).
inline RotMat orthonormalize(const Mat3& c) {
    Eigen::JacobiSVD<Mat3> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RotMat r = svd.matrixU() * svd.matrixV().transpose();
    if (!(r.determinant() > 0.0)) {
        throw Error(ErrorCode::NotRotation, "orthonormalize: projection has non-positive determinant");
    }
    return r;
}

inline bool is_rotation(const Mat3& c, double tol = 1e-9) {
    return (c.transpose() * c - Mat3::Identity()).norm() < tol && std::abs(c.determinant() - 1.0) < tol;
}

/// Active rotation of XYU vectors about the up axis by `angle` (counter-clockwise
/// seen from above).
inline Mat3 rotation_about_up(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

/// Orientation (XYU -> body) of a body with yaw/pitch/roll angles, where the
/// body-to-XYU matrix is Rz(yaw) * Ry(pitch) * Rx(roll).
inline RotMat orientation_from_euler(double roll, double pitch, double yaw) {
    const Mat3 body_to_xyu = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                              Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                              Eigen::AngleAxisd(roll, Vec3::UnitX())).toRotationMatrix();
    return body_to_xyu.transpose();
}

/// Heading of the body x axis in the XYU horizontal plane.
inline double yaw_of(const RotMat& c) {
    // column 0 of C^T is the body x axis in XYU
    return std::atan2(c(0, 1), c(0, 0));
}

inline double wrap_angle(double angle) {
    double r = std::remainder(angle, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace footnav
