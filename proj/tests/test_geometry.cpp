#include <gtest/gtest.h>

#include <numbers>

#include "footnav/geometry.hpp"
#include "oracles.hpp"

using namespace footnav;

namespace {

Vec3 random_vec(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return Vec3(u(rng), u(rng), u(rng));
}

Mat3 to_eigen(const std::array<std::array<double, 3>, 3>& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m[i][j];
    return r;
}

RotMat random_rotation(std::mt19937_64& rng) {
    const Vec3 a = random_vec(rng, 1.0);
    return to_eigen(oracle::Quat::axis_angle({a.x(), a.y(), a.z()}, 3.0 * a.norm()).matrix());
}

}  // namespace

TEST(VectorAngle, ZeroIsIdentity) { EXPECT_EQ(rotation_from_vector_angle(Vec3::Zero()), Mat3::Identity()); }

TEST(VectorAngle, QuarterTurnMatchesQuaternionOracle) {
    const Vec3 a(0.0, 0.0, std::numbers::pi / 2);
    const Vec3 x = rotation_from_vector_angle(a) * Vec3::UnitX();
    const auto expected = oracle::Quat::axis_angle({0, 0, 1}, -std::numbers::pi / 2).rotate({1, 0, 0});
    EXPECT_NEAR(x.norm(), 1.0, 1e-15);
    EXPECT_NEAR(x.x(), expected[0], 1e-15);
    EXPECT_NEAR(x.y(), expected[1], 1e-15);
    EXPECT_NEAR(x.z(), expected[2], 1e-15);
    EXPECT_NEAR(x.y(), -1.0, 1e-15);
}

TEST(VectorAngle, InverseSymmetry) {
    auto rng = oracle::rng(11);
    for (int k = 0; k < 200; ++k) {
        const Vec3 a = random_vec(rng, 3.0);
        EXPECT_LT((rotation_from_vector_angle(a) * rotation_from_vector_angle(-a) - Mat3::Identity()).norm(), 1e-14);
    }
}

TEST(VectorAngle, AgreesWithQuaternionOracleAndIsIsometry) {
    auto rng = oracle::rng(12);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 a = random_vec(rng, k < 500 ? 3.0 : 1e-6);
        const RotMat v = rotation_from_vector_angle(a);
        EXPECT_LT((v - to_eigen(oracle::frame_update({a.x(), a.y(), a.z()}))).cwiseAbs().maxCoeff(), 1e-10);
        const Vec3 x = random_vec(rng, 5.0);
        EXPECT_NEAR((v * x).norm(), x.norm(), 1e-12);
        EXPECT_TRUE(is_rotation(v));
    }
}

TEST(VectorAngle, TinyAngleBranchIsContinuous) {
    const Vec3 a(3e-13, -2e-13, 1e-13);
    EXPECT_LT((rotation_from_vector_angle(a) - (Mat3::Identity() + skew(a))).norm(), 1e-24);
    const Vec3 b = a * 10.0;
    EXPECT_LT((rotation_from_vector_angle(b) - (Mat3::Identity() + skew(b))).norm(), 1e-22);
}

TEST(VectorAngle, ConstantRateIntegrationReproducesTrueOrientation) {
    // body turning about a fixed body axis at rate w; C maps XYU to body
    const Vec3 w(0.3, -0.8, 1.7);
    const double dt = 0.008;
    const int n = 1250;
    RotMat c = RotMat::Identity();
    for (int i = 0; i < n; ++i) c = rotation_from_vector_angle(w * dt) * c;
    const Mat3 body_to_xyu = to_eigen(oracle::Quat::axis_angle({w.x(), w.y(), w.z()}, w.norm() * n * dt).matrix());
    EXPECT_LT((c - body_to_xyu.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(VectorAngle, CompositionAlongFixedAxis) {
    const Vec3 axis = Vec3(1.0, 2.0, -0.5).normalized();
    const double dt = 0.01;
    for (int n : {1, 10, 100}) {
        RotMat c = RotMat::Identity();
        for (int i = 0; i < n; ++i) c = rotation_from_vector_angle(axis * dt) * c;
        EXPECT_LT((c - rotation_from_vector_angle(axis * dt * n)).norm(), 1e-13 * n);
    }
}

TEST(VectorAngle, LogRoundTrip) {
    auto rng = oracle::rng(13);
    for (int k = 0; k < 300; ++k) {
        const Vec3 a = random_vec(rng, k < 150 ? 1.7 : 1e-7);
        EXPECT_LT((vector_angle_from_rotation(rotation_from_vector_angle(a)) - a).norm(), 1e-12);
    }
}

TEST(Skew, ZeroAndSelfProduct) {
    EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero());
    auto rng = oracle::rng(14);
    for (int k = 0; k < 100; ++k) {
        const Vec3 b = random_vec(rng, 10.0);
        EXPECT_LT((skew(b) * b).norm(), 1e-12);
        EXPECT_EQ(skew(b) + skew(b).transpose(), Mat3::Zero());
        const Vec3 x = random_vec(rng, 10.0);
        EXPECT_LT((skew(b) * x - x.cross(b)).norm(), 1e-12);
    }
}

TEST(Skew, ComponentLayout) {
    Mat3 expected;
    expected << 0, 3, -2,
               -3, 0, 1,
                2, -1, 0;
    EXPECT_EQ(skew(Vec3(1, 2, 3)), expected);
}

TEST(Orthonormalize, IdentityAndIdempotence) {
    EXPECT_LT((orthonormalize(Mat3::Identity()) - Mat3::Identity()).norm(), 1e-15);
    auto rng = oracle::rng(15);
    for (int k = 0; k < 100; ++k) {
        const Mat3 x = random_rotation(rng) + 0.05 * Mat3::Random();
        const RotMat once = orthonormalize(x);
        EXPECT_TRUE(is_rotation(once));
        EXPECT_LT((orthonormalize(once) - once).norm(), 1e-14);
    }
}

TEST(Orthonormalize, RecoversPerturbedRotation) {
    auto rng = oracle::rng(16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const RotMat r = random_rotation(rng);
        Mat3 e;
        for (int i = 0; i < 9; ++i) e(i) = u(rng);
        EXPECT_LT((orthonormalize(r + 1e-6 * e) - r).norm(), 1e-5);
    }
}

TEST(Orthonormalize, RejectsReflection) {
    Mat3 m = Mat3::Identity();
    m(2, 2) = -1.0;
    EXPECT_THROW(orthonormalize(m), Error);
}

TEST(Euler, MatchesQuaternionComposition) {
    const double roll = 0.2, pitch = -0.4, yaw = 2.5;
    const auto q = oracle::Quat::axis_angle({0, 0, 1}, yaw) * oracle::Quat::axis_angle({0, 1, 0}, pitch) *
                   oracle::Quat::axis_angle({1, 0, 0}, roll);
    EXPECT_LT((orientation_from_euler(roll, pitch, yaw) - to_eigen(q.matrix()).transpose()).norm(), 1e-14);
    EXPECT_NEAR(yaw_of(orientation_from_euler(roll, pitch, yaw)), yaw, 1e-14);
}

TEST(Angles, WrapAndConvert) {
    EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(wrap_angle(0.5 - 4 * std::numbers::pi), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(rad_to_deg(deg_to_rad(12.0)), 12.0);
    EXPECT_EQ(gravity_vector(), Vec3(0, 0, -9.81));
}

TEST(RotationAboutUp, QuarterTurnIsCounterClockwise) {
    EXPECT_LT((rotation_about_up(std::numbers::pi / 2) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}
