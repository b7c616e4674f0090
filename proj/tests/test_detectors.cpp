#include <gtest/gtest.h>

#include "footnav/detectors.hpp"
#include "footnav/synthetic_gait.hpp"
#include "oracles.hpp"

using namespace footnav;

namespace {

const Vec3 kUp(0.0, 0.0, 9.81);

ImuSeries constant_series(std::size_t n, const Vec3& f, const Vec3& w, double dt = 0.008) {
    ImuSeries s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = {static_cast<double>(i) * dt, f, w};
    return s;
}

StationarityFlags flags_with_identity(const ImuSeries& s, const DetectorConfig& cfg = {}) {
    const std::vector<RotMat> c(s.size(), RotMat::Identity());
    return motionless_flags(s, c, cfg);
}

std::vector<double> grid(std::size_t n, double dt) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
    return t;
}

StationarityFlags from_string(const std::string& s) {
    StationarityFlags f;
    for (char c : s) f.push_back(c == '1');
    return f;
}

}  // namespace

TEST(MotionlessFlags, PerfectStance) {
    const auto f = flags_with_identity(constant_series(5, kUp, Vec3::Zero()));
    for (bool b : f) EXPECT_TRUE(b);
}

TEST(MotionlessFlags, AngularRateAboveEpsilon) {
    const auto f = flags_with_identity(constant_series(5, kUp, Vec3(0.6, 0.0, 0.0)));
    for (bool b : f) EXPECT_FALSE(b);
    const auto g = flags_with_identity(constant_series(5, kUp, Vec3(0.0, 0.0, 0.49)));
    for (bool b : g) EXPECT_TRUE(b);
}

TEST(MotionlessFlags, SpecificForceResidualAboveAlpha) {
    const auto f = flags_with_identity(constant_series(5, kUp * 1.3, Vec3::Zero()));
    for (bool b : f) EXPECT_FALSE(b);
}

TEST(MotionlessFlags, ThresholdIsSharp) {
    const DetectorConfig cfg;
    EXPECT_TRUE(flags_with_identity(constant_series(3, kUp * (1.0 + cfg.alpha - 1e-9), Vec3::Zero()))[1]);
    EXPECT_FALSE(flags_with_identity(constant_series(3, kUp * (1.0 + cfg.alpha + 1e-9), Vec3::Zero()))[1]);
    EXPECT_TRUE(flags_with_identity(constant_series(3, kUp * (1.0 - cfg.alpha + 1e-9), Vec3::Zero()))[1]);
    EXPECT_FALSE(flags_with_identity(constant_series(3, kUp * (1.0 - cfg.alpha - 1e-9), Vec3::Zero()))[1]);
}

TEST(MotionlessFlags, UsesPreviousOrientationAndHalfStepRotation) {
    // tilted body: the flag depends on C_{n-1}, and the first flag copies the second
    const RotMat tilt = orientation_from_euler(0.8, 0.0, 0.0);
    ImuSeries s = constant_series(3, tilt * kUp, Vec3::Zero());
    std::vector<RotMat> c{RotMat::Identity(), tilt, RotMat::Identity()};
    const auto f = motionless_flags(s, c, DetectorConfig{});
    EXPECT_FALSE(f[1]);
    EXPECT_TRUE(f[2]);
    EXPECT_EQ(f[0], f[1]);
}

TEST(MotionlessFlags, LengthMismatch) {
    const ImuSeries s = constant_series(4, kUp, Vec3::Zero());
    const std::vector<RotMat> c(3, RotMat::Identity());
    try {
        motionless_flags(s, c, DetectorConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
}

TEST(Glrt, StationaryWindowIsZero) {
    const std::vector<Vec3> f(3, kUp), w(3, Vec3::Zero());
    EXPECT_EQ(glrt_statistic(f, w, DetectorConfig{}), 0.0);
}

TEST(Glrt, ConstantRateTerm) {
    const DetectorConfig cfg;
    const Vec3 c(0.01, -0.02, 0.03);
    const std::vector<Vec3> f(5, kUp), w(5, c);
    EXPECT_NEAR(glrt_statistic(f, w, cfg), c.squaredNorm() / (cfg.sigma_w * cfg.sigma_w), 1e-12);
}

TEST(Glrt, EmptyWindow) {
    const std::vector<Vec3> none;
    try {
        glrt_statistic(none, none, DetectorConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
    }
}

TEST(Glrt, MidSwingExceedsThreshold) {
    const DetectorConfig cfg;
    const auto walk = synth_gait(GaitParams{}, 1);
    const auto stat = glrt_series(walk.left_imu, cfg);
    const double half = 0.5 * walk.swing_duration;
    std::size_t checked = 0;
    for (double lift : walk.left_truth.step_starts) {
        const auto idx = static_cast<std::size_t>(std::llround((lift + half) * GaitParams{}.sample_rate));
        EXPECT_GT(stat[idx], cfg.gamma) << "mid-swing at t = " << walk.left_imu[idx].t;
        ++checked;
    }
    EXPECT_GT(checked, 20u);
}

TEST(StanceGate, AllStationary) {
    const auto g = stance_gate(constant_series(100, kUp, Vec3::Zero()), DetectorConfig{});
    for (bool b : g) EXPECT_TRUE(b);
}

TEST(StanceGate, SwingInteriorIsMoving) {
    const DetectorConfig cfg;
    const auto walk = synth_gait(GaitParams{}, 1);
    // concatenate the central 80 % of every swing into one all-swing series
    ImuSeries swing;
    const double rate = GaitParams{}.sample_rate;
    for (double lift : walk.right_truth.step_starts) {
        const auto a = static_cast<std::size_t>(std::ceil((lift + 0.1 * walk.swing_duration) * rate));
        const auto b = static_cast<std::size_t>(std::floor((lift + 0.9 * walk.swing_duration) * rate));
        for (std::size_t i = a; i <= b; ++i) {
            ImuSample s = walk.right_imu[i];
            s.t = static_cast<double>(swing.size()) / rate;
            swing.push_back(s);
        }
    }
    ASSERT_GT(swing.size(), 500u);
    const auto g = stance_gate(swing, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_FALSE(g[i]) << i;
}

TEST(StanceGate, AgreesWithTruthLabels) {
    for (auto shape : {PathShape::Circle, PathShape::Rectangle, PathShape::FigureEight}) {
        for (double cadence : {1.5, 1.8, 2.1}) {
            GaitParams p;
            p.shape = shape;
            p.cadence = cadence;
            const auto walk = synth_gait(p, 1);
            for (const auto* foot : {&walk.left_truth, &walk.right_truth}) {
                const auto& imu = foot == &walk.left_truth ? walk.left_imu : walk.right_imu;
                const auto g = stance_gate(imu, DetectorConfig{});
                std::size_t agree = 0;
                for (std::size_t i = 0; i < g.size(); ++i) agree += g[i] == foot->stance[i];
                EXPECT_GE(static_cast<double>(agree) / static_cast<double>(g.size()), 0.99)
                    << to_string(shape) << " cadence " << cadence;
            }
        }
    }
}

TEST(StanceGate, MonotoneInGamma) {
    GaitParams p;
    p.duration = 30;
    p.pause = 5;
    p.left.accel_noise = 0.05;
    p.left.gyro_noise = 0.01;
    const auto walk = synth_gait(p, 3);
    auto rng = oracle::rng(5);
    std::uniform_real_distribution<double> log_gamma(2.0, 7.0);
    for (int k = 0; k < 30; ++k) {
        DetectorConfig a, b;
        a.gamma = std::pow(10.0, log_gamma(rng));
        b.gamma = a.gamma * std::pow(10.0, 0.5 * log_gamma(rng) - 1.0);
        if (b.gamma < a.gamma) std::swap(a.gamma, b.gamma);
        const auto fa = stance_gate(walk.left_imu, a);
        const auto fb = stance_gate(walk.left_imu, b);
        for (std::size_t i = 0; i < fa.size(); ++i) {
            ASSERT_TRUE(!fa[i] || fb[i]);
        }
    }
}

TEST(DetectSteps, LongFlightEmitsStepAtLastStationarySample) {
    const auto t = grid(6, 0.1);
    const auto s = detect_steps(from_string("110001"), t, 0.2);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], t[1]);
    EXPECT_EQ(s[1], t[5]);
}

TEST(DetectSteps, ShortFlightIsIgnored) {
    const auto t = grid(6, 0.1);
    const auto s = detect_steps(from_string("110111"), t, 0.2);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], t[5]);
}

TEST(DetectSteps, AllStationaryGivesTerminalOnly) {
    const auto t = grid(10, 0.1);
    const auto s = detect_steps(StationarityFlags(10, true), t, 0.2);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], t.back());
    EXPECT_TRUE(detect_steps({}, {}, 0.2).empty());
    EXPECT_THROW(detect_steps(StationarityFlags(3, true), grid(2, 0.1), 0.2), Error);
}

TEST(DetectSteps, TrailingMotionEmitsItsStart) {
    const auto t = grid(7, 0.1);
    const auto s = detect_steps(from_string("1100000"), t, 0.2);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], t[1]);
}

TEST(DetectSteps, ExhaustiveAgreementWithNaiveScanner) {
    // dyadic spacing keeps the accumulated flight time exact
    for (double dt : {0.0625, 0.125}) {
        for (std::size_t len = 1; len <= 20; ++len) {
            const auto t = grid(len, dt);
            StationarityFlags f(len);
            std::vector<bool> v(len);
            for (std::uint32_t bits = 0; bits < (1u << len); ++bits) {
                for (std::size_t i = 0; i < len; ++i) v[i] = f[i] = (bits >> i) & 1u;
                const auto got = detect_steps(f, t, 0.25);
                const auto want = oracle::naive_steps(v, t, 0.25);
                ASSERT_EQ(got, want) << "len " << len << " bits " << bits << " dt " << dt;
            }
        }
    }
}

TEST(DetectSteps, RandomAgreementAndStepProperty) {
    auto rng = oracle::rng(6);
    std::uniform_int_distribution<std::size_t> len_dist(1, 50);
    std::bernoulli_distribution coin(0.5);
    for (int k = 0; k < 100000; ++k) {
        const std::size_t len = len_dist(rng);
        const auto t = grid(len, 0.125);
        StationarityFlags f(len);
        std::vector<bool> v(len);
        for (std::size_t i = 0; i < len; ++i) v[i] = f[i] = coin(rng);
        f[0] = v[0] = true;  // recordings start at rest
        const auto got = detect_steps(f, t, 0.2);
        ASSERT_EQ(got, oracle::naive_steps(v, t, 0.2));
        for (std::size_t j = 0; j + 1 < got.size(); ++j) {
            const auto n = static_cast<std::size_t>(std::llround(got[j] / 0.125));
            ASSERT_TRUE(f[n]);
            ASSERT_FALSE(f[n + 1]);
            if (j > 0) {
                ASSERT_GT(got[j], got[j - 1]);
            }
        }
    }
}

TEST(StandstillWindows, InitialPause) {
    StationarityFlags f(3000, false);
    for (std::size_t i = 0; i < 1500; ++i) f[i] = true;
    const auto w = standstill_windows(f, grid(3000, 0.008), 5.0);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0], (IndexRange{0, 1500}));
}

TEST(StandstillWindows, ShortStanceExcludedAndEmpty) {
    StationarityFlags f(1000, false);
    for (std::size_t i = 400; i < 450; ++i) f[i] = true;
    EXPECT_TRUE(standstill_windows(f, grid(1000, 0.008), 5.0).empty());
    EXPECT_TRUE(standstill_windows({}, {}, 5.0).empty());
}

TEST(CausalOrientations, StationaryStaysLevelAndRelevelingRemovesTilt) {
    const ImuSeries s = constant_series(500, kUp, Vec3::Zero());
    const auto c = causal_orientations(s, RotMat::Identity(), DetectorConfig{});
    EXPECT_LT((c.back() - RotMat::Identity()).norm(), 1e-12);
    const RotMat tilted = orientation_from_euler(0.1, -0.05, 0.3);
    const auto d = causal_orientations(s, tilted, DetectorConfig{});
    const Vec3 up = d.back().transpose() * kUp;
    EXPECT_LT(std::acos(up.normalized().z()), 1e-6);
    EXPECT_NEAR(yaw_of(d.back()), 0.3, 0.01);
}
