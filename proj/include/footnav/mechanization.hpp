#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "footnav/errors.hpp"
#include "footnav/geometry.hpp"

namespace footnav {

/// One IMU measurement. `f` is specific force (gravity included) in m/s^2,
/// `w` angular rate in rad/s, both in body axes.
struct ImuSample {
    double t = 0.0;
    Vec3 f = Vec3::Zero();
    Vec3 w = Vec3::Zero();
};

using ImuSeries = std::vector<ImuSample>;

struct NavState {
    double t = 0.0;
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    RotMat C = RotMat::Identity();
};

/// Half-open sample index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool contains(std::size_t i) const { return i >= begin && i < end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct MechanizationConfig {
    double g0 = kDefaultGravity;
    double max_gap = 0.1;               // s
    std::size_t reorthonormalize_every = 100;
    double max_specific_force = 200.0;  // m/s^2
    double max_angular_rate = 50.0;     // rad/s
};

/// Checks the series invariants: finite values, strictly increasing time and
/// the configured sanity bounds.
inline void validate_series(const ImuSeries& series, const MechanizationConfig& cfg = {}) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (!std::isfinite(s.t) || !s.f.allFinite() || !s.w.allFinite()) {
            throw Error(ErrorCode::OutOfRange, "non-finite IMU sample at index " + std::to_string(i));
        }
        if (s.f.norm() >= cfg.max_specific_force || s.w.norm() >= cfg.max_angular_rate) {
            throw Error(ErrorCode::OutOfRange, "IMU sample outside sanity bounds at index " + std::to_string(i));
        }
        if (i > 0 && !(s.t > series[i - 1].t)) {
            throw Error(ErrorCode::NonMonotonicTime, "timestamps not strictly increasing at index " + std::to_string(i));
        }
    }
}

/// Strapdown step:
///   p_n = p_{n-1} + v_{n-1} dt
///   C_n = V(w_n dt) C_{n-1}
///   v_n = v_{n-1} + (C_n^T f_n + g) dt
/// `step_index` drives periodic re-orthonormalization of C.
inline NavState propagate(const NavState& prev, const ImuSample& sample, const MechanizationConfig& cfg = {},
                          std::size_t step_index = 1) {
    const double dt = sample.t - prev.t;
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::NonMonotonicTime, "propagate: dt = " + std::to_string(dt) + " at t = " +
                                                     std::to_string(sample.t));
    }
    if (dt > cfg.max_gap) {
        throw Error(ErrorCode::GapTooLarge, "propagate: dt = " + std::to_string(dt) + " s at t = " +
                                                std::to_string(sample.t));
    }
    NavState next;
    next.t = sample.t;
    next.p = prev.p + prev.v * dt;
    next.C = rotation_from_vector_angle(sample.w * dt) * prev.C;
    if (cfg.reorthonormalize_every > 0 && step_index % cfg.reorthonormalize_every == 0) {
        next.C = orthonormalize(next.C);
    }
    next.v = prev.v + (next.C.transpose() * sample.f + gravity_vector(cfg.g0)) * dt;
    return next;
}

/// Integrates a whole series from `init` (which must carry the time of the
/// first sample). Returns one state per sample.
inline std::vector<NavState> integrate(const ImuSeries& series, const NavState& init,
                                       const MechanizationConfig& cfg = {}) {
    std::vector<NavState> out;
    if (series.empty()) return out;
    out.reserve(series.size());
    out.push_back(init);
    for (std::size_t n = 1; n < series.size(); ++n) {
        out.push_back(propagate(out.back(), series[n], cfg, n));
    }
    return out;
}

struct LevelingThresholds {
    double g0 = kDefaultGravity;
    double epsilon = 0.5;  // rad/s
    double alpha = 0.25;
};

/// Levels the body from the mean specific force over `window`; yaw is set to
/// zero since it cannot be observed.
inline RotMat initial_orientation(const ImuSeries& series, IndexRange window, const LevelingThresholds& th = {}) {
    if (window.end > series.size() || window.begin >= window.end) {
        throw Error(ErrorCode::NotStationary, "initial_orientation: empty or out-of-range window");
    }
    Vec3 mean_f = Vec3::Zero();
    for (std::size_t i = window.begin; i < window.end; ++i) {
        if (series[i].w.norm() > th.epsilon) {
            throw Error(ErrorCode::NotStationary,
                        "initial_orientation: angular rate above threshold at index " + std::to_string(i));
        }
        mean_f += series[i].f;
    }
    mean_f /= static_cast<double>(window.size());
    if (std::abs(mean_f.norm() - th.g0) > th.alpha * th.g0) {
        throw Error(ErrorCode::NotStationary, "initial_orientation: |mean f| = " + std::to_string(mean_f.norm()) +
                                                  " too far from g0");
    }
    const double roll = std::atan2(mean_f.y(), mean_f.z());
    const double pitch = std::atan2(-mean_f.x(), std::hypot(mean_f.y(), mean_f.z()));
    return orientation_from_euler(roll, pitch, 0.0);
}

}  // namespace footnav
