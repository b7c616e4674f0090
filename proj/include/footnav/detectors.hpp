#pragma once

// Stationarity and step detection.
//
// Two distinct stationarity signals live here:
//   * stance_gate(): windowed generalized likelihood ratio test (SHOE form).
//     It decides when the estimator applies zero-velocity updates.
//   * motionless_flags(): instantaneous per-sample test on angular rate and
//     gravity-compensated specific force. These are the published
//     left/right_stationary columns and feed the step detector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "footnav/errors.hpp"
#include "footnav/geometry.hpp"
#include "footnav/mechanization.hpp"

namespace footnav {

using StationarityFlags = std::vector<bool>;
using StepStarts = std::vector<double>;

struct DetectorConfig {
    double g0 = kDefaultGravity;
    // instantaneous motionless test
    double epsilon = 0.5;  // rad/s
    double alpha = 0.25;
    // windowed GLRT gate
    double gamma = 3.0e4;
    std::size_t half_window = 1;
    double sigma_a = 0.02;   // m/s^2
    double sigma_w = 0.005;  // rad/s
    // step detector
    double min_flight_time = 0.2;  // s
    // standstill windows
    double standstill_min_duration = 5.0;  // s
    // Fraction of the tilt error removed at each motionless sample by the
    // causal orientation pass; 0 gives pure gyro integration.
    double releveling_gain = 0.05;
};

namespace detail {

inline bool motionless_at(const RotMat& prev_orientation, const ImuSample& sample, double dt,
                          const DetectorConfig& cfg) {
    if (sample.w.norm() > cfg.epsilon) return false;
    const Vec3 g = gravity_vector(cfg.g0);
    const Vec3 residual =
        prev_orientation.transpose() * rotation_from_vector_angle(-0.5 * sample.w * dt) * sample.f + g;
    return residual.norm() <= cfg.alpha * cfg.g0;
}

/// Rotates C so that a fraction `gain` of the tilt between the measured
/// specific force and the up axis is removed. Yaw is untouched to first order.
inline RotMat relevel(const RotMat& c, const Vec3& f, double gain) {
    const Vec3 up_measured = (c.transpose() * f).normalized();
    const Vec3 axis = up_measured.cross(Vec3::UnitZ());
    const double s = axis.norm();
    if (s < kSmallAngle) return c;
    const double angle = std::atan2(s, up_measured.z());
    const Vec3 correction = gain * angle * axis / s;
    // Active XYU rotation by `correction` is V(-correction) applied to C^T.
    const RotMat ct = rotation_from_vector_angle(-correction) * c.transpose();
    return orthonormalize(ct.transpose());
}

}  // namespace detail

/// Causal orientation estimate used by the motionless detector: starts from
/// `initial` and integrates the gyro, optionally re-leveling at samples the
/// detector itself flags as motionless. Entry n only depends on samples
/// 0..n, so entry n-1 is a valid "previous measurements" estimate for n.
inline std::vector<RotMat> causal_orientations(const ImuSeries& series, const RotMat& initial,
                                               const DetectorConfig& cfg) {
    std::vector<RotMat> out;
    out.reserve(series.size());
    if (series.empty()) return out;
    out.push_back(initial);
    for (std::size_t n = 1; n < series.size(); ++n) {
        const double dt = series[n].t - series[n - 1].t;
        const bool still = detail::motionless_at(out.back(), series[n], dt, cfg);
        RotMat c = rotation_from_vector_angle(series[n].w * dt) * out.back();
        if (n % 100 == 0) c = orthonormalize(c);
        if (still && cfg.releveling_gain > 0.0) c = detail::relevel(c, series[n].f, cfg.releveling_gain);
        out.push_back(c);
    }
    return out;
}

/// S_n = |w_n| <= eps  AND  |C_{n-1}^T V(-w_n dt_n / 2) f_n + g| <= alpha |g|.
/// The first flag copies the second.
inline StationarityFlags motionless_flags(const ImuSeries& series, std::span<const RotMat> orientations,
                                          const DetectorConfig& cfg) {
    if (orientations.size() != series.size()) {
        throw Error(ErrorCode::LengthMismatch, "motionless_flags: " + std::to_string(orientations.size()) +
                                                   " orientations for " + std::to_string(series.size()) +
                                                   " samples");
    }
    StationarityFlags flags(series.size(), false);
    if (series.empty()) return flags;
    if (series.size() == 1) {
        flags[0] = detail::motionless_at(orientations[0], series[0], 0.0, cfg);
        return flags;
    }
    for (std::size_t n = 1; n < series.size(); ++n) {
        flags[n] = detail::motionless_at(orientations[n - 1], series[n], series[n].t - series[n - 1].t, cfg);
    }
    flags[0] = flags[1];
    return flags;
}

/// SHOE test statistic: window mean of
///   |f_m - g0 * mean(f)/|mean(f)||^2 / sigma_a^2 + |w_m|^2 / sigma_w^2.
inline double glrt_statistic(std::span<const Vec3> f_window, std::span<const Vec3> w_window,
                             const DetectorConfig& cfg) {
    if (f_window.empty() || w_window.empty()) throw Error(ErrorCode::EmptyWindow, "glrt_statistic");
    if (f_window.size() != w_window.size()) {
        throw Error(ErrorCode::LengthMismatch, "glrt_statistic: window sizes differ");
    }
    Vec3 mean_f = Vec3::Zero();
    for (const auto& f : f_window) mean_f += f;
    mean_f /= static_cast<double>(f_window.size());
    const double norm = mean_f.norm();
    const Vec3 gravity_dir = norm > 0.0 ? Vec3(mean_f / norm) : Vec3::UnitZ();
    const double inv_a = 1.0 / (cfg.sigma_a * cfg.sigma_a);
    const double inv_w = 1.0 / (cfg.sigma_w * cfg.sigma_w);
    double sum = 0.0;
    for (std::size_t m = 0; m < f_window.size(); ++m) {
        sum += inv_a * (f_window[m] - cfg.g0 * gravity_dir).squaredNorm() + inv_w * w_window[m].squaredNorm();
    }
    return sum / static_cast<double>(f_window.size());
}

/// Per-sample statistic over W_n = {n-h, ..., n+h}, truncated at the ends.
inline std::vector<double> glrt_series(const ImuSeries& series, const DetectorConfig& cfg) {
    const std::size_t n_samples = series.size();
    std::vector<Vec3> f(n_samples), w(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        f[i] = series[i].f;
        w[i] = series[i].w;
    }
    std::vector<double> out(n_samples, 0.0);
    const std::size_t h = cfg.half_window;
    for (std::size_t n = 0; n < n_samples; ++n) {
        const std::size_t lo = n >= h ? n - h : 0;
        const std::size_t hi = std::min(n_samples, n + h + 1);
        out[n] = glrt_statistic(std::span<const Vec3>(f).subspan(lo, hi - lo),
                                std::span<const Vec3>(w).subspan(lo, hi - lo), cfg);
    }
    return out;
}

inline StationarityFlags stance_gate(const ImuSeries& series, const DetectorConfig& cfg) {
    const auto stat = glrt_series(series, cfg);
    StationarityFlags flags(stat.size());
    for (std::size_t n = 0; n < stat.size(); ++n) flags[n] = stat[n] < cfg.gamma;
    return flags;
}

/// Step-start detector: a motion start (S_{n-1}=1, S_n=0) becomes a step
/// start at t_{n-1} once the foot has been moving for at least
/// `min_flight_time`. The last element is always the terminal marker
/// (t_N if the foot ends still, else the last motion start).
inline StepStarts detect_steps(const StationarityFlags& flags, std::span<const double> times,
                               double min_flight_time = 0.2) {
    if (flags.size() != times.size()) {
        throw Error(ErrorCode::LengthMismatch, "detect_steps: flags and times differ in length");
    }
    StepStarts starts;
    const std::size_t n_samples = flags.size();
    if (n_samples == 0) return starts;
    double flight_time = 0.0;
    std::size_t n_last = 0;
    for (std::size_t n = 1; n < n_samples; ++n) {
        if (flags[n]) {
            if (flight_time >= min_flight_time) {
                flight_time = 0.0;
                starts.push_back(times[n_last]);
            }
        } else {
            if (flags[n - 1]) {
                flight_time = 0.0;
                n_last = n - 1;
            }
            flight_time += times[n] - times[n - 1];
        }
    }
    starts.push_back(flags[n_samples - 1] ? times[n_samples - 1] : times[n_last]);
    return starts;
}

/// Maximal runs of set flags lasting at least `min_duration` seconds.
inline std::vector<IndexRange> standstill_windows(const StationarityFlags& flags, std::span<const double> times,
                                                  double min_duration = 5.0) {
    if (flags.size() != times.size()) {
        throw Error(ErrorCode::LengthMismatch, "standstill_windows: flags and times differ in length");
    }
    std::vector<IndexRange> windows;
    std::size_t i = 0;
    while (i < flags.size()) {
        if (!flags[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < flags.size() && flags[j]) ++j;
        if (times[j - 1] - times[i] >= min_duration) windows.push_back({i, j});
        i = j;
    }
    return windows;
}

}  // namespace footnav
