#pragma once

// Quality gating of reconstructions, fault injection for tests, and the
// step-period comparison between smartphone and reference data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "footnav/calibration.hpp"
#include "footnav/dataset_io.hpp"
#include "footnav/detectors.hpp"
#include "footnav/errors.hpp"
#include "footnav/estimator.hpp"
#include "footnav/fusion.hpp"
#include "footnav/synthetic_gait.hpp"

namespace footnav {

// ---------------------------------------------------------------------------
// Closure
// ---------------------------------------------------------------------------

inline constexpr double kClosureThreshold = 0.05;  // m

/// Planar distance between the mean positions of the first and last
/// standstill windows (runs of stationary flags lasting >= min_duration).
inline double closure_error(std::span<const double> t, std::span<const double> x, std::span<const double> y,
                            const StationarityFlags& stationary, double min_duration = 5.0) {
    if (t.empty()) throw Error(ErrorCode::NoStandstill, "closure_error: empty trajectory");
    if (x.size() != t.size() || y.size() != t.size() || stationary.size() != t.size()) {
        throw Error(ErrorCode::LengthMismatch, "closure_error: columns differ in length");
    }
    const auto windows = standstill_windows(stationary, t, min_duration);
    if (windows.size() < 2) {
        throw Error(ErrorCode::NoStandstill, "closure_error: found " + std::to_string(windows.size()) +
                                                 " standstill window(s), need a first and a last");
    }
    auto mean = [&](const IndexRange& w) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = w.begin; i < w.end; ++i) {
            mx += x[i];
            my += y[i];
        }
        const double n = static_cast<double>(w.size());
        return std::array<double, 2>{mx / n, my / n};
    };
    const auto a = mean(windows.front());
    const auto b = mean(windows.back());
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

inline double closure_error(const FootTrajectory& traj, double min_duration = 5.0) {
    std::vector<double> t, x, y;
    t.reserve(traj.size());
    x.reserve(traj.size());
    y.reserve(traj.size());
    for (const auto& s : traj.states) {
        t.push_back(s.t);
        x.push_back(s.p.x());
        y.push_back(s.p.y());
    }
    return closure_error(t, x, y, traj.stationary, min_duration);
}

// ---------------------------------------------------------------------------
// Quality gate
// ---------------------------------------------------------------------------

struct QualityThresholds {
    double dtw_max = kCalibratedDtwMax;  // normalized DTW, m
    double closure_max = kClosureThreshold;
    std::size_t step_count_tolerance = 2;
    double standstill_min_duration = 5.0;
    HeadingSearchConfig dtw_sampling{};  // decimation applied before DTW
};

struct QualityReport {
    double dtw_left_right = 0.0;  // normalized
    double closure_left = 0.0;
    double closure_right = 0.0;
    std::size_t step_count_left = 0;
    std::size_t step_count_right = 0;
    bool dtw_ok = false;
    bool closure_ok = false;
    bool steps_ok = false;
    bool pass = false;
    std::string failure;  // empty when the closures could be computed

    static std::string csv_header() {
        return "dtw_left_right,closure_left[m],closure_right[m],step_count_left,step_count_right,pass";
    }
    std::string csv_row() const {
        return format_fixed6(dtw_left_right) + "," + format_fixed6(closure_left) + "," + format_fixed6(closure_right) +
               "," + std::to_string(step_count_left) + "," + std::to_string(step_count_right) + "," +
               (pass ? "1" : "0");
    }
    std::string summary(const std::string& name) const {
        char buf[512];
        std::snprintf(buf, sizeof buf, "%s: %s dtw=%.4f%s closure L=%.4f m%s R=%.4f m steps L=%zu R=%zu%s%s%s",
                      name.c_str(), pass ? "PASS" : "FAIL", dtw_left_right, dtw_ok ? "" : " (too high)", closure_left,
                      closure_ok ? "" : " (closure too large)", closure_right, step_count_left, step_count_right,
                      steps_ok ? "" : " (count mismatch)", failure.empty() ? "" : " ", failure.c_str());
        return buf;
    }
};

namespace detail {

inline std::size_t count_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

inline QualityReport evaluate_gate(const PlanarPath& left, const StationarityFlags& left_flags,
                                   const PlanarPath& right, const StationarityFlags& right_flags,
                                   std::size_t steps_left, std::size_t steps_right, const QualityThresholds& th) {
    QualityReport r;
    r.dtw_left_right = dtw_normalized(detail::thin(left, th.dtw_sampling), detail::thin(right, th.dtw_sampling));
    r.step_count_left = steps_left;
    r.step_count_right = steps_right;
    auto columns = [](const PlanarPath& p) {
        std::array<std::vector<double>, 3> c;
        for (const auto& q : p) {
            c[0].push_back(q.t);
            c[1].push_back(q.x);
            c[2].push_back(q.y);
        }
        return c;
    };
    const auto lc = columns(left);
    const auto rc = columns(right);
    try {
        r.closure_left = closure_error(lc[0], lc[1], lc[2], left_flags, th.standstill_min_duration);
        r.closure_right = closure_error(rc[0], rc[1], rc[2], right_flags, th.standstill_min_duration);
        r.closure_ok = r.closure_left < th.closure_max && r.closure_right < th.closure_max;
    } catch (const Error& e) {
        r.closure_left = r.closure_right = std::numeric_limits<double>::quiet_NaN();
        r.closure_ok = false;
        r.failure = e.what();
    }
    r.dtw_ok = r.dtw_left_right < th.dtw_max;
    r.steps_ok = count_diff(steps_left, steps_right) <= th.step_count_tolerance;
    r.pass = r.dtw_ok && r.closure_ok && r.steps_ok;
    return r;
}

}  // namespace detail

inline QualityReport quality_gate(const ReferenceBundle& b, const QualityThresholds& th = {}) {
    return detail::evaluate_gate(b.fused_left.path, b.fused_left.stationary, b.fused_right.path,
                                 b.fused_right.stationary, b.left_steps.size(), b.right_steps.size(), th);
}

/// Gate evaluated on published files.
inline QualityReport quality_gate(const ReferenceDataSet& ds, const QualityThresholds& th = {}) {
    PlanarPath l, r;
    StationarityFlags lf, rf;
    for (const auto& row : ds.trajectory) {
        l.push_back({row.t, row.x_left, row.y_left});
        r.push_back({row.t, row.x_right, row.y_right});
        lf.push_back(row.left_stationary);
        rf.push_back(row.right_stationary);
    }
    if (l.empty()) throw Error(ErrorCode::EmptyPath, "quality_gate: empty trajectory table");
    return detail::evaluate_gate(l, lf, r, rf, ds.left_steps.size(), ds.right_steps.size(), th);
}

// ---------------------------------------------------------------------------
// Fault injection
// ---------------------------------------------------------------------------

inline ImuSeries inject_bias(ImuSeries series, const Vec3& accel_bias, const Vec3& gyro_bias) {
    for (auto& s : series) {
        s.f += accel_bias;
        s.w += gyro_bias;
    }
    return series;
}

inline ImuSeries inject_noise(ImuSeries series, double accel_sigma, double gyro_sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (auto& s : series) {
        for (int k = 0; k < 3; ++k) s.f(k) += accel_sigma * unit(rng);
        for (int k = 0; k < 3; ++k) s.w(k) += gyro_sigma * unit(rng);
    }
    return series;
}

/// Removes `count` samples starting at index `first`.
inline ImuSeries inject_dropout(ImuSeries series, std::size_t first, std::size_t count) {
    if (first >= series.size()) return series;
    const std::size_t last = std::min(series.size(), first + count);
    series.erase(series.begin() + static_cast<std::ptrdiff_t>(first), series.begin() + static_cast<std::ptrdiff_t>(last));
    return series;
}

/// Adds `offset` to every sample from the start of the last standstill window
/// on, so that closure_error grows by exactly |offset| along that direction.
inline FootTrajectory inject_end_offset(FootTrajectory traj, const Vec3& offset, double min_duration = 5.0) {
    const auto windows = standstill_windows(traj.stationary, traj.times(), min_duration);
    if (windows.size() < 2) throw Error(ErrorCode::NoStandstill, "inject_end_offset: no final standstill");
    for (std::size_t i = windows.back().begin; i < traj.size(); ++i) traj.states[i].p += offset;
    return traj;
}

// ---------------------------------------------------------------------------
// Step periods
// ---------------------------------------------------------------------------

/// Consecutive differences of the sorted union of both feet's step starts.
inline std::vector<double> reference_step_periods(std::span<const double> left, std::span<const double> right) {
    std::vector<double> all(left.begin(), left.end());
    all.insert(all.end(), right.begin(), right.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (std::size_t i = 1; i < all.size(); ++i) out.push_back(all[i] - all[i - 1]);
    return out;
}

/// Second-order section, direct form II transposed.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(x.size());
        double z1 = 0.0, z2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double out = b0 * x[i] + z1;
            z1 = b1 * x[i] - a1 * out + z2;
            z2 = b2 * x[i] - a2 * out;
            y[i] = out;
        }
        return y;
    }

    /// Second-order Butterworth sections by the bilinear transform.
    static Biquad lowpass(double cutoff_hz, double rate_hz) {
        const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
        const double q = std::numbers::sqrt2 / 2.0;
        const double norm = 1.0 / (1.0 + k / q + k * k);
        Biquad s;
        s.b0 = k * k * norm;
        s.b1 = 2.0 * s.b0;
        s.b2 = s.b0;
        s.a1 = 2.0 * (k * k - 1.0) * norm;
        s.a2 = (1.0 - k / q + k * k) * norm;
        return s;
    }
    static Biquad highpass(double cutoff_hz, double rate_hz) {
        const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
        const double q = std::numbers::sqrt2 / 2.0;
        const double norm = 1.0 / (1.0 + k / q + k * k);
        Biquad s;
        s.b0 = norm;
        s.b1 = -2.0 * norm;
        s.b2 = norm;
        s.a1 = 2.0 * (k * k - 1.0) * norm;
        s.a2 = (1.0 - k / q + k * k) * norm;
        return s;
    }
};

/// Zero-phase band-pass: high-pass then low-pass, run forward and backward
/// over the signal extended by odd reflection at both ends.
inline std::vector<double> bandpass_zero_phase(std::span<const double> x, double low_hz, double high_hz,
                                               double rate_hz) {
    if (x.size() < 2) return std::vector<double>(x.begin(), x.end());
    const std::size_t pad = std::min(x.size() - 1, static_cast<std::size_t>(std::ceil(3.0 * rate_hz / low_hz)));
    std::vector<double> ext;
    ext.reserve(x.size() + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 1 - i]);
    const Biquad hp = Biquad::highpass(low_hz, rate_hz);
    const Biquad lp = Biquad::lowpass(high_hz, rate_hz);
    auto pass = [&](std::vector<double> v) { return lp.apply(hp.apply(v)); };
    std::vector<double> y = pass(std::move(ext));
    std::reverse(y.begin(), y.end());
    y = pass(std::move(y));
    std::reverse(y.begin(), y.end());
    return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

struct StepPeriodConfig {
    double resample_hz = 100.0;
    double band_low_hz = 0.5;
    double band_high_hz = 3.0;
    double min_peak_spacing = 0.25;  // s
    double relative_threshold = 0.5; // of the filtered signal's std
    double absolute_threshold = 0.05; // m/s^2
    double min_duration = 5.0;       // s
};

struct StepPeriods {
    std::vector<double> events;     // s, peak times
    std::vector<double> durations;  // consecutive differences
};

/// Step events from acceleration magnitude peaks. `t` in seconds.
inline StepPeriods step_periods_from_accel(std::span<const double> t, std::span<const Vec3> accel,
                                           const StepPeriodConfig& cfg = {}) {
    if (t.size() != accel.size()) throw Error(ErrorCode::LengthMismatch, "step periods: column lengths differ");
    if (t.size() < 2 || t.back() - t.front() < cfg.min_duration) {
        throw Error(ErrorCode::TooShort, "step periods: need at least " + std::to_string(cfg.min_duration) +
                                             " s of accelerometer data");
    }
    // uniform resampling of |a|
    const double dt = 1.0 / cfg.resample_hz;
    const auto n = static_cast<std::size_t>(std::floor((t.back() - t.front()) / dt)) + 1;
    std::vector<double> grid(n), mag(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t.front() + static_cast<double>(i) * dt;
        while (k + 2 < t.size() && t[k + 1] <= ti) ++k;
        const double span = t[k + 1] - t[k];
        const double w = span > 0.0 ? std::clamp((ti - t[k]) / span, 0.0, 1.0) : 0.0;
        grid[i] = ti;
        mag[i] = (1.0 - w) * accel[k].norm() + w * accel[k + 1].norm();
    }
    const auto filtered = bandpass_zero_phase(mag, cfg.band_low_hz, cfg.band_high_hz, cfg.resample_hz);
    const double mean = std::accumulate(filtered.begin(), filtered.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : filtered) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double threshold = std::max(cfg.relative_threshold * sd, cfg.absolute_threshold);

    StepPeriods out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double y0 = filtered[i - 1], y1 = filtered[i], y2 = filtered[i + 1];
        if (!(y1 > threshold && y1 > y0 && y1 >= y2)) continue;
        const double denom = y0 - 2.0 * y1 + y2;
        const double frac = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
        const double tp = grid[i] + std::clamp(frac, -0.5, 0.5) * dt;
        if (!out.events.empty() && tp - out.events.back() < cfg.min_peak_spacing) continue;
        out.events.push_back(tp);
    }
    for (std::size_t i = 1; i < out.events.size(); ++i) out.durations.push_back(out.events[i] - out.events[i - 1]);
    return out;
}

/// Step periods of one smartphone from its accelerometer table (ms stamps,
/// shifted by `shift_ms` onto the common clock).
inline StepPeriods smartphone_step_periods(const CoreDataSet& core, double shift_ms = 0.0,
                                           const StepPeriodConfig& cfg = {}) {
    const SensorTable* acc = core.table(SensorKind::Accelerometer);
    if (!acc) throw Error(ErrorCode::TooShort, core.folder.name() + ": no accelerometer data");
    std::vector<double> t;
    std::vector<Vec3> a;
    t.reserve(acc->size());
    a.reserve(acc->size());
    for (std::size_t i = 0; i < acc->size(); ++i) {
        const double ti = (acc->t_ms[i] - shift_ms) / 1000.0;
        if (!t.empty() && ti <= t.back()) continue;  // repeated stamps
        t.push_back(ti);
        a.emplace_back(acc->values[i][0], acc->values[i][1], acc->values[i][2]);
    }
    return step_periods_from_accel(t, a, cfg);
}

// ---------------------------------------------------------------------------
// Synthetic smartphone trace
// ---------------------------------------------------------------------------

struct PhoneParams {
    double rate_hz = 100.0;
    double bob_amplitude = 0.025;  // m, vertical centre-of-mass oscillation
    double accel_noise = 0.05;     // m/s^2
    double gyro_noise = 0.01;      // rad/s
    double tilt = 0.3;             // rad, fixed device tilt
    double clock_offset_ms = 0.0;  // device clock reading at common time 0
};

/// Body-worn phone accelerometer and gyroscope tables. The centre of mass
/// bobs once per step between the first lift-off and the last touch-down;
/// the device is rigidly tilted and otherwise still.
inline std::pair<SensorTable, SensorTable> synth_phone(const SyntheticWalk& walk, const GaitParams& gait,
                                                       const PhoneParams& phone, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const RotMat c = orientation_from_euler(phone.tilt, 0.5 * phone.tilt, 0.0);
    const Vec3 g = gravity_vector(gait.g0);
    SensorTable acc, gyr;
    acc.kind = SensorKind::Accelerometer;
    gyr.kind = SensorKind::Gyroscope;
    const double t0 = walk.walking_span.empty() ? 0.0 : walk.walking_span[0];
    const double t1 = walk.walking_span.empty() ? 0.0 : walk.walking_span[1];
    const double omega = 2.0 * std::numbers::pi * gait.cadence;
    const auto n = static_cast<std::size_t>(std::floor(gait.duration * phone.rate_hz)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / phone.rate_hz;
        Vec3 a = Vec3::Zero();
        if (t > t0 && t < t1) a.z() = phone.bob_amplitude * omega * omega * std::cos(omega * (t - t0));
        const Vec3 f = c * (a - g);
        const double stamp = std::round(t * 1000.0 + phone.clock_offset_ms);
        acc.t_ms.push_back(stamp);
        acc.values.push_back({f.x() + phone.accel_noise * unit(rng), f.y() + phone.accel_noise * unit(rng),
                              f.z() + phone.accel_noise * unit(rng), 0.0, 0.0, 0.0});
        gyr.t_ms.push_back(stamp);
        gyr.values.push_back({phone.gyro_noise * unit(rng), phone.gyro_noise * unit(rng),
                              phone.gyro_noise * unit(rng), 0.0, 0.0, 0.0});
    }
    return {acc, gyr};
}

}  // namespace footnav
