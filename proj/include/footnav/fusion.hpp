#pragma once

// Dual-foot processing: heading alignment by DTW, coupled re-estimation of
// both feet, common time grid, centre of gravity and step records.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "footnav/detectors.hpp"
#include "footnav/errors.hpp"
#include "footnav/estimator.hpp"
#include "footnav/geometry.hpp"
#include "footnav/mechanization.hpp"

namespace footnav {

enum class Foot { Left, Right };

struct PathPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

using PlanarPath = std::vector<PathPoint>;

inline PlanarPath planar_path(const FootTrajectory& traj) {
    PlanarPath out;
    out.reserve(traj.size());
    for (const auto& s : traj.states) out.push_back({s.t, s.p.x(), s.p.y()});
    return out;
}

// ---------------------------------------------------------------------------
// DTW
// ---------------------------------------------------------------------------

/// Accumulated cost of the optimal monotone, boundary-matched warping path
/// with match/insert/delete steps and Euclidean point cost.
inline double dtw_distance(const PlanarPath& a, const PlanarPath& b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyPath, "dtw_distance: empty path");
    const std::size_t m = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m, inf), curr(m, inf);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double cost = std::hypot(a[i].x - b[j].x, a[i].y - b[j].y);
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = inf;
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, curr[j - 1]);
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
            }
            curr[j] = cost + best;
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

/// DTW divided by the longer path length: a per-sample mismatch in metres
/// that is comparable across walks of different duration.
inline double dtw_normalized(const PlanarPath& a, const PlanarPath& b) {
    return dtw_distance(a, b) / static_cast<double>(std::max(a.size(), b.size()));
}

/// Rotation about the up axis through the first point of the path.
inline PlanarPath rotate_path(const PlanarPath& path, double angle) {
    if (path.empty()) return path;
    const double c = std::cos(angle), s = std::sin(angle);
    const double x0 = path.front().x, y0 = path.front().y;
    PlanarPath out = path;
    for (auto& p : out) {
        const double dx = p.x - x0, dy = p.y - y0;
        p.x = x0 + c * dx - s * dy;
        p.y = y0 + s * dx + c * dy;
    }
    return out;
}

/// Keeps the first point and every later point at least 1/rate after the
/// last kept one; rate <= 0 keeps everything.
inline PlanarPath decimate(const PlanarPath& path, double rate_hz) {
    if (rate_hz <= 0.0 || path.empty()) return path;
    const double spacing = 1.0 / rate_hz;
    PlanarPath out{path.front()};
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i].t - out.back().t >= spacing - 1e-9) out.push_back(path[i]);
    }
    return out;
}

struct HeadingSearchConfig {
    double resolution = deg_to_rad(0.5);
    int refine_factor = 10;        // fine pass step = resolution / refine_factor; <= 1 disables
    double decimation_hz = 10.0;
    std::size_t max_points = 1500; // further thinning for very long walks
};

struct HeadingAlignment {
    double angle = 0.0;  // phi*, wrapped to (-pi, pi]
    double distance = 0.0;
    double normalized_distance = 0.0;
};

namespace detail {

inline PlanarPath thin(const PlanarPath& path, const HeadingSearchConfig& cfg) {
    PlanarPath out = decimate(path, cfg.decimation_hz);
    if (cfg.max_points > 0 && out.size() > cfg.max_points) {
        const std::size_t stride = (out.size() + cfg.max_points - 1) / cfg.max_points;
        PlanarPath thinned;
        for (std::size_t i = 0; i < out.size(); i += stride) thinned.push_back(out[i]);
        out = std::move(thinned);
    }
    return out;
}

}  // namespace detail

/// phi* = argmin_phi dtw(left, rotate(right, phi)) by exhaustive search on
/// the grid {k * resolution} over [0, 2 pi), then a finer pass around the
/// best coarse angle. Ties go to the smaller angle.
inline HeadingAlignment align_headings(const PlanarPath& left, const PlanarPath& right,
                                       const HeadingSearchConfig& cfg = {}) {
    if (left.empty() || right.empty()) throw Error(ErrorCode::EmptyPath, "align_headings: empty path");
    if (!(cfg.resolution > 0.0)) throw Error(ErrorCode::InvalidConfig, "align_headings: resolution must be positive");
    const PlanarPath a = detail::thin(left, cfg);
    const PlanarPath b = detail::thin(right, cfg);
    const double two_pi = 2.0 * std::numbers::pi;
    const auto steps = static_cast<std::size_t>(std::ceil(two_pi / cfg.resolution - 1e-9));
    double best_angle = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < steps; ++k) {
        const double phi = static_cast<double>(k) * cfg.resolution;
        const double d = dtw_distance(a, rotate_path(b, phi));
        if (d < best) {
            best = d;
            best_angle = phi;
        }
    }
    if (cfg.refine_factor > 1) {
        const double fine = cfg.resolution / cfg.refine_factor;
        const double centre = best_angle;
        for (int k = -cfg.refine_factor; k <= cfg.refine_factor; ++k) {
            if (k == 0) continue;
            const double phi = centre + k * fine;
            const double d = dtw_distance(a, rotate_path(b, phi));
            if (d < best) {
                best = d;
                best_angle = phi;
            }
        }
    }
    HeadingAlignment out;
    out.angle = wrap_angle(best_angle);
    out.distance = best;
    out.normalized_distance = best / static_cast<double>(std::max(a.size(), b.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Coupled dual-foot estimation
// ---------------------------------------------------------------------------

struct FusionConfig {
    double max_separation = 1.0;      // m, planar
    double separation_sigma = 0.05;   // m
};

/// Both feet re-estimated in the left foot's navigation frame.
struct FusedFeet {
    FootTrajectory left;
    FootTrajectory right;   // rotated by phi into the left frame
    Foot first_mover = Foot::Left;
    std::size_t separation_updates = 0;
};

/// Index of the first gate release (1 -> 0), or the series length if the
/// foot never moves.
inline std::size_t first_release(const StationarityFlags& gate) {
    for (std::size_t n = 1; n < gate.size(); ++n) {
        if (gate[n - 1] && !gate[n]) return n;
    }
    return gate.size();
}

inline Foot first_mover(const StationarityFlags& left_gate, std::span<const double> left_t,
                        const StationarityFlags& right_gate, std::span<const double> right_t) {
    const std::size_t l = first_release(left_gate);
    const std::size_t r = first_release(right_gate);
    const double tl = l < left_t.size() ? left_t[l] : std::numeric_limits<double>::infinity();
    const double tr = r < right_t.size() ? right_t[r] : std::numeric_limits<double>::infinity();
    return tr < tl ? Foot::Right : Foot::Left;
}

inline FootTrajectory rotate_trajectory(const FootTrajectory& traj, double angle) {
    const Mat3 rz = rotation_about_up(angle);
    FootTrajectory out = traj;
    for (auto& s : out.states) {
        s.p = rz * s.p;
        s.v = rz * s.v;
        s.C = s.C * rz.transpose();
    }
    out.initial.p = rz * out.initial.p;
    out.initial.v = rz * out.initial.v;
    out.initial.C = out.initial.C * rz.transpose();
    return out;
}

namespace detail {

struct FootRun {
    const ImuSeries& series;
    const FootSetup& setup;
    std::vector<std::size_t> anchored;
    ForwardFilter filter;
    std::size_t next = 1;
    Mat3 to_other;  // this foot's frame -> the other foot's frame
};

/// Separation pseudo-measurement applied to `self` when it lands: if the
/// planar distance to the other foot's current estimate exceeds the limit,
/// the projection of self's position on the separating direction is pulled
/// back to the limit. The other foot's position is taken as exact.
inline bool constrain_separation(FootRun& self, const FootRun& other, const FusionConfig& cfg) {
    const Mat3 back = other.to_other;  // other's frame -> self's frame
    Vec3 p_other = back * other.filter.position_estimate();
    Vec3 diff = self.filter.position_estimate() - p_other;
    diff.z() = 0.0;
    const double dist = diff.norm();
    if (!(dist > cfg.max_separation)) return false;
    const Vec3 u = diff / dist;
    self.filter.update_position_projection(u, cfg.max_separation + u.dot(p_other),
                                           cfg.separation_sigma * cfg.separation_sigma);
    return true;
}

}  // namespace detail

/// Runs both forward filters side by side in time order (first mover first on
/// ties). At every touch-down of either foot the separation constraint against
/// the other foot's latest estimate is applied. Each foot is then smoothed on
/// its own.
inline FusedFeet fuse_feet(const ImuSeries& left, const FootSetup& left_setup, const ImuSeries& right,
                           const FootSetup& right_setup, double phi, const DetectorConfig& det,
                           const NoiseConfig& noise, const EstimatorConfig& est = {},
                           const FusionConfig& cfg = {}) {
    if (left.size() != left_setup.gate.size() || right.size() != right_setup.gate.size()) {
        throw Error(ErrorCode::LengthMismatch, "fuse_feet: gate and series lengths differ");
    }
    const auto lt = times_of(left);
    const auto rt = times_of(right);
    FusedFeet out;
    out.first_mover = first_mover(left_setup.gate, lt, right_setup.gate, rt);

    detail::FootRun l{left, left_setup, anchored_windows(left_setup.standstills, est.anchor_final_position),
                      ForwardFilter(left_setup.initial, noise, est), 1, rotation_about_up(-phi)};
    detail::FootRun r{right, right_setup, anchored_windows(right_setup.standstills, est.anchor_final_position),
                      ForwardFilter(right_setup.initial, noise, est), 1, rotation_about_up(phi)};

    auto step = [&](detail::FootRun& self, const detail::FootRun& other) {
        const std::size_t n = self.next++;
        self.filter.predict(self.series[n]);
        apply_gated_updates(self.filter, n, self.setup.gate, self.setup.standstills, self.anchored);
        const bool landing = self.setup.gate[n] && !self.setup.gate[n - 1];
        if (landing && detail::constrain_separation(self, other, cfg)) {
            self.filter.compensate_attitude();
            ++out.separation_updates;
        }
        self.filter.commit();
    };

    const bool left_first = out.first_mover == Foot::Left;
    while (l.next < left.size() || r.next < right.size()) {
        bool take_left;
        if (l.next >= left.size()) {
            take_left = false;
        } else if (r.next >= right.size()) {
            take_left = true;
        } else if (left[l.next].t != right[r.next].t) {
            take_left = left[l.next].t < right[r.next].t;
        } else {
            take_left = left_first;
        }
        if (take_left) {
            step(l, r);
        } else {
            step(r, l);
        }
    }
    const ForwardPass left_pass = std::move(l.filter).take();
    const ForwardPass right_pass = std::move(r.filter).take();
    out.left = finish_foot(left, left_pass, left_setup, det, est);
    out.right = rotate_trajectory(finish_foot(right, right_pass, right_setup, det, est), phi);
    return out;
}

// ---------------------------------------------------------------------------
// Common grid and centre of gravity
// ---------------------------------------------------------------------------

struct GridTrack {
    PlanarPath path;
    StationarityFlags stationary;
};

/// Timestamps of `a` that fall inside the span of `b`. When both feet are
/// sampled by the same clock this is the set of common measurement moments.
inline std::vector<double> common_grid(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyPath, "common_grid: empty time list");
    std::vector<double> grid;
    for (double t : a) {
        if (t >= b.front() - 1e-9 && t <= b.back() + 1e-9) grid.push_back(t);
    }
    return grid;
}

/// Linear interpolation of x, y; stationarity by nearest sample (earlier one
/// on exact ties).
inline GridTrack interpolate_to_grid(const FootTrajectory& traj, std::span<const double> grid) {
    GridTrack out;
    if (grid.empty()) return out;
    if (traj.states.empty()) throw Error(ErrorCode::EmptyPath, "interpolate_to_grid: empty trajectory");
    const auto& st = traj.states;
    const double tol = 1e-9;
    out.path.reserve(grid.size());
    out.stationary.reserve(grid.size());
    std::size_t k = 0;
    double last = -std::numeric_limits<double>::infinity();
    for (double t : grid) {
        if (t < st.front().t - tol || t > st.back().t + tol) {
            throw Error(ErrorCode::OutOfRange, "interpolate_to_grid: t = " + std::to_string(t) +
                                                   " outside trajectory span");
        }
        if (t < last) k = 0;
        last = t;
        while (k + 1 < st.size() && st[k + 1].t <= t) ++k;
        PathPoint p{t, st[k].p.x(), st[k].p.y()};
        std::size_t nearest = k;
        if (k + 1 < st.size() && t > st[k].t) {
            const double w = (t - st[k].t) / (st[k + 1].t - st[k].t);
            p.x = st[k].p.x() + w * (st[k + 1].p.x() - st[k].p.x());
            p.y = st[k].p.y() + w * (st[k + 1].p.y() - st[k].p.y());
            if (w > 0.5) nearest = k + 1;
        }
        out.path.push_back(p);
        out.stationary.push_back(nearest < traj.stationary.size() ? bool(traj.stationary[nearest]) : false);
    }
    return out;
}

/// r_n = (p_n^L + p_n^R) / 2 on a shared grid.
inline PlanarPath center_of_gravity(const PlanarPath& left, const PlanarPath& right) {
    if (left.size() != right.size()) {
        throw Error(ErrorCode::LengthMismatch, "center_of_gravity: paths differ in length");
    }
    PlanarPath out(left.size());
    for (std::size_t i = 0; i < left.size(); ++i) {
        out[i] = {left[i].t, (left[i].x + right[i].x) / 2.0, (left[i].y + right[i].y) / 2.0};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

struct StepRecord {
    double tau = 0.0;     // s, start of the step
    double length = 0.0;  // lambda, m
    double heading = 0.0; // theta, rad, unwrapped
    Vec3 shift = Vec3::Zero();
};

/// Index of the sample whose timestamp equals `t` (within 1e-9 s).
inline std::optional<std::size_t> find_timestamp(std::span<const double> times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it == times.end() || std::abs(*it - t) > 1e-9) return std::nullopt;
    return static_cast<std::size_t>(it - times.begin());
}

/// Next value of an unwrapped angle sequence: the representative of `angle`
/// closest to `previous`.
inline double unwrap_next(double previous, double angle) {
    return previous + std::remainder(angle - previous, 2.0 * std::numbers::pi);
}

/// One record per consecutive pair of step starts: d_k = p(tau_{k+1}) - p(tau_k).
inline std::vector<StepRecord> step_records(const FootTrajectory& traj, std::span<const double> starts) {
    const auto times = traj.times();
    std::vector<std::size_t> idx;
    idx.reserve(starts.size());
    for (double tau : starts) {
        const auto i = find_timestamp(times, tau);
        if (!i) throw Error(ErrorCode::StepOffGrid, "step start " + std::to_string(tau) + " matches no timestamp");
        idx.push_back(*i);
    }
    std::vector<StepRecord> out;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        StepRecord rec;
        rec.tau = starts[k];
        rec.shift = traj.states[idx[k + 1]].p - traj.states[idx[k]].p;
        rec.length = std::hypot(rec.shift.x(), rec.shift.y());
        const double arg = std::atan2(rec.shift.y(), rec.shift.x());
        rec.heading = out.empty() ? wrap_angle(arg) : unwrap_next(out.back().heading, arg);
        out.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full reference reconstruction of one experiment
// ---------------------------------------------------------------------------

struct ReferenceConfig {
    DetectorConfig detector{};
    NoiseConfig noise = NoiseConfig::defaults();
    EstimatorConfig estimator{};
    HeadingSearchConfig heading{};
    FusionConfig fusion{};
    bool fuse = true;
};

struct ReferenceBundle {
    FootTrajectory left;   // left navigation frame
    FootTrajectory right;  // rotated into the left frame
    GridTrack fused_left;
    GridTrack fused_right;
    PlanarPath cog;
    StepStarts left_starts;
    StepStarts right_starts;
    std::vector<StepRecord> left_steps;
    std::vector<StepRecord> right_steps;
    HeadingAlignment alignment;
    Foot first_mover = Foot::Left;
    std::size_t separation_updates = 0;
};

inline ReferenceBundle reconstruct_pair(const ImuSeries& left, const ImuSeries& right, const ReferenceConfig& cfg) {
    validate_series(left, cfg.estimator.mechanization);
    validate_series(right, cfg.estimator.mechanization);
    const FootSetup ls = prepare_foot(left, cfg.detector);
    const FootSetup rs = prepare_foot(right, cfg.detector);
    const FootTrajectory l0 =
        finish_foot(left, forward_filter(left, ls.initial, ls.gate, ls.standstills, cfg.noise, cfg.estimator), ls,
                    cfg.detector, cfg.estimator);
    const FootTrajectory r0 =
        finish_foot(right, forward_filter(right, rs.initial, rs.gate, rs.standstills, cfg.noise, cfg.estimator), rs,
                    cfg.detector, cfg.estimator);

    ReferenceBundle b;
    b.alignment = align_headings(planar_path(l0), planar_path(r0), cfg.heading);
    if (cfg.fuse) {
        FusedFeet fused = fuse_feet(left, ls, right, rs, b.alignment.angle, cfg.detector, cfg.noise, cfg.estimator,
                                    cfg.fusion);
        b.left = std::move(fused.left);
        b.right = std::move(fused.right);
        b.first_mover = fused.first_mover;
        b.separation_updates = fused.separation_updates;
    } else {
        b.left = l0;
        b.right = rotate_trajectory(r0, b.alignment.angle);
        const auto lt = times_of(left);
        const auto rt = times_of(right);
        b.first_mover = first_mover(ls.gate, lt, rs.gate, rt);
    }
    const auto lt = b.left.times();
    const auto rt = b.right.times();
    const auto grid = common_grid(lt, rt);
    b.fused_left = interpolate_to_grid(b.left, grid);
    b.fused_right = interpolate_to_grid(b.right, grid);
    b.cog = center_of_gravity(b.fused_left.path, b.fused_right.path);
    b.left_starts = detect_steps(b.left.stationary, lt, cfg.detector.min_flight_time);
    b.right_starts = detect_steps(b.right.stationary, rt, cfg.detector.min_flight_time);
    b.left_steps = step_records(b.left, b.left_starts);
    b.right_steps = step_records(b.right, b.right_starts);
    return b;
}

}  // namespace footnav
