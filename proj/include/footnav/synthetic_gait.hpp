#pragma once

// Synthetic dual-foot walking generator used as ground truth.
//
// Foot poses are analytic: during stance a foot is level and exactly still;
// each swing blends position and yaw with a minimum-jerk profile and adds a
// lift/pitch/roll excursion that vanishes with its first two derivatives at
// both ends. Specific force and angular rate come from exact differentiation
// of the pose, f = C (a - g), either averaged over each sample interval or
// evaluated at the sample time (see ImuOutput).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "footnav/errors.hpp"
#include "footnav/estimator.hpp"
#include "footnav/fusion.hpp"
#include "footnav/geometry.hpp"
#include "footnav/mechanization.hpp"

namespace footnav {

enum class PathShape { Circle, Rectangle, FigureEight, Line };

inline std::string to_string(PathShape s) {
    switch (s) {
        case PathShape::Circle: return "circle";
        case PathShape::Rectangle: return "rectangle";
        case PathShape::FigureEight: return "figure-eight";
        case PathShape::Line: return "line";
    }
    return "?";
}

inline PathShape parse_path_shape(const std::string& s) {
    if (s == "circle") return PathShape::Circle;
    if (s == "rectangle") return PathShape::Rectangle;
    if (s == "figure-eight" || s == "figure_eight") return PathShape::FigureEight;
    if (s == "line") return PathShape::Line;
    throw Error(ErrorCode::InvalidConfig, "unknown path shape '" + s + "'");
}

struct SensorErrorModel {
    double mount_yaw = 0.0;     // rad, IMU yaw relative to the foot
    double accel_noise = 0.0;   // m/s^2, white, per sample
    double gyro_noise = 0.0;    // rad/s, white, per sample
    Vec3 accel_bias = Vec3::Zero();
    Vec3 gyro_bias = Vec3::Zero();
};

/// How noise-free IMU samples relate to the analytic pose.
///   Increments: interval-averaged derivatives over (t_{n-1}, t_n], the
///     rotation and velocity increments a strapdown sensor reports. They make
///     the discrete mechanization exact in attitude and velocity.
///   PointSamples: derivatives evaluated at t_n.
enum class ImuOutput { Increments, PointSamples };

struct GaitParams {
    PathShape shape = PathShape::Circle;
    double stride = 1.4;             // m travelled by one foot per swing
    double cadence = 1.8;            // steps (swings of either foot) per second
    double stance_fraction = 0.6;    // of one foot's gait cycle
    double duration = 60.0;          // s, total including pauses
    double sample_rate = 125.0;      // Hz
    double pause = 12.0;             // s of immobility before and after walking
    double foot_spacing = 0.2;       // m between foot centrelines
    double lift_height = 0.12;       // m
    double pitch_amplitude = 0.8;    // rad
    double roll_amplitude = 0.05;    // rad
    double line_heading = 0.0;       // rad, only for PathShape::Line
    double g0 = kDefaultGravity;
    double min_flight_time = 0.2;    // s
    Foot first_mover = Foot::Right;
    ImuOutput output = ImuOutput::Increments;
    SensorErrorModel left{};
    SensorErrorModel right{};
};

struct FootTruth {
    std::vector<NavState> states;  // IMU pose in XYU (world) frame
    StationarityFlags stance;      // exact stance labels
    std::vector<double> step_starts;  // lift-off times
};

struct SyntheticWalk {
    FootTruth left_truth;
    FootTruth right_truth;
    ImuSeries left_imu;
    ImuSeries right_imu;
    std::size_t strides = 0;  // full strides of the trailing foot
    double path_length = 0.0;
    double swing_duration = 0.0;
    std::vector<double> walking_span;  // {first lift-off, last touch-down}
};

namespace detail {

// Minimum-jerk blend and its derivatives.
inline double blend(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
inline double blend_d1(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }
inline double blend_d2(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

// 64 x^3 (1-x)^3: peaks at 1 in the middle, flat to second order at the ends.
inline double bump(double x) {
    const double y = x * (1.0 - x);
    return 64.0 * y * y * y;
}
inline double bump_d1(double x) {
    const double y = x * (1.0 - x);
    return 192.0 * y * y * (1.0 - 2.0 * x);
}
inline double bump_d2(double x) {
    const double y = x * (1.0 - x);
    return 384.0 * y * (1.0 - 2.0 * x) * (1.0 - 2.0 * x) - 384.0 * y * y;
}

struct PathPoint {
    Eigen::Vector2d position;
    double heading;  // unwrapped
};

/// Centre line of the walk parametrized by arc length s in [0, length].
class CentreLine {
public:
    CentreLine(PathShape shape, double length, double line_heading) : shape_(shape), length_(length) {
        constexpr double pi = std::numbers::pi;
        switch (shape) {
            case PathShape::Circle: radius_ = length / (2.0 * pi); break;
            case PathShape::FigureEight: radius_ = length / (4.0 * pi); break;
            case PathShape::Rectangle: {
                radius_ = std::min(1.0, length / 20.0);
                long_side_ = (length - 2.0 * pi * radius_) / 3.0;
                short_side_ = 0.5 * long_side_;
                break;
            }
            case PathShape::Line: heading_ = line_heading; break;
        }
    }

    PathPoint at(double s) const {
        if (!(length_ > 0.0)) return {Eigen::Vector2d::Zero(), heading_};
        switch (shape_) {
            case PathShape::Circle: return arc({0.0, 0.0}, 0.0, radius_, s, +1);
            case PathShape::FigureEight: {
                const double half = 0.5 * length_;
                if (s <= half) return arc({0.0, 0.0}, 0.0, radius_, s, +1);
                PathPoint p = arc({0.0, 0.0}, 0.0, radius_, s - half, -1);
                p.heading += 2.0 * std::numbers::pi;
                return p;
            }
            case PathShape::Rectangle: return rectangle(s);
            case PathShape::Line:
                return {Eigen::Vector2d(std::cos(heading_), std::sin(heading_)) * s, heading_};
        }
        return {};
    }

private:
    // Arc leaving `start` with heading `h0`, turning left (+1) or right (-1).
    static PathPoint arc(const Eigen::Vector2d& start, double h0, double r, double s, int turn) {
        const double h = h0 + turn * s / r;
        const Eigen::Vector2d normal(-std::sin(h0) * turn, std::cos(h0) * turn);
        const Eigen::Vector2d centre = start + r * normal;
        const Eigen::Vector2d radial(std::sin(h) * turn, -std::cos(h) * turn);
        return {centre + r * radial, h};
    }

    PathPoint rectangle(double s) const {
        constexpr double half_pi = 0.5 * std::numbers::pi;
        const double corner = half_pi * radius_;
        const double sides[4] = {long_side_, short_side_, long_side_, short_side_};
        Eigen::Vector2d pos(0.0, 0.0);
        double heading = 0.0;
        for (int k = 0; k < 4; ++k) {
            const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
            if (s <= sides[k]) return {pos + dir * s, heading};
            s -= sides[k];
            pos += dir * sides[k];
            if (s <= corner || k == 3) {
                return arc(pos, heading, radius_, std::min(s, corner), +1);
            }
            const PathPoint end = arc(pos, heading, radius_, corner, +1);
            s -= corner;
            pos = end.position;
            heading = end.heading;
        }
        return {pos, heading};
    }

    PathShape shape_;
    double length_;
    double radius_ = 0.0;
    double long_side_ = 0.0;
    double short_side_ = 0.0;
    double heading_ = 0.0;
};

struct Swing {
    double t0;
    double s_from;
    double s_to;
};

struct PoseSample {
    Vec3 p, v, a;
    double roll, pitch, yaw;
    double roll_rate, pitch_rate, yaw_rate;
    bool stance;
};

class FootModel {
public:
    FootModel(const CentreLine& line, double side, const GaitParams& params, std::vector<Swing> swings,
              double swing_duration)
        : line_(line), side_(side), params_(params), swings_(std::move(swings)), tsw_(swing_duration) {}

    PoseSample at(double t) const {
        // find the last swing starting at or before t
        std::size_t k = 0;
        bool any = false;
        for (std::size_t i = 0; i < swings_.size(); ++i) {
            if (swings_[i].t0 <= t) {
                k = i;
                any = true;
            }
        }
        PoseSample ps{};
        if (!any) return rest(0.0);
        const Swing& sw = swings_[k];
        const double x = (t - sw.t0) / tsw_;
        if (x >= 1.0) return rest(sw.s_to);
        if (x <= 0.0) return rest(sw.s_from);
        const auto [p0, h0] = foothold(sw.s_from);
        const auto [p1, h1] = foothold(sw.s_to);
        const Vec3 delta = p1 - p0;
        const double b = blend(x), b1 = blend_d1(x) / tsw_, b2 = blend_d2(x) / (tsw_ * tsw_);
        const double u = bump(x), u1 = bump_d1(x) / tsw_, u2 = bump_d2(x) / (tsw_ * tsw_);
        const double ang = 2.0 * std::numbers::pi;
        const double sn = std::sin(ang * x), cs = std::cos(ang * x);
        ps.p = p0 + b * delta + Vec3(0.0, 0.0, params_.lift_height * u);
        ps.v = b1 * delta + Vec3(0.0, 0.0, params_.lift_height * u1);
        ps.a = b2 * delta + Vec3(0.0, 0.0, params_.lift_height * u2);
        ps.yaw = h0 + b * (h1 - h0);
        ps.yaw_rate = b1 * (h1 - h0);
        ps.pitch = params_.pitch_amplitude * sn * u;
        ps.pitch_rate = params_.pitch_amplitude * (ang / tsw_ * cs * u + sn * u1);
        ps.roll = params_.roll_amplitude * u;
        ps.roll_rate = params_.roll_amplitude * u1;
        ps.stance = false;
        return ps;
    }

    std::vector<double> lift_offs() const {
        std::vector<double> t;
        for (const auto& s : swings_) t.push_back(s.t0);
        return t;
    }

private:
    std::pair<Vec3, double> foothold(double s) const {
        const PathPoint c = line_.at(s);
        const Eigen::Vector2d normal(-std::sin(c.heading), std::cos(c.heading));
        const Eigen::Vector2d xy = c.position + side_ * 0.5 * params_.foot_spacing * normal;
        return {Vec3(xy.x(), xy.y(), 0.0), c.heading};
    }

    PoseSample rest(double s) const {
        const auto [p, h] = foothold(s);
        PoseSample ps{};
        ps.p = p;
        ps.v = Vec3::Zero();
        ps.a = Vec3::Zero();
        ps.yaw = h;
        ps.stance = true;
        return ps;
    }

    const CentreLine& line_;
    double side_;
    const GaitParams& params_;
    std::vector<Swing> swings_;
    double tsw_;
};

/// Body rate for R = Rz(yaw) Ry(pitch) Rx(roll) with dR/dt = R [w]x.
inline Vec3 body_rate(const PoseSample& ps) {
    const double sr = std::sin(ps.roll), cr = std::cos(ps.roll);
    const double sp = std::sin(ps.pitch), cp = std::cos(ps.pitch);
    return {ps.roll_rate - ps.yaw_rate * sp,
            ps.pitch_rate * cr + ps.yaw_rate * sr * cp,
            -ps.pitch_rate * sr + ps.yaw_rate * cr * cp};
}

}  // namespace detail

/// Swing duration implied by cadence and stance fraction.
inline double swing_duration(const GaitParams& p) {
    return 2.0 * (1.0 - p.stance_fraction) / p.cadence;
}

inline SyntheticWalk synth_gait(const GaitParams& params, std::uint64_t seed) {
    if (!(params.sample_rate > 0.0) || !(params.duration > 0.0) || params.pause < 0.0) {
        throw Error(ErrorCode::InfeasibleGait, "non-positive duration or sample rate");
    }
    SyntheticWalk walk;
    std::size_t strides = 0;
    double tsw = 0.0;
    if (params.cadence > 0.0) {
        if (!(params.stance_fraction > 0.5 && params.stance_fraction < 1.0)) {
            throw Error(ErrorCode::InfeasibleGait, "stance fraction must lie in (0.5, 1) for walking");
        }
        tsw = swing_duration(params);
        if (tsw < params.min_flight_time) {
            throw Error(ErrorCode::InfeasibleGait, "swing of " + std::to_string(tsw) +
                                                       " s is shorter than the minimum flight time");
        }
        const double walking = params.duration - 2.0 * params.pause;
        const double fit = std::floor((walking - tsw) * params.cadence / 2.0 + 1e-9);
        if (fit < 1.0) throw Error(ErrorCode::InfeasibleGait, "duration too short for a single stride");
        strides = static_cast<std::size_t>(fit);
        if (!(params.stride > 0.0)) throw Error(ErrorCode::InfeasibleGait, "stride must be positive");
    }
    const double length = static_cast<double>(strides) * params.stride;
    walk.strides = strides;
    walk.path_length = length;
    walk.swing_duration = tsw;

    const detail::CentreLine line(params.shape, length, params.line_heading);
    std::vector<detail::Swing> lead, trail;
    if (strides > 0) {
        const double m = static_cast<double>(strides);
        const double s = params.stride;
        std::vector<double> lead_holds{0.0};
        for (std::size_t i = 1; i <= strides; ++i) lead_holds.push_back((static_cast<double>(i) - 0.5) * s);
        lead_holds.push_back(m * s);
        for (std::size_t i = 0; i + 1 < lead_holds.size(); ++i) {
            lead.push_back({params.pause + 2.0 * static_cast<double>(i) / params.cadence, lead_holds[i],
                            lead_holds[i + 1]});
        }
        for (std::size_t i = 0; i < strides; ++i) {
            trail.push_back({params.pause + (2.0 * static_cast<double>(i) + 1.0) / params.cadence,
                             static_cast<double>(i) * s, static_cast<double>(i + 1) * s});
        }
        walk.walking_span = {lead.front().t0, lead.back().t0 + tsw};
    }
    const bool left_leads = params.first_mover == Foot::Left;
    const detail::FootModel left_model(line, +1.0, params, left_leads ? lead : trail, tsw);
    const detail::FootModel right_model(line, -1.0, params, left_leads ? trail : lead, tsw);

    const std::size_t n_samples = static_cast<std::size_t>(std::llround(params.duration * params.sample_rate)) + 1;
    const Vec3 g = gravity_vector(params.g0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    auto noise = [&](double sigma) { return Vec3(sigma * unit(rng), sigma * unit(rng), sigma * unit(rng)); };

    auto build = [&](const detail::FootModel& model, const SensorErrorModel& sensor, FootTruth& truth,
                     ImuSeries& imu) {
        truth.states.reserve(n_samples);
        truth.stance.reserve(n_samples);
        imu.reserve(n_samples);
        const Mat3 mount = rotation_about_up(sensor.mount_yaw);  // IMU -> foot axes
        const double dt = 1.0 / params.sample_rate;
        std::vector<Vec3> point_f, point_w;
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double t = static_cast<double>(n) * dt;
            const detail::PoseSample ps = model.at(t);
            const Mat3 foot_to_xyu = orientation_from_euler(ps.roll, ps.pitch, ps.yaw).transpose();
            NavState st;
            st.t = t;
            st.p = ps.p;
            st.v = ps.v;
            st.C = (foot_to_xyu * mount).transpose();
            truth.states.push_back(st);
            truth.stance.push_back(ps.stance);
            point_f.push_back(st.C * (ps.a - g));
            point_w.push_back(mount.transpose() * detail::body_rate(ps));
        }
        for (std::size_t n = 0; n < n_samples; ++n) {
            ImuSample s;
            s.t = truth.states[n].t;
            if (params.output == ImuOutput::Increments && n > 0) {
                const NavState& a = truth.states[n - 1];
                const NavState& b = truth.states[n];
                s.w = vector_angle_from_rotation(b.C * a.C.transpose()) / dt;
                s.f = b.C * ((b.v - a.v) / dt - g);
            } else {
                s.f = point_f[n];
                s.w = point_w[n];
            }
            imu.push_back(s);
        }
        truth.step_starts = model.lift_offs();
        // noise drawn after the truth so that seeds never perturb it
        for (auto& s : imu) {
            s.f += sensor.accel_bias + noise(sensor.accel_noise);
            s.w += sensor.gyro_bias + noise(sensor.gyro_noise);
        }
    };
    build(left_model, params.left, walk.left_truth, walk.left_imu);
    build(right_model, params.right, walk.right_truth, walk.right_imu);
    return walk;
}

/// Expresses a truth trajectory in the frame the estimator reconstructs in:
/// origin at the first position, yaw of the first orientation removed.
inline std::vector<NavState> to_navigation_frame(const std::vector<NavState>& truth) {
    std::vector<NavState> out;
    if (truth.empty()) return out;
    const double yaw0 = yaw_of(truth.front().C);
    const Mat3 rot = rotation_about_up(-yaw0);
    const Vec3 origin = truth.front().p;
    out.reserve(truth.size());
    for (const auto& s : truth) {
        NavState r = s;
        r.p = rot * (s.p - origin);
        r.v = rot * s.v;
        r.C = s.C * rot.transpose();
        out.push_back(r);
    }
    return out;
}

}  // namespace footnav
