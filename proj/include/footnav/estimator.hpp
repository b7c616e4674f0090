#pragma once

// Zero-velocity-aided error-state Kalman filter with fixed-interval RTS
// smoothing for a single foot-mounted IMU.
//
// Error state (9): [dp, dv, beta], all in XYU, defined as true minus nominal.
// The attitude error beta relates the true and computed orientation by
//   C_true^T = (I + skew(beta)) C^T.
// During the forward pass only beta is folded back into the nominal
// orientation (at every gated update); dp and dv stay in the error state and
// are applied after smoothing.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "footnav/detectors.hpp"
#include "footnav/errors.hpp"
#include "footnav/geometry.hpp"
#include "footnav/mechanization.hpp"

namespace footnav {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat96 = Eigen::Matrix<double, 9, 6>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat69 = Eigen::Matrix<double, 6, 9>;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Covariance9 = Mat9;

struct ErrorState {
    Vec3 dp = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
    Vec3 beta = Vec3::Zero();

    static ErrorState from_vector(const Vec9& x) {
        return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6)};
    }
    Vec9 to_vector() const {
        Vec9 x;
        x << dp, dv, beta;
        return x;
    }
};

struct NoiseConfig {
    Mat6 Q = Mat6::Zero();         // per-sample [df, dw] covariance
    Mat6 R_pos_vel = Mat6::Zero(); // position+velocity pseudo-measurement
    Mat3 R_vel = Mat3::Zero();     // velocity-only pseudo-measurement
    Mat9 P0 = Mat9::Zero();

    struct Sigmas {
        double accel = 0.05;          // m/s^2
        double gyro = 0.005;          // rad/s
        double zupt_velocity = 0.01;  // m/s
        double anchor_position = 0.01;  // m
        double anchor_velocity = 0.01;  // m/s
        double initial_position = 1e-3;
        double initial_velocity = 1e-3;
        double initial_tilt = 1e-2;   // rad
        double initial_yaw = 1e-3;    // rad
    };

    static NoiseConfig from_sigmas(const Sigmas& s) {
        NoiseConfig n;
        n.Q.diagonal() << Vec3::Constant(s.accel * s.accel), Vec3::Constant(s.gyro * s.gyro);
        n.R_pos_vel.diagonal() << Vec3::Constant(s.anchor_position * s.anchor_position),
            Vec3::Constant(s.anchor_velocity * s.anchor_velocity);
        n.R_vel = Mat3::Identity() * (s.zupt_velocity * s.zupt_velocity);
        n.P0.diagonal() << Vec3::Constant(s.initial_position * s.initial_position),
            Vec3::Constant(s.initial_velocity * s.initial_velocity), s.initial_tilt * s.initial_tilt,
            s.initial_tilt * s.initial_tilt, s.initial_yaw * s.initial_yaw;
        return n;
    }
    static NoiseConfig defaults() { return from_sigmas(Sigmas{}); }
};

struct EstimatorConfig {
    MechanizationConfig mechanization{};
    double max_attitude_error = 0.5;  // rad
    double psd_tolerance = 1e-9;
    double max_condition = 1e12;
    bool check_covariance = true;
    bool anchor_final_position = true;
};

struct TransitionMatrices {
    Mat9 F = Mat9::Identity();
    Mat96 G = Mat96::Zero();
    Vec9 L = Vec9::Zero();
};

/// Linearized transition from `state` (time n-1) to `sample` (time n).
inline TransitionMatrices build_transition(const NavState& state, const ImuSample& sample, double g0 = kDefaultGravity) {
    const double dt = sample.t - state.t;
    TransitionMatrices tm;
    if (dt == 0.0) return tm;
    const RotMat c_next = rotation_from_vector_angle(sample.w * dt) * state.C;
    const Mat3 ct = c_next.transpose();
    const Vec3 f_xyu = ct * sample.f;
    tm.F.block<3, 3>(0, 3) = Mat3::Identity() * dt;
    tm.F.block<3, 3>(3, 6) = -skew(f_xyu) * dt;
    tm.G.block<3, 3>(3, 0) = ct * dt;
    tm.G.block<3, 3>(6, 3) = -ct * dt;
    tm.L.segment<3>(3) = (f_xyu + gravity_vector(g0)) * dt;
    return tm;
}

/// C_true = C (I + skew(beta))^T, re-projected onto SO(3).
inline RotMat apply_attitude_correction(const RotMat& c, const Vec3& beta) {
    return orthonormalize(c * (Mat3::Identity() + skew(beta)).transpose());
}

inline Mat9 symmetrize(const Mat9& p) { return 0.5 * (p + p.transpose()); }

inline double min_eigenvalue(const Mat9& p) {
    Eigen::SelfAdjointEigenSolver<Mat9> es(p, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Everything the smoother needs from the forward pass, one entry per sample.
/// Entry 0 holds the initial state with P_{0|0} = P_{0|-1} = P0 and F_0 = I.
struct ForwardPass {
    std::vector<NavState> nominal;  // after attitude compensation
    std::vector<Vec9> filtered;     // dx_{n|n}
    std::vector<Vec9> predicted;    // dx_{n|n-1}
    std::vector<Mat9> filtered_cov; // P_{n|n}
    std::vector<Mat9> predicted_cov;// P_{n|n-1}
    std::vector<Mat9> transition;   // F_n
    std::vector<bool> updated;      // gate fired at n
    std::size_t size() const { return nominal.size(); }
};

/// Sequential forward filter. forward_filter() drives it over a whole series;
/// dual-foot fusion drives two of them side by side and injects an extra
/// separation measurement.
class ForwardFilter {
public:
    ForwardFilter(const NavState& init, const NoiseConfig& noise, const EstimatorConfig& cfg)
        : noise_(noise), cfg_(cfg), nominal_(init), P_(noise.P0) {
        pass_.nominal.push_back(init);
        pass_.filtered.push_back(dx_);
        pass_.predicted.push_back(dx_);
        pass_.filtered_cov.push_back(P_);
        pass_.predicted_cov.push_back(P_);
        pass_.transition.push_back(Mat9::Identity());
        pass_.updated.push_back(false);
    }

    const NavState& nominal() const { return nominal_; }
    const Vec9& error() const { return dx_; }
    const Mat9& covariance() const { return P_; }
    std::size_t steps() const { return step_; }

    /// Total (nominal + error) position estimate.
    Vec3 position_estimate() const { return nominal_.p + dx_.segment<3>(0); }

    void predict(const ImuSample& sample) {
        const TransitionMatrices tm = build_transition(nominal_, sample, cfg_.mechanization.g0);
        ++step_;
        nominal_ = propagate(nominal_, sample, cfg_.mechanization, step_);
        dx_ = tm.F * dx_;
        P_ = symmetrize(tm.F * P_ * tm.F.transpose() + tm.G * noise_.Q * tm.G.transpose());
        F_ = tm.F;
        dx_pred_ = dx_;
        P_pred_ = P_;
        updated_ = false;
        check_covariance("prediction");
    }

    /// Position+velocity pseudo-measurement: p = anchor, v = 0.
    void update_position_velocity(const Vec3& anchor) {
        Mat69 H = Mat69::Zero();
        H.block<3, 3>(0, 0) = Mat3::Identity();
        H.block<3, 3>(3, 3) = Mat3::Identity();
        Eigen::Matrix<double, 6, 1> residual;
        residual << nominal_.p + dx_.segment<3>(0) - anchor, nominal_.v + dx_.segment<3>(3);
        apply_update<6>(H, residual, noise_.R_pos_vel);
    }

    /// Zero-velocity pseudo-measurement.
    void update_zero_velocity() {
        Mat39 H = Mat39::Zero();
        H.block<3, 3>(0, 3) = Mat3::Identity();
        const Vec3 residual = nominal_.v + dx_.segment<3>(3);
        apply_update<3>(H, residual, noise_.R_vel);
    }

    /// Scalar pseudo-measurement on the projection of position onto `axis`:
    /// axis . p_true = target, with variance `variance`.
    void update_position_projection(const Vec3& axis, double target, double variance) {
        Eigen::Matrix<double, 1, 9> H = Eigen::Matrix<double, 1, 9>::Zero();
        H.block<1, 3>(0, 0) = axis.transpose();
        Eigen::Matrix<double, 1, 1> residual;
        residual(0) = axis.dot(position_estimate()) - target;
        Eigen::Matrix<double, 1, 1> r;
        r(0) = variance;
        apply_update<1>(H, residual, r);
    }

    /// Folds beta into the nominal orientation and resets it.
    void compensate_attitude() {
        const Vec3 beta = dx_.segment<3>(6);
        if (!(beta.norm() < cfg_.max_attitude_error)) {
            throw Error(ErrorCode::DivergedFilter, "attitude error |beta| = " + std::to_string(beta.norm()) +
                                                       " at t = " + std::to_string(nominal_.t));
        }
        nominal_.C = apply_attitude_correction(nominal_.C, beta);
        dx_.segment<3>(6).setZero();
    }

    /// Records the products of the current step.
    void commit() {
        pass_.nominal.push_back(nominal_);
        pass_.filtered.push_back(dx_);
        pass_.predicted.push_back(dx_pred_);
        pass_.filtered_cov.push_back(P_);
        pass_.predicted_cov.push_back(P_pred_);
        pass_.transition.push_back(F_);
        pass_.updated.push_back(updated_);
    }

    ForwardPass take() && { return std::move(pass_); }

private:
    template <int M>
    void apply_update(const Eigen::Matrix<double, M, 9>& H, const Eigen::Matrix<double, M, 1>& residual,
                      const Eigen::Matrix<double, M, M>& R) {
        const Eigen::Matrix<double, M, M> S = H * P_ * H.transpose() + R;
        const Eigen::Matrix<double, 9, M> K = P_ * H.transpose() * S.inverse();
        dx_ = dx_ - K * residual;
        P_ = symmetrize((Mat9::Identity() - K * H) * P_);
        updated_ = true;
        check_covariance("update");
    }

    void check_covariance(const char* where) const {
        if (!cfg_.check_covariance) return;
        if (!P_.allFinite() || min_eigenvalue(P_) < -cfg_.psd_tolerance) {
            throw Error(ErrorCode::DivergedFilter, std::string("covariance lost positive semi-definiteness after ") +
                                                       where + " at t = " + std::to_string(nominal_.t));
        }
    }

    NoiseConfig noise_;
    EstimatorConfig cfg_;
    NavState nominal_;
    Vec9 dx_ = Vec9::Zero();
    Vec9 dx_pred_ = Vec9::Zero();
    Mat9 P_;
    Mat9 P_pred_ = Mat9::Zero();
    Mat9 F_ = Mat9::Identity();
    bool updated_ = false;
    std::size_t step_ = 0;
    ForwardPass pass_;
};

/// Which standstill windows carry a known position (start and finish of a
/// closed loop). Returns indices into `windows`.
inline std::vector<std::size_t> anchored_windows(const std::vector<IndexRange>& windows, bool anchor_final) {
    std::vector<std::size_t> out;
    if (windows.empty()) return out;
    out.push_back(0);
    if (anchor_final && windows.size() > 1) out.push_back(windows.size() - 1);
    return out;
}

/// Applies the gate/standstill logic of one sample to a filter that has just
/// been predicted to sample `n`.
inline void apply_gated_updates(ForwardFilter& filter, std::size_t n, const StationarityFlags& gate,
                                const std::vector<IndexRange>& windows, const std::vector<std::size_t>& anchored,
                                const Vec3& anchor = Vec3::Zero()) {
    if (!gate[n]) return;
    bool standstill = false;
    for (std::size_t w : anchored) standstill = standstill || windows[w].contains(n);
    if (standstill) {
        filter.update_position_velocity(anchor);
    } else {
        filter.update_zero_velocity();
    }
    filter.compensate_attitude();
}

inline ForwardPass forward_filter(const ImuSeries& series, const NavState& init, const StationarityFlags& gate,
                                  const std::vector<IndexRange>& standstills, const NoiseConfig& noise,
                                  const EstimatorConfig& cfg = {}) {
    if (gate.size() != series.size()) {
        throw Error(ErrorCode::LengthMismatch, "forward_filter: gate flags and series differ in length");
    }
    if (series.empty()) throw Error(ErrorCode::LengthMismatch, "forward_filter: empty series");
    const auto anchored = anchored_windows(standstills, cfg.anchor_final_position);
    ForwardFilter filter(init, noise, cfg);
    for (std::size_t n = 1; n < series.size(); ++n) {
        filter.predict(series[n]);
        apply_gated_updates(filter, n, gate, standstills, anchored);
        filter.commit();
    }
    return std::move(filter).take();
}

struct SmoothedPass {
    std::vector<Vec9> state;  // dx_{n|N}
    std::vector<Mat9> cov;    // P_{n|N}
};

/// Rauch-Tung-Striebel backward recursion over stored forward products.
/// With x_{n+1} = F_{n+1} x_n the gain is A_n = P_{n|n} F_{n+1}^T P_{n+1|n}^{-1}.
inline SmoothedPass rts_smooth(const std::vector<Vec9>& filtered, const std::vector<Mat9>& filtered_cov,
                               const std::vector<Mat9>& predicted_cov, const std::vector<Mat9>& transition,
                               const EstimatorConfig& cfg = {}) {
    const std::size_t n_samples = filtered.size();
    if (filtered_cov.size() != n_samples || predicted_cov.size() != n_samples || transition.size() != n_samples) {
        throw Error(ErrorCode::LengthMismatch, "rts_smooth: forward products differ in length");
    }
    SmoothedPass out;
    out.state.resize(n_samples);
    out.cov.resize(n_samples);
    if (n_samples == 0) return out;
    out.state[n_samples - 1] = filtered[n_samples - 1];
    out.cov[n_samples - 1] = filtered_cov[n_samples - 1];
    for (std::size_t k = n_samples - 1; k-- > 0;) {
        Mat9 p_pred = predicted_cov[k + 1];
        Eigen::SelfAdjointEigenSolver<Mat9> es(p_pred, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues()(0);
        double hi = es.eigenvalues()(8);
        if (!(lo > 0.0) || hi / lo > cfg.max_condition) {
            p_pred += Mat9::Identity() * (1e-12 * p_pred.trace() / 9.0);
            es.compute(p_pred, Eigen::EigenvaluesOnly);
            lo = es.eigenvalues()(0);
            hi = es.eigenvalues()(8);
            if (!(lo > 0.0) || hi / lo > cfg.max_condition) {
                throw Error(ErrorCode::SingularPrediction,
                            "rts_smooth: P_{n+1|n} ill-conditioned at sample " + std::to_string(k + 1));
            }
        }
        const Eigen::LLT<Mat9> llt(p_pred);
        const Mat9& f_next = transition[k + 1];
        // A^T = P_pred^{-1} F P_filt
        const Mat9 gain = llt.solve(f_next * filtered_cov[k]).transpose();
        const Vec9 dx_pred = f_next * filtered[k];
        out.state[k] = filtered[k] + gain * (out.state[k + 1] - dx_pred);
        out.cov[k] = symmetrize(filtered_cov[k] + gain * (out.cov[k + 1] - predicted_cov[k + 1]) * gain.transpose());
        if (cfg.check_covariance && min_eigenvalue(out.cov[k]) < -cfg.psd_tolerance) {
            throw Error(ErrorCode::DivergedFilter, "rts_smooth: smoothed covariance not PSD at sample " +
                                                       std::to_string(k));
        }
    }
    return out;
}

inline SmoothedPass rts_smooth(const ForwardPass& pass, const EstimatorConfig& cfg = {}) {
    return rts_smooth(pass.filtered, pass.filtered_cov, pass.predicted_cov, pass.transition, cfg);
}

struct FootTrajectory {
    std::vector<NavState> states;
    StationarityFlags stationary;  // instantaneous motionless flags
    StationarityFlags gate;        // GLRT gate that drove the updates
    std::vector<IndexRange> standstills;
    NavState initial;
    std::vector<double> covariance_trace;  // trace(P_{n|N}), empty if not kept

    std::size_t size() const { return states.size(); }
    std::vector<double> times() const {
        std::vector<double> t(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) t[i] = states[i].t;
        return t;
    }
};

inline FootTrajectory apply_smoothed_corrections(const std::vector<NavState>& nominal,
                                                 const std::vector<Vec9>& smoothed) {
    if (nominal.size() != smoothed.size()) {
        throw Error(ErrorCode::LengthMismatch, "apply_smoothed_corrections: lists differ in length");
    }
    FootTrajectory traj;
    traj.states.reserve(nominal.size());
    for (std::size_t n = 0; n < nominal.size(); ++n) {
        NavState s = nominal[n];
        const Vec9& dx = smoothed[n];
        s.p += dx.segment<3>(0);
        s.v += dx.segment<3>(3);
        const Vec3 beta = dx.segment<3>(6);
        if (!beta.isZero(0.0)) s.C = apply_attitude_correction(s.C, beta);
        traj.states.push_back(s);
    }
    return traj;
}

inline std::vector<double> times_of(const ImuSeries& series) {
    std::vector<double> t(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) t[i] = series[i].t;
    return t;
}

/// Set-up shared by single-foot reconstruction and dual-foot fusion: gate,
/// standstill windows and the levelled initial state.
struct FootSetup {
    StationarityFlags gate;
    std::vector<IndexRange> standstills;
    NavState initial;
};

inline FootSetup prepare_foot(const ImuSeries& series, const DetectorConfig& det) {
    FootSetup setup;
    const auto times = times_of(series);
    setup.gate = stance_gate(series, det);
    setup.standstills = standstill_windows(setup.gate, times, det.standstill_min_duration);
    if (setup.standstills.empty() || setup.standstills.front().begin != 0) {
        throw Error(ErrorCode::NotStationary, "series does not start with a standstill of at least " +
                                                  std::to_string(det.standstill_min_duration) + " s");
    }
    LevelingThresholds th;
    th.g0 = det.g0;
    th.epsilon = det.epsilon;
    th.alpha = det.alpha;
    setup.initial.t = series.front().t;
    setup.initial.C = initial_orientation(series, setup.standstills.front(), th);
    return setup;
}

/// Smooths a completed forward pass and attaches flags/diagnostics.
inline FootTrajectory finish_foot(const ImuSeries& series, const ForwardPass& pass, const FootSetup& setup,
                                  const DetectorConfig& det, const EstimatorConfig& est) {
    const SmoothedPass smoothed = rts_smooth(pass, est);
    FootTrajectory traj = apply_smoothed_corrections(pass.nominal, smoothed.state);
    for (const auto& s : traj.states) {
        if (!s.C.allFinite()) throw Error(ErrorCode::DivergedFilter, "non-finite orientation after smoothing");
    }
    for (const auto& dx : smoothed.state) {
        if (!(dx.segment<3>(6).norm() < est.max_attitude_error)) {
            throw Error(ErrorCode::DivergedFilter, "smoothed attitude error above guard");
        }
    }
    traj.gate = setup.gate;
    traj.standstills = setup.standstills;
    traj.initial = setup.initial;
    traj.covariance_trace.reserve(smoothed.cov.size());
    for (const auto& p : smoothed.cov) traj.covariance_trace.push_back(p.trace());
    traj.stationary = motionless_flags(series, causal_orientations(series, setup.initial.C, det), det);
    return traj;
}

/// Full single-foot pipeline: gate, standstills, leveling, forward filter,
/// smoother, corrections, motionless flags.
inline FootTrajectory reconstruct_foot(const ImuSeries& series, const DetectorConfig& det, const NoiseConfig& noise,
                                       const EstimatorConfig& est = {}) {
    validate_series(series, est.mechanization);
    const FootSetup setup = prepare_foot(series, det);
    const ForwardPass pass = forward_filter(series, setup.initial, setup.gate, setup.standstills, noise, est);
    return finish_foot(series, pass, setup, det, est);
}

}  // namespace footnav
