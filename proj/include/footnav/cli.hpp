#pragma once

// Batch front end. Every command is a plain function returning the process
// exit code (0 ok/pass, 2 quality gate failed, 1 error) so that tests can
// drive it in-process; tools/footnav.cpp only parses arguments.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "footnav/dataset_io.hpp"
#include "footnav/errors.hpp"
#include "footnav/fusion.hpp"
#include "footnav/synthetic_gait.hpp"
#include "footnav/verification.hpp"

namespace footnav {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitGateFailed = 2 };

// ---------------------------------------------------------------------------
// Flat key-value configuration
// ---------------------------------------------------------------------------

/// Ordered "key: value" store shared by run configs and synth parameter
/// files. Values are written with the shortest exact representation.
class KeyValueConfig {
public:
    using Entry = std::pair<std::string, std::string>;

    static KeyValueConfig parse(const std::string& text, const std::string& source = "config") {
        KeyValueConfig cfg;
        const auto lines = detail::lines_of(text);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string line = detail::trim(lines[i]);
            if (line.empty() || line.front() == '#') continue;
            const auto colon = line.find(':');
            if (colon == std::string::npos) {
                throw Error(ErrorCode::InvalidConfig,
                            source + ":" + std::to_string(i + 1) + ": expected 'key: value', got '" + line + "'");
            }
            cfg.set(detail::trim(std::string_view(line).substr(0, colon)),
                    detail::trim(std::string_view(line).substr(colon + 1)));
        }
        return cfg;
    }
    static KeyValueConfig load(const fs::path& path) { return parse(detail::read_file(path), path.string()); }

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_) {
            if (k == key) {
                v = value;
                return;
            }
        }
        entries_.emplace_back(key, value);
    }
    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
    const std::vector<Entry>& entries() const { return entries_; }

    std::string format() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + ": " + v + "\n";
        return out;
    }

private:
    std::vector<Entry> entries_;
};

namespace detail {

/// Two-way binding between named keys and struct fields.
class Binder {
public:
    void real(const std::string& key, double& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = to_real(v); },
                             [&field] { return format_exact(field); }});
    }
    void degrees(const std::string& key, double& radians) {
        bindings_.push_back({key, [&radians](const std::string& v) { radians = deg_to_rad(to_real(v)); },
                             [&radians] { return format_exact(rad_to_deg(radians)); }});
    }
    void count(const std::string& key, std::size_t& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = to_count(v); },
                             [&field] { return std::to_string(field); }});
    }
    void integer(const std::string& key, int& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = static_cast<int>(to_real(v)); },
                             [&field] { return std::to_string(field); }});
    }
    void seed(const std::string& key, std::uint64_t& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = std::stoull(v); },
                             [&field] { return std::to_string(field); }});
    }
    void flag(const std::string& key, bool& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = to_bool(v); },
                             [&field] { return std::string(field ? "true" : "false"); }});
    }
    void text(const std::string& key, std::string& field) {
        bindings_.push_back({key, [&field](const std::string& v) { field = v; }, [&field] { return field; }});
    }
    void custom(const std::string& key, std::function<void(const std::string&)> set,
                std::function<std::string()> get) {
        bindings_.push_back({key, std::move(set), std::move(get)});
    }

    void apply(const KeyValueConfig& cfg) {
        for (const auto& [k, v] : cfg.entries()) {
            auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == k; });
            if (it == bindings_.end()) throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "'");
            try {
                it->set(v);
            } catch (const Error&) {
                throw;
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidConfig, "bad value '" + v + "' for key '" + k + "'");
            }
        }
    }
    KeyValueConfig dump() const {
        KeyValueConfig out;
        for (const auto& b : bindings_) out.set(b.key, b.get());
        return out;
    }

    static double to_real(const std::string& v) {
        const auto d = parse_double(v);
        if (!d || !std::isfinite(*d)) throw Error(ErrorCode::InvalidConfig, "not a number: '" + v + "'");
        return *d;
    }
    static std::size_t to_count(const std::string& v) {
        const double d = to_real(v);
        if (d < 0.0 || d != std::floor(d)) throw Error(ErrorCode::InvalidConfig, "not a count: '" + v + "'");
        return static_cast<std::size_t>(d);
    }
    static bool to_bool(const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error(ErrorCode::InvalidConfig, "not a boolean: '" + v + "'");
    }

private:
    struct Binding {
        std::string key;
        std::function<void(const std::string&)> set;
        std::function<std::string()> get;
    };
    std::vector<Binding> bindings_;
};

}  // namespace detail

struct RunConfig {
    ReferenceConfig reference{};
    NoiseConfig::Sigmas noise{};
    QualityThresholds gate{};
    StepPeriodConfig steps{};
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    bool diagnostics = false;

    static RunConfig defaults() { return {}; }

    static RunConfig from(const KeyValueConfig& kv) {
        RunConfig cfg;
        cfg.bind().apply(kv);
        cfg.finalize();
        return cfg;
    }
    static RunConfig load(const fs::path& path) { return from(KeyValueConfig::load(path)); }

    KeyValueConfig to_key_values() const {
        RunConfig copy = *this;
        return copy.bind().dump();
    }
    std::string format() const { return to_key_values().format(); }

    void finalize() {
        reference.noise = NoiseConfig::from_sigmas(noise);
        reference.estimator.mechanization.g0 = reference.detector.g0;
        gate.dtw_sampling = reference.heading;
        gate.standstill_min_duration = reference.detector.standstill_min_duration;
        if (jobs == 0) throw Error(ErrorCode::InvalidConfig, "jobs must be at least 1");
    }

private:
    detail::Binder bind() {
        detail::Binder b;
        auto& d = reference.detector;
        b.real("g0", d.g0);
        b.real("detector.epsilon", d.epsilon);
        b.real("detector.alpha", d.alpha);
        b.real("detector.gamma", d.gamma);
        b.count("detector.half_window", d.half_window);
        b.real("detector.sigma_a", d.sigma_a);
        b.real("detector.sigma_w", d.sigma_w);
        b.real("detector.min_flight_time", d.min_flight_time);
        b.real("detector.standstill_min_duration", d.standstill_min_duration);
        b.real("detector.releveling_gain", d.releveling_gain);
        b.real("noise.accel", noise.accel);
        b.real("noise.gyro", noise.gyro);
        b.real("noise.zupt_velocity", noise.zupt_velocity);
        b.real("noise.anchor_position", noise.anchor_position);
        b.real("noise.anchor_velocity", noise.anchor_velocity);
        b.real("noise.initial_position", noise.initial_position);
        b.real("noise.initial_velocity", noise.initial_velocity);
        b.real("noise.initial_tilt", noise.initial_tilt);
        b.real("noise.initial_yaw", noise.initial_yaw);
        auto& e = reference.estimator;
        b.real("estimator.max_gap", e.mechanization.max_gap);
        b.count("estimator.reorthonormalize_every", e.mechanization.reorthonormalize_every);
        b.real("estimator.max_attitude_error", e.max_attitude_error);
        b.flag("estimator.anchor_final_position", e.anchor_final_position);
        b.degrees("heading.resolution_deg", reference.heading.resolution);
        b.integer("heading.refine_factor", reference.heading.refine_factor);
        b.real("heading.decimation_hz", reference.heading.decimation_hz);
        b.count("heading.max_points", reference.heading.max_points);
        b.flag("fusion.enabled", reference.fuse);
        b.real("fusion.max_separation", reference.fusion.max_separation);
        b.real("fusion.separation_sigma", reference.fusion.separation_sigma);
        b.real("gate.dtw_max", gate.dtw_max);
        b.real("gate.closure_max", gate.closure_max);
        b.count("gate.step_count_tolerance", gate.step_count_tolerance);
        b.real("steps.resample_hz", steps.resample_hz);
        b.real("steps.band_low_hz", steps.band_low_hz);
        b.real("steps.band_high_hz", steps.band_high_hz);
        b.real("steps.min_peak_spacing", steps.min_peak_spacing);
        b.real("steps.relative_threshold", steps.relative_threshold);
        b.real("steps.absolute_threshold", steps.absolute_threshold);
        b.count("jobs", jobs);
        b.seed("seed", seed);
        b.flag("diagnostics", diagnostics);
        return b;
    }
};

// ---------------------------------------------------------------------------
// Synthetic fixture parameters
// ---------------------------------------------------------------------------

struct SynthConfig {
    GaitParams gait{};
    PhoneParams phone{};
    std::size_t phones = 3;
    std::uint64_t seed = 1;
    std::string date = "2018-08-27";
    std::string start_time = "18-20-06.730";

    static SynthConfig from(const KeyValueConfig& kv) {
        SynthConfig cfg;
        cfg.bind().apply(kv);
        return cfg;
    }
    KeyValueConfig to_key_values() const {
        SynthConfig copy = *this;
        return copy.bind().dump();
    }

private:
    detail::Binder bind() {
        detail::Binder b;
        b.custom("shape", [this](const std::string& v) { gait.shape = parse_path_shape(v); },
                 [this] { return to_string(gait.shape); });
        b.real("stride", gait.stride);
        b.real("cadence", gait.cadence);
        b.real("stance_fraction", gait.stance_fraction);
        b.real("duration", gait.duration);
        b.real("sample_rate", gait.sample_rate);
        b.real("pause", gait.pause);
        b.real("foot_spacing", gait.foot_spacing);
        b.real("lift_height", gait.lift_height);
        b.real("pitch_amplitude", gait.pitch_amplitude);
        b.real("roll_amplitude", gait.roll_amplitude);
        b.degrees("line_heading_deg", gait.line_heading);
        b.real("g0", gait.g0);
        b.custom("first_mover",
                 [this](const std::string& v) {
                     if (v == "left") gait.first_mover = Foot::Left;
                     else if (v == "right") gait.first_mover = Foot::Right;
                     else throw Error(ErrorCode::InvalidConfig, "first_mover must be left or right");
                 },
                 [this] { return std::string(gait.first_mover == Foot::Left ? "left" : "right"); });
        for (auto [name, sensor] : {std::pair<std::string, SensorErrorModel*>{"left", &gait.left},
                                    std::pair<std::string, SensorErrorModel*>{"right", &gait.right}}) {
            b.degrees(name + ".mount_yaw_deg", sensor->mount_yaw);
            b.real(name + ".accel_noise", sensor->accel_noise);
            b.real(name + ".gyro_noise", sensor->gyro_noise);
            for (int k = 0; k < 3; ++k) {
                const std::string axis(1, "xyz"[k]);
                b.real(name + ".accel_bias_" + axis, sensor->accel_bias(k));
                b.real(name + ".gyro_bias_" + axis, sensor->gyro_bias(k));
            }
        }
        b.count("phones", phones);
        b.real("phone.rate_hz", phone.rate_hz);
        b.real("phone.bob_amplitude", phone.bob_amplitude);
        b.real("phone.accel_noise", phone.accel_noise);
        b.real("phone.gyro_noise", phone.gyro_noise);
        b.seed("seed", seed);
        b.text("date", date);
        b.text("start_time", start_time);
        return b;
    }
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

inline void run_parallel(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& work) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) work(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::string truth_csv(const std::vector<NavState>& states, const StationarityFlags& stance) {
    std::string out = "t[s],x[m],y[m],u[m],stance\n";
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        out += format_exact(s.t) + "," + format_exact(s.p.x()) + "," + format_exact(s.p.y()) + "," +
               format_exact(s.p.z()) + "," + (stance[i] ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string diagnostics_csv(const FootTrajectory& traj) {
    std::string out = "t[s],trace_P,gate\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out += format_fixed6(traj.states[i].t) + "," + format_exact(traj.covariance_trace[i]) + "," +
               (traj.gate[i] ? "1" : "0") + "\n";
    }
    return out;
}

/// Role and synchronization shift of every smartphone of an experiment. The
/// master is the single device whose meta.txt lacks SlaveReceiveStartRealtime.
struct DeviceSync {
    const CoreDataSet* device;
    bool slave;
    double shift_ms;
};

inline std::vector<DeviceSync> device_shifts(const ExperimentBundle& exp) {
    std::vector<DeviceSync> out;
    std::vector<std::string> masters;
    for (const auto& d : exp.devices) {
        if (!is_slave(d.meta)) masters.push_back(d.folder.identifier);
    }
    if (masters.size() > 1) {
        std::string ids;
        for (const auto& m : masters) ids += (ids.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::MissingSyncKey, "experiment " + exp.key + ": " + std::string(kSlaveKey) +
                                                   " missing on more than one device (" + ids + ")");
    }
    if (masters.empty() && !exp.devices.empty()) {
        throw Error(ErrorCode::MissingSyncKey, "experiment " + exp.key + ": no master device");
    }
    for (const auto& d : exp.devices) {
        const bool slave = is_slave(d.meta);
        out.push_back({&d, slave, sync_shift(d.meta, slave, d.folder.name())});
    }
    return out;
}

inline ExperimentBundle single_experiment(const fs::path& root, bool load_core) {
    ScanResult scan = scan_experiments(root, load_core);
    if (!scan.malformed.empty()) {
        throw Error(ErrorCode::MalformedFolderName, "'" + scan.malformed.front().filename().string() +
                                                        "' is not <date>_<time>_<reference|device id>");
    }
    if (scan.experiments.empty()) throw Error(ErrorCode::IoFailure, "no experiment folders under " + root.string());
    if (scan.experiments.size() > 1) {
        throw Error(ErrorCode::IoFailure, "more than one experiment under " + root.string());
    }
    return std::move(scan.experiments.front());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct ReconstructOptions {
    fs::path root;
    std::optional<fs::path> out;  // default: the reference folder
    RunConfig config = RunConfig::defaults();
};

struct ExperimentResult {
    std::string name;
    std::optional<QualityReport> report;
    std::string error;
};

/// Reconstructs one experiment's reference folder into `out_dir`.
inline QualityReport reconstruct_experiment(const ExperimentFolder& reference, const fs::path& out_dir,
                                            const RunConfig& cfg) {
    const auto [left, right] = reference_imu_ingest(reference.path);
    const ReferenceBundle bundle = reconstruct_pair(left, right, cfg.reference);
    const ReferenceDataSet ds = make_reference_dataset(bundle);
    write_reference(ds, out_dir);
    const QualityReport report = quality_gate(bundle, cfg.gate);
    detail::write_file(out_dir / "quality.csv", QualityReport::csv_header() + "\n" + report.csv_row() + "\n");
    detail::write_file(out_dir / "config.txt", cfg.format());
    if (cfg.diagnostics) {
        detail::write_file(out_dir / "diagnostics_left.csv", detail::diagnostics_csv(bundle.left));
        detail::write_file(out_dir / "diagnostics_right.csv", detail::diagnostics_csv(bundle.right));
    }
    return report;
}

/// Processes every experiment under `root` that has a reference folder.
inline int cmd_reconstruct(const ReconstructOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<ExperimentFolder> refs;
    try {
        const ScanResult scan = scan_experiments(opt.root, false);
        for (const auto& m : scan.malformed) {
            err << "warning: skipping " << m.filename().string() << " (MalformedFolderName)\n";
        }
        for (const auto& e : scan.experiments) {
            if (!e.reference) {
                throw Error(ErrorCode::MissingReference, "experiment " + e.key + " has no reference folder");
            }
            refs.push_back(*e.reference);
        }
        if (refs.empty()) throw Error(ErrorCode::MissingReference, "no experiments under " + opt.root.string());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    std::vector<ExperimentResult> results(refs.size());
    detail::run_parallel(refs.size(), opt.config.jobs, [&](std::size_t i) {
        results[i].name = refs[i].name();
        const fs::path dir = opt.out ? *opt.out / refs[i].name() : refs[i].path;
        try {
            results[i].report = reconstruct_experiment(refs[i], dir, opt.config);
        } catch (const std::exception& e) {
            results[i].error = e.what();
        }
    });
    int code = kExitOk;
    for (const auto& r : results) {
        if (!r.error.empty()) {
            err << "error: " << r.name << ": " << r.error << "\n";
            code = kExitError;
            continue;
        }
        out << r.report->summary(r.name) << "\n";
        if (!r.report->pass && code == kExitOk) code = kExitGateFailed;
    }
    return code;
}

/// Writes a synthetic experiment: reference IMU logs plus truth, and the
/// requested number of smartphones (first one master).
inline int cmd_synth(const SynthConfig& cfg, const fs::path& out_root, std::ostream& out, std::ostream& err) {
    try {
        const SyntheticWalk walk = synth_gait(cfg.gait, cfg.seed);
        const std::string key = cfg.date + "_" + cfg.start_time;
        parse_folder_name(key + "_reference");
        const fs::path ref = out_root / (key + "_reference");
        write_imu_csv(ref / kLeftImuFile, walk.left_imu);
        write_imu_csv(ref / kRightImuFile, walk.right_imu);
        detail::write_file(ref / "LeftFootTruth.csv",
                           detail::truth_csv(to_navigation_frame(walk.left_truth.states), walk.left_truth.stance));
        detail::write_file(ref / "RightFootTruth.csv",
                           detail::truth_csv(to_navigation_frame(walk.right_truth.states), walk.right_truth.stance));
        detail::write_file(ref / "synth.txt", cfg.to_key_values().format());
        const double master_start = 1535383206730.0;
        for (std::size_t k = 0; k < cfg.phones; ++k) {
            const std::string id = std::to_string(358351080456283ULL + 1000 * k);
            const fs::path dir = out_root / (key + "_" + id);
            PhoneParams pp = cfg.phone;
            ExperimentMeta meta;
            meta.set("Placement", k == 0 ? "left hand, navigation position" : "in jeans front pocket");
            meta.set("Note", "synthetic");
            meta.set(kMasterKey, format_exact(master_start));
            if (k == 0) {
                pp.clock_offset_ms = master_start;
            } else {
                const double slave_start = 1000.0 * static_cast<double>(37 + 11 * k);
                meta.set(kSlaveKey, format_exact(slave_start));
                pp.clock_offset_ms = slave_start;
            }
            const auto [acc, gyr] = synth_phone(walk, cfg.gait, pp, cfg.seed * 1000 + k + 1);
            write_meta(dir / "meta.txt", meta);
            write_sensor_csv(dir / ("accelerometer_" + id + ".csv"), acc);
            write_sensor_csv(dir / ("gyroscope_" + id + ".csv"), gyr);
        }
        out << "wrote " << (out_root / (key + "_reference")).string() << " (" << walk.left_imu.size()
            << " samples per foot, " << walk.strides << " strides, " << cfg.phones << " phones)\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

/// Reports the timestamp shift applied to each smartphone; with `out_root`
/// also writes synchronized copies of every sensor file.
inline int cmd_sync(const fs::path& root, const std::optional<fs::path>& out_root, std::ostream& out,
                    std::ostream& err) {
    try {
        const ExperimentBundle exp = detail::single_experiment(root, true);
        for (const auto& s : detail::device_shifts(exp)) {
            out << s.device->folder.identifier << " " << (s.slave ? "slave" : "master") << " shift_ms="
                << format_exact(s.shift_ms) << "\n";
            if (!out_root) continue;
            const fs::path dir = *out_root / s.device->folder.name();
            write_meta(dir / "meta.txt", s.device->meta);
            for (const auto& [kind, table] : s.device->tables) {
                SensorTable shifted = table;
                shifted.t_ms = shift_timestamps(table.t_ms, s.shift_ms);
                write_sensor_csv(dir / (file_prefix(kind) + "_" + s.device->folder.identifier + ".csv"), shifted);
            }
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

struct StepComparisonRow {
    double t = 0.0;
    std::optional<double> phone;
    double reference = 0.0;
};

/// Reference duration whose start is nearest to `t`.
inline double nearest_reference_duration(std::span<const double> starts, std::span<const double> durations, double t) {
    const auto it = std::lower_bound(starts.begin(), starts.end(), t);
    std::size_t i = static_cast<std::size_t>(it - starts.begin());
    if (i >= durations.size()) i = durations.size() - 1;
    if (i > 0 && std::abs(starts[i - 1] - t) <= std::abs(starts[i] - t)) --i;
    return durations[i];
}

inline std::string format_step_comparison(const std::vector<StepComparisonRow>& rows) {
    std::string out = "t[s],phone_duration[s],reference_duration[s]\n";
    for (const auto& r : rows) {
        out += format_fixed6(r.t) + "," + (r.phone ? format_fixed6(*r.phone) : std::string()) + "," +
               format_fixed6(r.reference) + "\n";
    }
    return out;
}

/// Smartphone step durations against reference step durations. Reference
/// step starts are read from Left_steps.csv / Right_steps.csv.
inline int cmd_compare_steps(const fs::path& root, const std::optional<fs::path>& out_root, const RunConfig& cfg,
                             std::ostream& out, std::ostream& err) {
    try {
        const ExperimentBundle exp = detail::single_experiment(root, true);
        if (!exp.reference) throw Error(ErrorCode::MissingReference, "experiment " + exp.key + " has no reference folder");
        const fs::path ref = exp.reference->path;
        for (const char* f : {kLeftStepsFile, kRightStepsFile}) {
            if (!fs::exists(ref / f)) {
                throw Error(ErrorCode::MissingReference, (ref / f).string() + " not found (run reconstruct first)");
            }
        }
        std::vector<double> left, right;
        for (const auto& r : read_steps_csv(ref / kLeftStepsFile)) left.push_back(r.t);
        for (const auto& r : read_steps_csv(ref / kRightStepsFile)) right.push_back(r.t);
        std::vector<double> starts = left;
        starts.insert(starts.end(), right.begin(), right.end());
        std::sort(starts.begin(), starts.end());
        const std::vector<double> durations = reference_step_periods(left, right);
        if (durations.empty()) throw Error(ErrorCode::TooShort, "fewer than two reference step starts");
        const fs::path dest = out_root ? *out_root : ref;
        double ref_mean = 0.0;
        for (double d : durations) ref_mean += d / static_cast<double>(durations.size());

        if (exp.devices.empty()) {
            std::vector<StepComparisonRow> rows;
            for (std::size_t i = 0; i < durations.size(); ++i) rows.push_back({starts[i], std::nullopt, durations[i]});
            detail::write_file(dest / "step_comparison_reference.csv", format_step_comparison(rows));
            out << "reference: " << durations.size() << " durations, mean " << format_fixed6(ref_mean)
                << " s (no smartphone data)\n";
            return kExitOk;
        }
        for (const auto& s : detail::device_shifts(exp)) {
            const StepPeriods p = smartphone_step_periods(*s.device, s.shift_ms, cfg.steps);
            std::vector<StepComparisonRow> rows;
            double abs_diff = 0.0, phone_mean = 0.0;
            for (std::size_t i = 0; i < p.durations.size(); ++i) {
                const double r = nearest_reference_duration(starts, durations, p.events[i]);
                rows.push_back({p.events[i], p.durations[i], r});
                abs_diff += std::abs(p.durations[i] - r);
                phone_mean += p.durations[i];
            }
            const std::string id = s.device->folder.identifier;
            detail::write_file(dest / ("step_comparison_" + id + ".csv"), format_step_comparison(rows));
            const double n = static_cast<double>(std::max<std::size_t>(1, rows.size()));
            out << id << ": " << rows.size() << " durations, phone mean " << format_fixed6(phone_mean / n)
                << " s, reference mean " << format_fixed6(ref_mean) << " s, mean |diff| "
                << format_fixed6(abs_diff / n) << " s\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

/// Re-runs the quality gate on already published reference files.
inline int cmd_validate(const fs::path& root, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const ScanResult scan = scan_experiments(root, false);
        if (!scan.malformed.empty()) {
            throw Error(ErrorCode::MalformedFolderName, "'" + scan.malformed.front().filename().string() +
                                                            "' is not <date>_<time>_<reference|device id>");
        }
        if (scan.experiments.empty()) throw Error(ErrorCode::IoFailure, "no experiment folders under " + root.string());
        int code = kExitOk;
        for (const auto& e : scan.experiments) {
            if (!e.reference) throw Error(ErrorCode::MissingReference, "experiment " + e.key + " has no reference folder");
            const QualityReport r = quality_gate(read_reference(e.reference->path), cfg.gate);
            out << r.summary(e.reference->name()) << "\n";
            if (!r.pass) code = kExitGateFailed;
        }
        return code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace footnav
