#pragma once

// Readers and writers for the experiment folder layout.
//
// An experiment is a set of sibling folders sharing date and start time:
//   2018-08-27_18-20-06.730_reference          reference (foot IMU) data
//   2018-08-27_18-20-06.730_358351080456283    one folder per smartphone
// See FORMATS.md for the byte-level description of every file.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "footnav/errors.hpp"
#include "footnav/fusion.hpp"
#include "footnav/mechanization.hpp"

namespace footnav {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
        start = end + 1;
    }
    return out;
}

}  // namespace detail

/// Fixed six-decimal formatting; "-0.000000" is written as "0.000000".
inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

/// Shortest representation that reads back to the same double.
inline std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Folder names
// ---------------------------------------------------------------------------

struct ExperimentFolder {
    std::string date;        // YYYY-MM-DD
    std::string start_time;  // HH-MM-SS.mmm
    std::string identifier;  // "reference" or numeric device id
    fs::path path;

    bool is_reference() const { return identifier == "reference"; }
    std::string experiment_key() const { return date + "_" + start_time; }
    std::string name() const { return experiment_key() + "_" + identifier; }
};

inline ExperimentFolder parse_folder_name(const std::string& name) {
    static const std::regex re(R"(^(\d{4}-\d{2}-\d{2})_(\d{2}-\d{2}-\d{2}\.\d{3})_(reference|\d+)$)");
    std::smatch m;
    if (!std::regex_match(name, m, re)) {
        throw Error(ErrorCode::MalformedFolderName, "'" + name + "' is not <date>_<time>_<reference|device id>");
    }
    return {m[1].str(), m[2].str(), m[3].str(), fs::path(name)};
}

// ---------------------------------------------------------------------------
// meta.txt
// ---------------------------------------------------------------------------

/// "key: value" dictionary with insertion order preserved. Lines without a
/// colon continue the previous value.
class ExperimentMeta {
public:
    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : entries_) {
            if (k == key) return v;
        }
        return std::nullopt;
    }
    bool contains(const std::string& key) const { return get(key).has_value(); }

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries_) {
            if (k == key) {
                v = value;
                return;
            }
        }
        entries_.emplace_back(key, value);
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    static ExperimentMeta parse(const std::string& text) {
        ExperimentMeta meta;
        for (const auto& raw : detail::lines_of(text)) {
            if (detail::trim(raw).empty()) continue;
            const auto colon = raw.find(':');
            if (colon == std::string::npos) {
                if (meta.entries_.empty()) {
                    throw Error(ErrorCode::IoFailure, "meta.txt: line without key: '" + raw + "'");
                }
                meta.entries_.back().second += "\n" + detail::trim(raw);
                continue;
            }
            meta.entries_.emplace_back(detail::trim(std::string_view(raw).substr(0, colon)),
                                       detail::trim(std::string_view(raw).substr(colon + 1)));
        }
        return meta;
    }

    std::string format() const {
        std::string out;
        for (const auto& [k, v] : entries_) {
            out += k + ": ";
            for (char c : v) {
                out += c;
                if (c == '\n') out += "  ";
            }
            out += "\n";
        }
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

inline ExperimentMeta read_meta(const fs::path& path) { return ExperimentMeta::parse(detail::read_file(path)); }
inline void write_meta(const fs::path& path, const ExperimentMeta& meta) { detail::write_file(path, meta.format()); }

// ---------------------------------------------------------------------------
// Smartphone sensor CSVs
// ---------------------------------------------------------------------------

enum class SensorKind { Accelerometer, Gyroscope, GyroscopeUncalibrated, MagneticField, MagneticFieldUncalibrated };

inline constexpr std::array<SensorKind, 5> kAllSensorKinds = {
    SensorKind::Accelerometer, SensorKind::Gyroscope, SensorKind::GyroscopeUncalibrated,
    SensorKind::MagneticField, SensorKind::MagneticFieldUncalibrated};

/// Columns including the timestamp.
inline constexpr std::size_t column_count(SensorKind k) {
    switch (k) {
        case SensorKind::GyroscopeUncalibrated:
        case SensorKind::MagneticFieldUncalibrated: return 7;
        default: return 4;
    }
}

inline std::string file_prefix(SensorKind k) {
    switch (k) {
        case SensorKind::Accelerometer: return "accelerometer";
        case SensorKind::Gyroscope: return "gyroscope";
        case SensorKind::GyroscopeUncalibrated: return "gyroscope_uncalibrated";
        case SensorKind::MagneticField: return "magnetic_field";
        case SensorKind::MagneticFieldUncalibrated: return "magnetic_field_uncalibrated";
    }
    return "";
}

inline std::string csv_header(SensorKind k) {
    switch (k) {
        case SensorKind::Accelerometer: return "t[ms],fx[m/s^2],fy[m/s^2],fz[m/s^2]";
        case SensorKind::Gyroscope: return "t[ms],wx[rad/s],wy[rad/s],wz[rad/s]";
        case SensorKind::GyroscopeUncalibrated:
            return "t[ms],wx[rad/s],wy[rad/s],wz[rad/s],drift_x[rad/s],drift_y[rad/s],drift_z[rad/s]";
        case SensorKind::MagneticField: return "t[ms],mx[uT],my[uT],mz[uT]";
        case SensorKind::MagneticFieldUncalibrated:
            return "t[ms],mx[uT],my[uT],mz[uT],bias_x[uT],bias_y[uT],bias_z[uT]";
    }
    return "";
}

/// Sensor kind of a core-data file name such as "gyroscope_uncalibrated_1.csv".
inline std::optional<SensorKind> classify_sensor_file(const std::string& filename) {
    if (filename.size() < 4 || filename.substr(filename.size() - 4) != ".csv") return std::nullopt;
    const std::string stem = filename.substr(0, filename.size() - 4);
    auto matches = [&](const std::string& prefix) {
        return stem == prefix || stem.rfind(prefix + "_", 0) == 0;
    };
    // longer prefixes first
    if (matches("gyroscope_uncalibrated")) return SensorKind::GyroscopeUncalibrated;
    if (matches("magnetic_field_uncalibrated")) return SensorKind::MagneticFieldUncalibrated;
    if (matches("gyroscope")) return SensorKind::Gyroscope;
    if (matches("magnetic_field")) return SensorKind::MagneticField;
    if (matches("accelerometer")) return SensorKind::Accelerometer;
    return std::nullopt;
}

/// Rows of one sensor file in stored units (timestamps in ms).
struct SensorTable {
    SensorKind kind = SensorKind::Accelerometer;
    std::vector<double> t_ms;
    std::vector<std::array<double, 6>> values;  // first column_count-1 entries used

    std::size_t size() const { return t_ms.size(); }
    std::size_t channels() const { return column_count(kind) - 1; }
};

namespace detail {

/// Parses a numeric CSV with an optional single header line. Returns rows.
inline std::vector<std::vector<double>> parse_numeric_csv(const std::string& text, std::size_t columns,
                                                          const std::string& source) {
    std::vector<std::vector<double>> rows;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto fields = split(lines[i], ',');
        std::vector<double> row;
        row.reserve(fields.size());
        bool numeric = true;
        for (auto f : fields) {
            const auto v = parse_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (i == 0) continue;  // header
            throw Error(ErrorCode::IoFailure, source + ":" + std::to_string(i + 1) + ": non-numeric field");
        }
        if (row.size() != columns) {
            throw Error(ErrorCode::ColumnCountMismatch, source + ":" + std::to_string(i + 1) + ": expected " +
                                                            std::to_string(columns) + " columns, found " +
                                                            std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

inline SensorTable parse_sensor_csv(const fs::path& path, SensorKind kind) {
    const auto rows = detail::parse_numeric_csv(detail::read_file(path), column_count(kind), path.string());
    SensorTable table;
    table.kind = kind;
    table.t_ms.reserve(rows.size());
    table.values.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i][0] < rows[i - 1][0]) {
            throw Error(ErrorCode::NonMonotonicTimestamps,
                        path.string() + ":" + std::to_string(i + 2) + ": timestamp decreases");
        }
        table.t_ms.push_back(rows[i][0]);
        std::array<double, 6> v{};
        for (std::size_t c = 1; c < rows[i].size(); ++c) v[c - 1] = rows[i][c];
        table.values.push_back(v);
    }
    return table;
}

inline void write_sensor_csv(const fs::path& path, const SensorTable& table) {
    std::string out = csv_header(table.kind) + "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        out += format_exact(table.t_ms[i]);
        for (std::size_t c = 0; c < table.channels(); ++c) out += "," + format_exact(table.values[i][c]);
        out += "\n";
    }
    detail::write_file(path, out);
}

// ---------------------------------------------------------------------------
// Synchronization
// ---------------------------------------------------------------------------

inline constexpr const char* kMasterKey = "MasterSendStartRealtime";
inline constexpr const char* kSlaveKey = "SlaveReceiveStartRealtime";

inline bool is_slave(const ExperimentMeta& meta) { return meta.contains(kSlaveKey); }

namespace detail {

inline double sync_value(const ExperimentMeta& meta, const char* key, const std::string& who) {
    const auto v = meta.get(key);
    if (!v) throw Error(ErrorCode::MissingSyncKey, who + ": meta.txt has no " + key);
    const auto d = parse_double(*v);
    if (!d) throw Error(ErrorCode::MissingSyncKey, who + ": " + key + " is not numeric: '" + *v + "'");
    return *d;
}

}  // namespace detail

/// Amount (ms) subtracted from a device's timestamps: MasterSendStartRealtime
/// for the master, SlaveReceiveStartRealtime for a slave.
inline double sync_shift(const ExperimentMeta& meta, bool slave, const std::string& who = "device") {
    detail::sync_value(meta, kMasterKey, who);
    return detail::sync_value(meta, slave ? kSlaveKey : kMasterKey, who);
}

inline std::vector<double> shift_timestamps(std::span<const double> t_ms, double shift) {
    std::vector<double> out(t_ms.begin(), t_ms.end());
    for (auto& t : out) t -= shift;
    return out;
}

inline std::vector<double> synchronize_master(const ExperimentMeta& master, std::span<const double> t_ms) {
    return shift_timestamps(t_ms, sync_shift(master, false, "master"));
}

inline std::vector<double> synchronize_slave(const ExperimentMeta& master, const ExperimentMeta& slave,
                                             std::span<const double> t_ms) {
    detail::sync_value(master, kMasterKey, "master");
    return shift_timestamps(t_ms, sync_shift(slave, true, "slave"));
}

// ---------------------------------------------------------------------------
// Experiment discovery
// ---------------------------------------------------------------------------

struct CoreDataSet {
    ExperimentFolder folder;
    ExperimentMeta meta;
    std::map<SensorKind, SensorTable> tables;

    const SensorTable* table(SensorKind k) const {
        const auto it = tables.find(k);
        return it == tables.end() ? nullptr : &it->second;
    }
};

struct ExperimentBundle {
    std::string key;  // date_time
    std::optional<ExperimentFolder> reference;
    std::vector<CoreDataSet> devices;
    std::vector<std::string> warnings;
};

struct ScanResult {
    std::vector<ExperimentBundle> experiments;  // sorted by key
    std::vector<fs::path> malformed;
};

inline CoreDataSet load_device(const ExperimentFolder& folder) {
    CoreDataSet d;
    d.folder = folder;
    const fs::path meta = folder.path / "meta.txt";
    if (fs::exists(meta)) d.meta = read_meta(meta);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(folder.path)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto kind = classify_sensor_file(f.filename().string());
        if (!kind || d.tables.count(*kind)) continue;
        d.tables.emplace(*kind, parse_sensor_csv(f, *kind));
    }
    return d;
}

/// Groups the sub-folders of `root` into experiments. Folder names that do
/// not follow the naming rule are collected in `malformed`.
inline ScanResult scan_experiments(const fs::path& root, bool load_core = true) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::IoFailure, root.string() + " is not a directory");
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    ScanResult result;
    std::map<std::string, ExperimentBundle> groups;
    for (const auto& dir : dirs) {
        ExperimentFolder folder;
        try {
            folder = parse_folder_name(dir.filename().string());
        } catch (const Error&) {
            result.malformed.push_back(dir);
            continue;
        }
        folder.path = dir;
        auto& bundle = groups[folder.experiment_key()];
        bundle.key = folder.experiment_key();
        if (folder.is_reference()) {
            bundle.reference = folder;
        } else if (load_core) {
            bundle.devices.push_back(load_device(folder));
        } else {
            CoreDataSet d;
            d.folder = folder;
            bundle.devices.push_back(std::move(d));
        }
    }
    for (auto& [key, bundle] : groups) {
        if (!bundle.reference) bundle.warnings.push_back("MissingReference: experiment " + key + " has no reference folder");
        result.experiments.push_back(std::move(bundle));
    }
    return result;
}

/// Single-experiment convenience: errors if `root` holds no experiment, or
/// if any folder name is malformed.
inline ExperimentBundle parse_experiment(const fs::path& root) {
    ScanResult scan = scan_experiments(root);
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

// ---------------------------------------------------------------------------
// Raw reference IMU container
// ---------------------------------------------------------------------------

inline constexpr const char* kLeftImuFile = "LeftFootImu.csv";
inline constexpr const char* kRightImuFile = "RightFootImu.csv";
inline constexpr const char* kImuHeader = "t[s],fx,fy,fu,wx,wy,wu";

inline ImuSeries read_imu_csv(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::MissingReference, path.string() + " not found");
    const auto rows = detail::parse_numeric_csv(detail::read_file(path), 7, path.string());
    ImuSeries series;
    series.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && !(rows[i][0] > rows[i - 1][0])) {
            throw Error(ErrorCode::NonMonotonicTimestamps,
                        path.string() + ":" + std::to_string(i + 2) + ": timestamp not increasing");
        }
        ImuSample s;
        s.t = rows[i][0];
        s.f = Vec3(rows[i][1], rows[i][2], rows[i][3]);
        s.w = Vec3(rows[i][4], rows[i][5], rows[i][6]);
        series.push_back(s);
    }
    return series;
}

inline void write_imu_csv(const fs::path& path, const ImuSeries& series) {
    std::string out = std::string(kImuHeader) + "\n";
    out.reserve(series.size() * 120);
    for (const auto& s : series) {
        out += format_exact(s.t);
        for (int k = 0; k < 3; ++k) out += "," + format_exact(s.f(k));
        for (int k = 0; k < 3; ++k) out += "," + format_exact(s.w(k));
        out += "\n";
    }
    detail::write_file(path, out);
}

inline std::pair<ImuSeries, ImuSeries> reference_imu_ingest(const fs::path& reference_folder) {
    return {read_imu_csv(reference_folder / kLeftImuFile), read_imu_csv(reference_folder / kRightImuFile)};
}

// ---------------------------------------------------------------------------
// Reference outputs
// ---------------------------------------------------------------------------

inline constexpr const char* kTrajectoryFile = "Trajectory.csv";
inline constexpr const char* kLeftStepsFile = "Left_steps.csv";
inline constexpr const char* kRightStepsFile = "Right_steps.csv";
inline constexpr const char* kTrajectoryHeader =
    "t[s],x_left[m],y_left[m],left_stationary,x_right[m],y_right[m],right_stationary,x_avg[m],y_avg[m]";
inline constexpr const char* kStepsHeader = "t[s],length[m],theta[rad]";

struct TrajectoryRow {
    double t = 0.0;
    double x_left = 0.0, y_left = 0.0;
    bool left_stationary = false;
    double x_right = 0.0, y_right = 0.0;
    bool right_stationary = false;
    double x_avg = 0.0, y_avg = 0.0;
};

struct StepRow {
    double t = 0.0;
    double length = 0.0;
    double theta = 0.0;
};

struct ReferenceDataSet {
    std::vector<TrajectoryRow> trajectory;
    std::vector<StepRow> left_steps;
    std::vector<StepRow> right_steps;
};

inline std::vector<StepRow> step_rows(const std::vector<StepRecord>& steps) {
    std::vector<StepRow> rows;
    rows.reserve(steps.size());
    for (const auto& s : steps) rows.push_back({s.tau, s.length, s.heading});
    return rows;
}

inline ReferenceDataSet make_reference_dataset(const ReferenceBundle& b) {
    ReferenceDataSet ds;
    const auto& l = b.fused_left;
    const auto& r = b.fused_right;
    if (l.path.size() != r.path.size() || b.cog.size() != l.path.size()) {
        throw Error(ErrorCode::LengthMismatch, "make_reference_dataset: grid tracks differ in length");
    }
    ds.trajectory.reserve(l.path.size());
    for (std::size_t i = 0; i < l.path.size(); ++i) {
        ds.trajectory.push_back({l.path[i].t, l.path[i].x, l.path[i].y, bool(l.stationary[i]), r.path[i].x,
                                 r.path[i].y, bool(r.stationary[i]), b.cog[i].x, b.cog[i].y});
    }
    ds.left_steps = step_rows(b.left_steps);
    ds.right_steps = step_rows(b.right_steps);
    return ds;
}

inline std::string format_trajectory_csv(const std::vector<TrajectoryRow>& rows) {
    std::string out = std::string(kTrajectoryHeader) + "\n";
    out.reserve(rows.size() * 100);
    for (const auto& r : rows) {
        out += format_fixed6(r.t) + "," + format_fixed6(r.x_left) + "," + format_fixed6(r.y_left) + "," +
               (r.left_stationary ? "1" : "0") + "," + format_fixed6(r.x_right) + "," + format_fixed6(r.y_right) +
               "," + (r.right_stationary ? "1" : "0") + "," + format_fixed6(r.x_avg) + "," +
               format_fixed6(r.y_avg) + "\n";
    }
    return out;
}

inline std::string format_steps_csv(const std::vector<StepRow>& rows) {
    std::string out = std::string(kStepsHeader) + "\n";
    for (const auto& r : rows) {
        out += format_fixed6(r.t) + "," + format_fixed6(r.length) + "," + format_fixed6(r.theta) + "\n";
    }
    return out;
}

namespace detail {

inline void expect_header(const std::string& text, const char* header, const fs::path& path) {
    const auto nl = text.find('\n');
    std::string first = text.substr(0, nl);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != header) {
        throw Error(ErrorCode::ColumnCountMismatch, path.string() + ": header is '" + first + "', expected '" +
                                                        header + "'");
    }
}

inline bool parse_flag(double v, const fs::path& path) {
    if (v == 0.0) return false;
    if (v == 1.0) return true;
    throw Error(ErrorCode::IoFailure, path.string() + ": stationarity flag must be 0 or 1");
}

}  // namespace detail

inline std::vector<TrajectoryRow> read_trajectory_csv(const fs::path& path) {
    const std::string text = detail::read_file(path);
    detail::expect_header(text, kTrajectoryHeader, path);
    std::vector<TrajectoryRow> out;
    for (const auto& r : detail::parse_numeric_csv(text, 9, path.string())) {
        out.push_back({r[0], r[1], r[2], detail::parse_flag(r[3], path), r[4], r[5], detail::parse_flag(r[6], path),
                       r[7], r[8]});
    }
    return out;
}

inline std::vector<StepRow> read_steps_csv(const fs::path& path) {
    const std::string text = detail::read_file(path);
    detail::expect_header(text, kStepsHeader, path);
    std::vector<StepRow> out;
    for (const auto& r : detail::parse_numeric_csv(text, 3, path.string())) out.push_back({r[0], r[1], r[2]});
    return out;
}

inline void write_reference(const ReferenceDataSet& ds, const fs::path& dir) {
    detail::write_file(dir / kTrajectoryFile, format_trajectory_csv(ds.trajectory));
    detail::write_file(dir / kLeftStepsFile, format_steps_csv(ds.left_steps));
    detail::write_file(dir / kRightStepsFile, format_steps_csv(ds.right_steps));
}

inline ReferenceDataSet read_reference(const fs::path& dir) {
    ReferenceDataSet ds;
    ds.trajectory = read_trajectory_csv(dir / kTrajectoryFile);
    ds.left_steps = read_steps_csv(dir / kLeftStepsFile);
    ds.right_steps = read_steps_csv(dir / kRightStepsFile);
    return ds;
}

}  // namespace footnav
