#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "footnav/cli.hpp"

using namespace footnav;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                ("footnav_cli_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Every regular file below `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_text(e.path());
    }
    return out;
}

SynthConfig short_walk(std::size_t phones = 2) {
    SynthConfig cfg;
    cfg.gait.shape = PathShape::Rectangle;
    cfg.gait.duration = 30.0;
    cfg.gait.pause = 6.0;
    cfg.gait.left.accel_noise = cfg.gait.right.accel_noise = 0.02;
    cfg.gait.left.gyro_noise = cfg.gait.right.gyro_noise = 0.003;
    cfg.phones = phones;
    cfg.seed = 3;
    return cfg;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

template <class F>
Run run(F&& command) {
    std::ostringstream out, err;
    const int code = command(out, err);
    return {code, out.str(), err.str()};
}

Run synth(const SynthConfig& cfg, const fs::path& root) {
    return run([&](std::ostream& o, std::ostream& e) { return cmd_synth(cfg, root, o, e); });
}

Run reconstruct(const fs::path& root, std::optional<fs::path> out = std::nullopt,
                const RunConfig& cfg = RunConfig::defaults()) {
    return run([&](std::ostream& o, std::ostream& e) { return cmd_reconstruct({root, out, cfg}, o, e); });
}

const std::string kKey = "2018-08-27_18-20-06.730";

fs::path reference_dir(const fs::path& root) { return root / (kKey + "_reference"); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(KeyValueConfig, ParsesCommentsAndWhitespace) {
    const auto kv = KeyValueConfig::parse("# header\n\n  a :  1.5 \nb: x: y\n");
    ASSERT_EQ(kv.entries().size(), 2u);
    EXPECT_EQ(*kv.get("a"), "1.5");
    EXPECT_EQ(*kv.get("b"), "x: y");
    EXPECT_FALSE(kv.get("c"));
    EXPECT_EQ(kv.format(), "a: 1.5\nb: x: y\n");
    try {
        KeyValueConfig::parse("a: 1\nnot a pair\n", "cfg.txt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
        EXPECT_NE(std::string(e.what()).find("cfg.txt:2"), std::string::npos);
    }
}

TEST(RunConfig, RoundTripAndDerivedFields) {
    KeyValueConfig kv;
    kv.set("detector.gamma", "25000");
    kv.set("heading.resolution_deg", "0.25");
    kv.set("estimator.anchor_final_position", "false");
    kv.set("noise.gyro", "0.004");
    kv.set("detector.standstill_min_duration", "4");
    kv.set("jobs", "3");
    const RunConfig cfg = RunConfig::from(kv);
    EXPECT_EQ(cfg.reference.detector.gamma, 25000.0);
    EXPECT_NEAR(cfg.reference.heading.resolution, deg_to_rad(0.25), 1e-15);
    EXPECT_FALSE(cfg.reference.estimator.anchor_final_position);
    EXPECT_EQ(cfg.jobs, 3u);
    EXPECT_EQ(cfg.gate.standstill_min_duration, 4.0);
    EXPECT_EQ(cfg.gate.dtw_sampling.resolution, cfg.reference.heading.resolution);
    EXPECT_EQ(cfg.noise.gyro, 0.004);
    EXPECT_EQ(cfg.reference.noise.Q(3, 3), 0.004 * 0.004);
    const RunConfig back = RunConfig::from(cfg.to_key_values());
    EXPECT_EQ(back.format(), cfg.format());
    EXPECT_EQ(RunConfig::from(RunConfig::defaults().to_key_values()).format(), RunConfig::defaults().format());
}

TEST(RunConfig, RejectsBadInput) {
    auto code = [](const std::string& text) {
        try {
            RunConfig::from(KeyValueConfig::parse(text));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoFailure;
    };
    EXPECT_EQ(code("detector.gama: 1\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code("detector.gamma: lots\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code("detector.half_window: 1.5\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code("diagnostics: maybe\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code("jobs: 0\n"), ErrorCode::InvalidConfig);
    EXPECT_EQ(code("gate.dtw_max: nan\n"), ErrorCode::InvalidConfig);
}

TEST(SynthConfig, RoundTrip) {
    KeyValueConfig kv;
    kv.set("shape", "line");
    kv.set("right.mount_yaw_deg", "12");
    kv.set("left.gyro_bias_z", "0.001");
    kv.set("first_mover", "left");
    kv.set("phones", "0");
    const auto cfg = SynthConfig::from(kv);
    EXPECT_EQ(cfg.gait.shape, PathShape::Line);
    EXPECT_NEAR(cfg.gait.right.mount_yaw, deg_to_rad(12.0), 1e-15);
    EXPECT_EQ(cfg.gait.left.gyro_bias.z(), 0.001);
    EXPECT_EQ(cfg.gait.first_mover, Foot::Left);
    EXPECT_EQ(cfg.phones, 0u);
    EXPECT_EQ(SynthConfig::from(cfg.to_key_values()).to_key_values().format(), cfg.to_key_values().format());
    kv.set("first_mover", "both");
    EXPECT_THROW(SynthConfig::from(kv), Error);
}

TEST(Synth, WritesReferenceAndPhones) {
    TempDir dir;
    const auto r = synth(short_walk(2), dir.path());
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const fs::path ref = reference_dir(dir.path());
    for (const char* f : {kLeftImuFile, kRightImuFile, "LeftFootTruth.csv", "RightFootTruth.csv", "synth.txt"}) {
        EXPECT_TRUE(fs::exists(ref / f)) << f;
    }
    const auto scan = scan_experiments(dir.path(), true);
    ASSERT_EQ(scan.experiments.size(), 1u);
    const auto& exp = scan.experiments.front();
    ASSERT_TRUE(exp.reference);
    ASSERT_EQ(exp.devices.size(), 2u);
    std::size_t masters = 0;
    for (const auto& d : exp.devices) {
        masters += is_slave(d.meta) ? 0 : 1;
        EXPECT_EQ(d.tables.count(SensorKind::Accelerometer), 1u);
        EXPECT_EQ(d.tables.count(SensorKind::Gyroscope), 1u);
    }
    EXPECT_EQ(masters, 1u);
    const auto [left, right] = reference_imu_ingest(ref);
    EXPECT_EQ(left.size(), 3751u);
    EXPECT_EQ(right.size(), left.size());
    // the archived parameters regenerate the same files
    const auto first = snapshot(dir.path());
    const auto again = SynthConfig::from(KeyValueConfig::load(ref / "synth.txt"));
    ASSERT_EQ(synth(again, dir.path() / "again").code, kExitOk);
    EXPECT_EQ(first, snapshot(dir.path() / "again"));
}

TEST(Synth, InfeasibleGaitIsAnError) {
    TempDir dir;
    auto cfg = short_walk(0);
    cfg.gait.duration = 10.0;
    const auto r = synth(cfg, dir.path());
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("InfeasibleGait"), std::string::npos);
    cfg = short_walk(0);
    cfg.date = "27-08-2018";
    EXPECT_EQ(synth(cfg, dir.path()).code, kExitError);
}

TEST(Reconstruct, WritesReferenceFilesAndArchivesConfig) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    RunConfig cfg = RunConfig::defaults();
    cfg.diagnostics = true;
    const auto r = reconstruct(dir.path(), std::nullopt, cfg);
    ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
    EXPECT_NE(r.out.find(kKey + "_reference: PASS"), std::string::npos) << r.out;
    const fs::path ref = reference_dir(dir.path());
    const std::string traj = read_text(ref / kTrajectoryFile);
    EXPECT_EQ(traj.substr(0, traj.find('\n')),
              "t[s],x_left[m],y_left[m],left_stationary,x_right[m],y_right[m],right_stationary,x_avg[m],y_avg[m]");
    EXPECT_GT(line_count(traj), 3000u);
    for (const char* f : {kLeftStepsFile, kRightStepsFile}) {
        const std::string steps = read_text(ref / f);
        EXPECT_EQ(steps.substr(0, steps.find('\n')), "t[s],length[m],theta[rad]");
        EXPECT_GT(line_count(steps), 10u);
    }
    EXPECT_EQ(read_text(ref / "config.txt"), cfg.format());
    EXPECT_EQ(RunConfig::load(ref / "config.txt").format(), cfg.format());
    const std::string quality = read_text(ref / "quality.csv");
    EXPECT_EQ(quality.substr(0, quality.find('\n')), QualityReport::csv_header());
    EXPECT_EQ(quality.back(), '\n');
    EXPECT_EQ(quality[quality.size() - 2], '1');
    EXPECT_TRUE(fs::exists(ref / "diagnostics_left.csv"));
    EXPECT_TRUE(fs::exists(ref / "diagnostics_right.csv"));
}

TEST(Reconstruct, DeterministicOutputs) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    ASSERT_EQ(reconstruct(dir.path(), dir.path() / "a").code, kExitOk);
    ASSERT_EQ(reconstruct(dir.path(), dir.path() / "b").code, kExitOk);
    const auto a = snapshot(dir.path() / "a");
    const auto b = snapshot(dir.path() / "b");
    EXPECT_EQ(a.size(), 5u);
    EXPECT_EQ(a, b);
}

TEST(Reconstruct, ParallelJobsMatchSerial) {
    TempDir dir;
    auto cfg = short_walk(0);
    ASSERT_EQ(synth(cfg, dir.path() / "in").code, kExitOk);
    cfg.start_time = "18-40-00.000";
    cfg.seed = 4;
    ASSERT_EQ(synth(cfg, dir.path() / "in").code, kExitOk);
    RunConfig serial = RunConfig::defaults();
    RunConfig parallel = serial;
    parallel.jobs = 2;
    const auto r1 = reconstruct(dir.path() / "in", dir.path() / "serial", serial);
    const auto r2 = reconstruct(dir.path() / "in", dir.path() / "parallel", parallel);
    ASSERT_EQ(r1.code, kExitOk) << r1.err;
    ASSERT_EQ(r2.code, kExitOk) << r2.err;
    EXPECT_EQ(r1.out, r2.out);
    auto s1 = snapshot(dir.path() / "serial");
    auto s2 = snapshot(dir.path() / "parallel");
    ASSERT_EQ(s1.size(), 10u);
    for (auto& [name, text] : s1) {
        if (name.ends_with("config.txt")) continue;
        EXPECT_EQ(text, s2[name]) << name;
    }
}

TEST(Reconstruct, TightGateExitsTwo) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    RunConfig cfg = RunConfig::defaults();
    cfg.gate.dtw_max = 1e-6;
    const auto r = reconstruct(dir.path(), dir.path() / "out", cfg);
    EXPECT_EQ(r.code, kExitGateFailed);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
    EXPECT_NE(r.out.find("(too high)"), std::string::npos);
}

TEST(Reconstruct, MissingFootLogIsMissingReference) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    fs::remove(reference_dir(dir.path()) / kRightImuFile);
    const auto r = reconstruct(dir.path());
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("MissingReference"), std::string::npos) << r.err;
}

TEST(Reconstruct, CorruptedCsvIsColumnCountMismatch) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    std::ofstream(reference_dir(dir.path()) / kLeftImuFile, std::ios::app) << "1000.0,1,2,3\n";
    const auto r = reconstruct(dir.path());
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("ColumnCountMismatch"), std::string::npos) << r.err;
}

TEST(Reconstruct, ExperimentWithoutReferenceAndEmptyRoot) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(1), dir.path()).code, kExitOk);
    fs::remove_all(reference_dir(dir.path()));
    auto r = reconstruct(dir.path());
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("MissingReference"), std::string::npos);
    r = reconstruct(dir.path() / "nothing");
    EXPECT_EQ(r.code, kExitError);
}

TEST(Reconstruct, MalformedFolderIsSkippedWithWarning) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    fs::create_directories(dir.path() / "notes");
    const auto r = reconstruct(dir.path(), dir.path() / "out");
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.err.find("skipping notes (MalformedFolderName)"), std::string::npos);
}

TEST(Sync, ReportsShiftsAndWritesShiftedCopies) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(3), dir.path() / "in").code, kExitOk);
    const auto r = run([&](std::ostream& o, std::ostream& e) {
        return cmd_sync(dir.path() / "in", dir.path() / "out", o, e);
    });
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(r.out,
              "358351080456283 master shift_ms=1535383206730\n"
              "358351080457283 slave shift_ms=48000\n"
              "358351080458283 slave shift_ms=59000\n");
    const std::map<std::string, double> shift{{"358351080456283", 1535383206730.0},
                                              {"358351080457283", 48000.0},
                                              {"358351080458283", 59000.0}};
    for (const auto& [id, s] : shift) {
        const std::string folder = kKey + "_" + id;
        const std::string file = "accelerometer_" + id + ".csv";
        const auto raw = parse_sensor_csv(dir.path() / "in" / folder / file, SensorKind::Accelerometer);
        const auto synced = parse_sensor_csv(dir.path() / "out" / folder / file, SensorKind::Accelerometer);
        ASSERT_EQ(raw.t_ms.size(), synced.t_ms.size());
        for (std::size_t i = 0; i < raw.t_ms.size(); i += 97) EXPECT_EQ(synced.t_ms[i], raw.t_ms[i] - s) << id;
        EXPECT_EQ(read_text(dir.path() / "out" / folder / "meta.txt"),
                  read_text(dir.path() / "in" / folder / "meta.txt"));
    }
    // the synchronized phones share the common clock: first samples agree
    std::vector<double> firsts;
    for (const auto& [id, s] : shift) {
        firsts.push_back(parse_sensor_csv(dir.path() / "out" / (kKey + "_" + id) / ("gyroscope_" + id + ".csv"),
                                          SensorKind::Gyroscope)
                             .t_ms.front());
    }
    EXPECT_EQ(firsts[0], firsts[1]);
    EXPECT_EQ(firsts[1], firsts[2]);
}

TEST(Sync, TwoMastersIsMissingSyncKey) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(2), dir.path()).code, kExitOk);
    const fs::path meta = dir.path() / (kKey + "_358351080457283") / "meta.txt";
    ExperimentMeta m = read_meta(meta);
    ExperimentMeta stripped;
    for (const auto& [k, v] : m.entries()) {
        if (k != kSlaveKey) stripped.set(k, v);
    }
    write_meta(meta, stripped);
    const auto r = run([&](std::ostream& o, std::ostream& e) { return cmd_sync(dir.path(), std::nullopt, o, e); });
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("MissingSyncKey"), std::string::npos);
}

TEST(CompareSteps, NeedsReconstructedSteps) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(1), dir.path()).code, kExitOk);
    const auto r = run([&](std::ostream& o, std::ostream& e) {
        return cmd_compare_steps(dir.path(), std::nullopt, RunConfig::defaults(), o, e);
    });
    EXPECT_EQ(r.code, kExitError);
    EXPECT_NE(r.err.find("run reconstruct first"), std::string::npos);
}

TEST(CompareSteps, PhoneTablesAreWellFormed) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(2), dir.path()).code, kExitOk);
    ASSERT_EQ(reconstruct(dir.path()).code, kExitOk);
    const auto r = run([&](std::ostream& o, std::ostream& e) {
        return cmd_compare_steps(dir.path(), dir.path() / "cmp", RunConfig::defaults(), o, e);
    });
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(line_count(r.out), 2u);
    for (const char* id : {"358351080456283", "358351080457283"}) {
        const std::string table = read_text(dir.path() / "cmp" / ("step_comparison_" + std::string(id) + ".csv"));
        const auto lines = detail::lines_of(table);
        ASSERT_GT(lines.size(), 10u);
        EXPECT_EQ(lines[0], "t[s],phone_duration[s],reference_duration[s]");
        double prev = -1.0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto cells = detail::split(lines[i], ',');
            ASSERT_EQ(cells.size(), 3u) << lines[i];
            const auto t = detail::parse_double(cells[0]);
            const auto phone = detail::parse_double(cells[1]);
            const auto ref = detail::parse_double(cells[2]);
            ASSERT_TRUE(t && phone && ref) << lines[i];
            EXPECT_GT(*t, prev);
            prev = *t;
            EXPECT_GT(*phone, 0.0);
            EXPECT_NEAR(*ref, 1.0 / short_walk().gait.cadence, 0.05) << lines[i];
        }
    }
}

TEST(CompareSteps, ReferenceOnlyExperiment) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    ASSERT_EQ(reconstruct(dir.path()).code, kExitOk);
    const auto r = run([&](std::ostream& o, std::ostream& e) {
        return cmd_compare_steps(dir.path(), std::nullopt, RunConfig::defaults(), o, e);
    });
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("(no smartphone data)"), std::string::npos);
    const auto lines = detail::lines_of(read_text(reference_dir(dir.path()) / "step_comparison_reference.csv"));
    ASSERT_GT(lines.size(), 10u);
    EXPECT_EQ(lines[1].find(",,"), lines[1].find(',')) << lines[1];
}

TEST(CompareSteps, EmptyFolderIsAnError) {
    TempDir dir;
    const auto r = run([&](std::ostream& o, std::ostream& e) {
        return cmd_compare_steps(dir.path(), std::nullopt, RunConfig::defaults(), o, e);
    });
    EXPECT_EQ(r.code, kExitError);
}

TEST(Validate, RerunsGateOnPublishedFiles) {
    TempDir dir;
    ASSERT_EQ(synth(short_walk(0), dir.path()).code, kExitOk);
    ASSERT_EQ(reconstruct(dir.path()).code, kExitOk);
    auto validate = [&](const RunConfig& cfg) {
        return run([&](std::ostream& o, std::ostream& e) { return cmd_validate(dir.path(), cfg, o, e); });
    };
    const auto ok = validate(RunConfig::defaults());
    EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
    EXPECT_NE(ok.out.find("PASS"), std::string::npos);
    RunConfig strict = RunConfig::defaults();
    strict.gate.step_count_tolerance = 0;
    strict.gate.closure_max = 1e-9;
    EXPECT_EQ(validate(strict).code, kExitGateFailed);
    fs::remove(reference_dir(dir.path()) / kTrajectoryFile);
    EXPECT_EQ(validate(RunConfig::defaults()).code, kExitError);
    fs::create_directories(dir.path() / "empty");
    EXPECT_EQ(run([&](std::ostream& o, std::ostream& e) {
                  return cmd_validate(dir.path() / "empty", RunConfig::defaults(), o, e);
              }).code,
              kExitError);
}
