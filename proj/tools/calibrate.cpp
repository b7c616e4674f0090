// Offline calibration of detector and gate defaults on the synthetic corpus.
//
//   calibrate glrt                      stance-detector sweep (table on stdout)
//   calibrate dtw [header] [fixture]    clean-corpus DTW threshold

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <thread>

#include "footnav/cli.hpp"

using namespace footnav;

namespace {

struct CorpusRun {
    PathShape shape;
    double cadence;
    double stride;
    std::uint64_t seed;
    double dtw = 0.0;
};

GaitParams corpus_params(const CorpusRun& run) {
    GaitParams gp;
    gp.shape = run.shape;
    gp.cadence = run.cadence;
    gp.stride = run.stride;
    for (auto* s : {&gp.left, &gp.right}) {
        s->accel_noise = 0.02;
        s->gyro_noise = 0.003;
    }
    return gp;
}

std::vector<CorpusRun> dtw_corpus(std::size_t runs) {
    const PathShape shapes[] = {PathShape::Circle, PathShape::Rectangle, PathShape::FigureEight};
    std::vector<CorpusRun> out;
    for (std::size_t i = 0; i < runs; ++i) {
        out.push_back({shapes[i % 3], static_cast<double>(150 + 15 * ((i / 3) % 5)) / 100.0,
                       static_cast<double>(120 + 4 * ((7 * i) % 11)) / 100.0, 1000 + i});
    }
    return out;
}

int run_dtw(std::size_t runs, std::size_t jobs, const std::string& header, const std::string& fixture) {
    auto corpus = dtw_corpus(runs);
    detail::run_parallel(corpus.size(), jobs, [&](std::size_t i) {
        const SyntheticWalk w = synth_gait(corpus_params(corpus[i]), corpus[i].seed);
        const ReferenceBundle b = reconstruct_pair(w.left_imu, w.right_imu, ReferenceConfig{});
        corpus[i].dtw = quality_gate(b).dtw_left_right;
    });
    double mean = 0.0;
    for (const auto& r : corpus) mean += r.dtw / static_cast<double>(corpus.size());
    double var = 0.0;
    for (const auto& r : corpus) var += (r.dtw - mean) * (r.dtw - mean) / static_cast<double>(corpus.size() - 1);
    const double sigma = std::sqrt(var);
    const double threshold = std::ceil((mean + 3.0 * sigma) * 1e4) / 1e4;

    std::string csv = "run,shape,cadence[steps/s],stride[m],seed,dtw\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        csv += std::to_string(i) + "," + to_string(r.shape) + "," + format_exact(r.cadence) + "," +
               format_exact(r.stride) + "," + std::to_string(r.seed) + "," + format_fixed6(r.dtw) + "\n";
    }
    detail::write_file(fixture, csv);

    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "#pragma once\n"
                  "// Produced by tools/calibrate.cpp (calibrate dtw); raw corpus in tests/fixtures/dtw_corpus.csv.\n"
                  "namespace footnav {\n"
                  "/// Upper bound of the normalized left/right DTW distance of clean walks:\n"
                  "/// mean + 3 sigma over %zu synthetic runs (mean %.6f, sigma %.6f).\n"
                  "inline constexpr double kCalibratedDtwMax = %.4f;\n"
                  "}  // namespace footnav\n",
                  corpus.size(), mean, sigma, threshold);
    detail::write_file(header, buf);
    std::printf("runs %zu mean %.6f sigma %.6f threshold %.4f\n", corpus.size(), mean, sigma, threshold);
    return 0;
}

int run_glrt() {
    std::vector<SyntheticWalk> walks;
    std::vector<bool> noisy;
    for (auto shape : {PathShape::Circle, PathShape::Rectangle, PathShape::FigureEight}) {
        for (double cadence : {1.5, 1.8, 2.1}) {
            for (bool nz : {false, true}) {
                GaitParams gp;
                gp.shape = shape;
                gp.cadence = cadence;
                if (nz) {
                    gp.left.accel_noise = gp.right.accel_noise = 0.03;
                    gp.left.gyro_noise = gp.right.gyro_noise = 0.005;
                }
                walks.push_back(synth_gait(gp, 7));
                noisy.push_back(nz);
            }
        }
    }
    const double per_group = static_cast<double>(walks.size());  // two feet, half of the walks per group
    for (std::size_t h : {1, 2, 3}) {
        for (double gamma : {1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6}) {
            DetectorConfig det;
            det.half_window = h;
            det.gamma = gamma;
            double f1_clean = 0.0, f1_noisy = 0.0, min_agree = 1.0;
            for (std::size_t k = 0; k < walks.size(); ++k) {
                for (const auto* foot : {&walks[k].left_truth, &walks[k].right_truth}) {
                    const auto& imu = foot == &walks[k].left_truth ? walks[k].left_imu : walks[k].right_imu;
                    const auto gate = stance_gate(imu, det);
                    double tp = 0, fp = 0, fn = 0, agree = 0;
                    for (std::size_t i = 0; i < gate.size(); ++i) {
                        tp += gate[i] && foot->stance[i];
                        fp += gate[i] && !foot->stance[i];
                        fn += !gate[i] && foot->stance[i];
                        agree += gate[i] == foot->stance[i];
                    }
                    const double f1 = 2 * tp / (2 * tp + fp + fn);
                    (noisy[k] ? f1_noisy : f1_clean) += f1 / per_group;
                    if (!noisy[k]) min_agree = std::min(min_agree, agree / static_cast<double>(gate.size()));
                }
            }
            std::printf("half_window %zu gamma %.0e  F1 clean %.4f noisy %.4f  min clean agreement %.4f\n", h,
                        gamma, f1_clean, f1_noisy, min_agree);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate detector and gate defaults on the synthetic corpus"};
    app.require_subcommand(1);
    auto* glrt = app.add_subcommand("glrt", "stance detector sweep");
    std::string header = "include/footnav/calibration.hpp";
    std::string fixture = "tests/fixtures/dtw_corpus.csv";
    std::size_t runs = 50;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* dtw = app.add_subcommand("dtw", "clean-corpus DTW threshold");
    dtw->add_option("header", header, "generated header");
    dtw->add_option("fixture", fixture, "raw corpus CSV");
    dtw->add_option("--runs", runs, "corpus size")->check(CLI::Range(2, 10000));
    dtw->add_option("-j,--jobs", jobs, "parallel runs");
    CLI11_PARSE(app, argc, argv);
    try {
        if (*glrt) return run_glrt();
        return run_dtw(runs, jobs, header, fixture);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
