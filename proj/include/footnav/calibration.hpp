#pragma once
// Produced by tools/calibrate.cpp (calibrate dtw); raw corpus in tests/fixtures/dtw_corpus.csv.
namespace footnav {
/// Upper bound of the normalized left/right DTW distance of clean walks:
/// mean + 3 sigma over 50 synthetic runs (mean 0.235321, sigma 0.020591).
inline constexpr double kCalibratedDtwMax = 0.2971;
}  // namespace footnav
