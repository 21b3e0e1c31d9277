#pragma once

#include <string>
#include <vector>

#include "hip/verify.hpp"

// Convergence-harness driver behind the hip-cli executable: configuration
// resolution (flags over config-file defaults over per-test defaults), the
// three run modes, and deterministic CSV serialization.

namespace hip::cli {

struct RunConfig {
  std::string test;                  // "a", "b" or "c"
  std::string scheme;                // "sip", "iip", "nip"
  int k = 0;
  bool has_delta = false;
  double delta = 0.0;
  double alpha0 = 0.0;
  double lambda = 0.0;
  std::string kappa_mode = "normal";  // "unit" or "normal"
  std::string mesh;                   // "tri" or "quad"
  std::vector<int> levels;
  double tol = 1e-12;
  bool deterministic = false;         // accepted for interface stability; runs are always serial
  std::string out;                    // CSV destination; empty writes stdout
  std::string sweep;                  // "MIN:MAX:STEP" enables the alpha0 sweep
  bool kappa_ablation = false;
  int quad_exactness = 0;             // 0 keeps the 2k+4 default

  // Fill per-test defaults and validate; throws std::invalid_argument.
  void finalize();
};

struct LevelResult {
  int n = 0;
  double h = 0.0;
  double err_l2 = 0.0;
  double err_energy = 0.0;
  double err_enriched = 0.0;
  double err_l2_disc = 0.0;
  double min_sample = 0.0;
};

struct ConvergenceResult {
  RunConfig config;
  std::vector<LevelResult> levels;
  std::vector<double> ecr_l2, ecr_energy, ecr_enriched, ecr_l2_disc;
  verify::ExpectedRates expected;
};

struct SweepPoint {
  double alpha0 = 0.0;
  double err_l2 = 0.0;
  double err_l2_disc = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // ascending alpha0
  double argmin_l2 = 0.0;
  double argmin_l2_disc = 0.0;
};

struct AblationRow {
  std::string kappa_mode;
  double err_l2 = 0.0;
  double min_sample = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;  // unit first, then normal
};

ConvergenceResult run_convergence(const RunConfig& cfg);
SweepResult run_alpha_sweep(const RunConfig& cfg);
AblationResult run_kappa_ablation(const RunConfig& cfg);

std::string to_csv(const ConvergenceResult& r);
std::string to_csv(const SweepResult& r);
std::string to_csv(const AblationResult& r);

// Parse "key:value" lines (blank lines and '#' comments ignored) into
// flag/value pairs; unknown keys are rejected later during application.
std::vector<std::pair<std::string, std::string>> load_config(const std::string& path);

// Full command-line entry point; returns the process exit code:
// 0 success, 2 usage or configuration error, 3 numerical failure.
int run_main(int argc, const char* const* argv);

}  // namespace hip::cli
