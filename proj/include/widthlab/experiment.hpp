#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "widthlab/bounds.hpp"
#include "widthlab/discretize.hpp"
#include "widthlab/erm.hpp"
#include "widthlab/teacher.hpp"

namespace widthlab {

// Everything a sweep needs, parsed from one JSON file. The same config drives
// both the rate sweep over n and the bias-variance sweep over m.
struct ExperimentConfig {
    TeacherOptions teacher;
    std::vector<int> n_grid;  // strictly increasing sample sizes
    int seeds_per_cell = 5;
    double sigma = 0.1;
    double delta = 0.1;  // failure budget for planning and construction
    std::string input_law = "uniform";
    int n_x = 1024;      // input sample size for spectra and leverage scores
    int n_test = 4096;   // Monte Carlo sample size for the L2(P_X) error
    std::uint64_t master_seed = 1;
    int threads = 1;
    std::string out_dir = ".";
    TrainConfig train;

    // overrides for controlled runs: when fixed_widths is nonempty the planner
    // is bypassed and every n uses these internal widths with fixed_lambda
    std::vector<int> fixed_widths;
    double fixed_lambda = 1e-8;
    SampleMode sample_mode = SampleMode::iid;

    // bias-variance sweep: widths from bv_m_grid at sample size bv_n
    int bv_n = 1024;
    std::vector<int> bv_m_grid;
    int bv_seeds = 3;

    void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// Every output file names the config that produced it.
struct Provenance {
    std::string config_hash;  // 16 hex digits, FNV-1a over the canonical JSON
    std::uint64_t seed = 0;
    std::string version;
};

Provenance make_provenance(const ExperimentConfig& cfg);
std::string provenance_comment(const Provenance& p);

struct RateCell {
    Regime regime = Regime::tight;
    int n = 0;
    int seed_index = 0;
    double err2 = 0.0;  // squared L2(P_X) distance between ERM and teacher
    double err2_se = 0.0;
    bool ok = false;
    std::string message;
};

struct RatePoint {
    int n = 0;
    double median_err2 = 0.0;
    int n_ok = 0;
};

struct RateResult {
    Regime regime = Regime::tight;
    std::vector<std::pair<double, double>> decays;  // fitted (a, s) per layer 2..L
    std::vector<WidthPlan> plans;                   // one per grid n
    std::vector<RateCell> cells;
    std::vector<RatePoint> points;  // grid n with at least one surviving seed
    double slope = 0.0;
    double slope_se = 0.0;
    bool slope_valid = false;  // needs >= 3 points with positive median
    double predicted_exponent = 0.0;
};

RateResult run_rate_sweep(const ExperimentConfig& cfg, Regime regime);

struct BvRow {
    int m = 0;
    std::vector<double> lambda;  // per layer 2..L, inverted from the width rule
    double bias2 = 0.0;          // median squared construction error
    double excess2 = 0.0;        // median squared L2(P_X) error of the ERM
    double delta1_sq = 0.0;
    double delta2_sq = 0.0;
    int n_ok = 0;
    std::string message;
};

struct BvResult {
    int n = 0;
    std::vector<std::pair<double, double>> decays;
    std::vector<BvRow> rows;
};

BvResult run_bias_variance_sweep(const ExperimentConfig& cfg);

// Largest lambda whose planned width reaches m, i.e. the solution of
// 5 N(lambda) log(32 N(lambda) / delta) = m with N from the fitted decay.
double lambda_for_width(double a, double s, int m, double delta);

// Fits (a, s) for every internal layer on a fresh input sample of size n_x.
std::vector<std::pair<double, double>> fit_teacher_decays(const TeacherNetwork& t,
                                                          const ExperimentConfig& cfg);

// CSV for the curves, JSON for the structured summary; file names carry the
// regime so tight and loose runs can share a directory.
void write_rate_result(const RateResult& res, const ExperimentConfig& cfg,
                       const std::string& out_dir);
void write_bv_result(const BvResult& res, const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace widthlab
