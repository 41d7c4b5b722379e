#pragma once

#include <vector>

#include "widthlab/common.hpp"
#include "widthlab/network.hpp"
#include "widthlab/rng.hpp"
#include "widthlab/teacher.hpp"

namespace widthlab {

// smallest admissible width for effective dimension N at failure level delta:
// ceil(5 N log(32 N / delta)), clamped at 1
int min_width(double N, double delta);
// variant with the 16/delta premise, surfaced in reports alongside
int min_width_16(double N, double delta);

struct SampledNodes {
    int layer = 0;
    std::vector<int> idx;
    Vec w;
    double lambda = 0.0;
    bool uniform_fallback = false;

    double mean_w2() const
    {
        return w.size() == 0 ? 0.0 : w.squaredNorm() / static_cast<double>(w.size());
    }
};

// ridge leverage of every node of one layer at level lambda; leverage sums to
// the empirical degree of freedom of that layer's kernel
struct LeverageProfile {
    int layer = 0;
    double lambda = 0.0;
    Vec leverage;
    Vec q;  // normalized sampling distribution (uniform on fallback)
    double dof = 0.0;
    bool uniform_fallback = false;
};

LeverageProfile leverage_profile(const Mat& Phi, const Vec& Q, double lambda);
SampledNodes sample_from_profile(const LeverageProfile& prof, const Vec& Q, int m, Rng& rng);

enum class SampleMode { iid, exhaustive };

SampledNodes sample_nodes(const TeacherNetwork& t, int ell, double lambda, int m, const Mat& X,
                          std::uint64_t seed, SampleMode mode = SampleMode::iid);

// ridge solver shared by every row fit of one layer; penalty lambda*m matches
// the RKHS-norm scaling of the sampled-feature embedding
class RidgeSolver {
public:
    RidgeSolver(Mat A, double lambda, int m);
    Vec solve(const Vec& target) const;
    Mat solve_multi(const Mat& targets) const;
    const Mat& design() const { return A_; }
    int n() const { return static_cast<int>(A_.rows()); }

private:
    Mat A_;
    double lambda_m_;
    bool dual_;
    Eigen::LLT<Mat> llt_;
};

struct FitResult {
    Vec beta;
    double err = 0.0;        // empirical squared L2 error after any rescale
    double err_unconstrained = 0.0;
    double beta_norm2 = 0.0;
    bool rescaled = false;
};

// fit one target against the weighted features; if ||beta||^2 leaves the
// c1 R^2 / m ball the row is pulled back onto it and the event reported
FitResult fit_beta(const RidgeSolver& solver, const Vec& target, double R, double c1);

struct LayerBuildInfo {
    int ell = 0;
    int m = 0;
    double lambda = 0.0;
    double dof = 0.0;
    double mean_w2 = 0.0;
    bool uniform_fallback = false;
    int beta_rescales = 0;
    int row_rescales = 0;
    double mean_row_err = 0.0;
    double max_row_err = 0.0;
    int width_rule_32 = 0;
    int width_rule_16 = 0;
};

struct ConstructResult {
    FiniteNetwork net;
    std::vector<LayerBuildInfo> layers;  // one entry per l = 2..L
    int total_row_rescales() const
    {
        int n = 0;
        for (const auto& li : layers)
            n += li.row_rescales;
        return n;
    }
};

// Builds the finite approximant of the teacher: layer-1 weights copied from
// the integral representation at the sampled nodes, internal and output
// layers fitted row-by-row by ridge against the exact teacher row targets,
// entries W_ij = beta_ij * w_j. Any assembled row whose l1 norm exceeds R_bar
// is rescaled onto the ball and counted.
ConstructResult construct_fstar(const TeacherNetwork& t, const std::vector<double>& lambdas,
                                const std::vector<int>& widths, double delta, const Mat& X,
                                std::uint64_t seed, SampleMode mode = SampleMode::iid);

struct L2Error {
    double value = 0.0;
    double se = 0.0;
};

L2Error l2_px_error(const FiniteNetwork& f, const TeacherNetwork& t, const Mat& xs);

} // namespace widthlab
