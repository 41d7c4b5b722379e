#pragma once

#include <string>
#include <vector>

#include "widthlab/activation.hpp"
#include "widthlab/budget.hpp"
#include "widthlab/common.hpp"
#include "widthlab/rng.hpp"

namespace widthlab {

// Finite-resolution realization of the layered integral representation
// f^o = f_L^o o ... o f_1^o. Layer l integrates over a node grid T_l of size
// M_l with measure weights Q_l; h[l] has one row per node of T_{l+1} and one
// column per node of T_l. M_1 = d_x (inputs) and M_{L+1} = 1 (scalar output).
struct TeacherNetwork {
    int L = 0;
    int d_x = 0;
    std::vector<int> M;      // M_1..M_{L+1}, so M[i] is the size of T_{i+1}
    std::vector<Vec> Q;      // Q_1..Q_L
    std::vector<Mat> h;      // h_1..h_L; h[i] has M[i+1] rows and M[i] columns
    std::vector<Vec> b;      // b_1..b_L
    Activation act;
    NormBudget budget;
    double decay_s = 0.0;    // 0 means no prescribed eigencay targeting

    void check() const;
    double row_norm2(int ell, int row) const;  // sum_w h^2 Q for one row, ell in 1..L

    // node-value matrices F_1..F_L; F[l-1] is n x M_{l+1}
    std::vector<Mat> layer_values(const Mat& X) const;
    Vec eval_batch(const Mat& X) const;
    // scalar output plus per-layer node values for one input
    std::pair<double, std::vector<Vec>> eval(const Vec& x) const;
};

struct TeacherOptions {
    int L = 2;
    int d_x = 4;
    std::vector<int> resolutions;  // M_2..M_L; empty means all 512
    NormBudget budget;
    Activation act;
    double decay_s = 0.0;
    // fraction of R^2 the expected squared row norm aims at before the
    // onto-sphere rescale of violating rows
    double fill = 0.9;
};

TeacherNetwork sample_teacher(const TeacherOptions& opt, std::uint64_t seed);

std::string teacher_to_json(const TeacherNetwork& t);
TeacherNetwork teacher_from_json(const std::string& text);
void save_teacher(const TeacherNetwork& t, const std::string& path);
TeacherNetwork load_teacher(const std::string& path);

} // namespace widthlab
