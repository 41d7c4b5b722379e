#pragma once

#include <utility>
#include <vector>

#include "widthlab/activation.hpp"
#include "widthlab/budget.hpp"
#include "widthlab/common.hpp"
#include "widthlab/rng.hpp"

namespace widthlab {

struct Layer {
    Mat W;
    Vec b;
};

// Finite feed-forward network f(x) = (W^(L) eta(.) + b^(L)) o ... o (W^(1) x + b^(1)).
// No activation after the last affine map. widths holds m_1..m_{L+1} with
// m_{L+1} = 1 (scalar output).
struct FiniteNetwork {
    int L = 0;
    std::vector<int> widths;
    Activation act;
    std::vector<Layer> layers;

    static FiniteNetwork zeros(const std::vector<int>& widths, const Activation& act);

    int d_in() const { return widths.front(); }
    void check_shapes() const;

    double eval(const Vec& x) const;
    // output plus the pre-activation vectors a^(1)..a^(L)
    std::pair<double, std::vector<Vec>> eval_with_preacts(const Vec& x) const;
    Vec eval_batch(const Mat& X) const;
    std::vector<Mat> preacts_batch(const Mat& X) const;

    double max_winf() const;
    double max_bias() const;
    // norm condition of the class: every ||W||_inf <= R_bar and every bias
    // <= R_b, within relative tolerance rtol
    bool feasible(const NormBudget& budget, double rtol = 1e-9) const;
};

struct SupNormBounds {
    double bound_fo = 0.0;   // teacher-side sup bound
    double r_hat_inf = 0.0;  // class-side sup bound
};

SupNormBounds sup_norm_bound(const NormBudget& budget, int L, const Activation& act);

// sensitivity of f in sup norm per unit parameter perturbation (the constant
// called G_hat in the bound reports)
double lip_diff_constant(const NormBudget& budget, int L, const Activation& act);

double empirical_sup_distance(const FiniteNetwork& f, const FiniteNetwork& g, const Mat& xs);

// uniform draw from the class: rows uniform in the l1 ball of radius R_bar,
// biases uniform in [-R_b, R_b]
FiniteNetwork random_network(const std::vector<int>& widths, const Activation& act,
                             const NormBudget& budget, Rng& rng);

// row uniform in the l1 ball of the given radius (Laplace direction trick)
Vec random_l1_ball(int dim, double radius, Rng& rng);

std::string network_to_json(const FiniteNetwork& net);
FiniteNetwork network_from_json(const std::string& text);
void save_network(const FiniteNetwork& net, const std::string& path);
FiniteNetwork load_network(const std::string& path);

} // namespace widthlab
