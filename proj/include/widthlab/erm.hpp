#pragma once

#include <vector>

#include "widthlab/dataset.hpp"
#include "widthlab/network.hpp"

namespace widthlab {

struct TrainConfig {
    enum class Init { fstar_warmstart, random_in_F };

    int max_epochs = 2000;
    double step_size = 1e-2;
    double step_decay = 1.0;
    int batch = 0;  // 0 = full batch
    Init init = Init::random_in_F;
    double tol = 1e-9;  // relative risk improvement below which we stop
    std::uint64_t seed = 0;
    double divergence_factor = 1e3;
    bool check_feasible_each_epoch = false;

    void validate() const
    {
        if (!(step_size > 0.0) || !(tol > 0.0))
            throw std::invalid_argument("TrainConfig: step_size and tol must be positive");
        if (!(step_decay > 0.0 && step_decay <= 1.0))
            throw std::invalid_argument("TrainConfig: step_decay must lie in (0,1]");
        if (max_epochs < 0 || batch < 0)
            throw std::invalid_argument("TrainConfig: max_epochs and batch must be >= 0");
    }
};

double empirical_risk(const FiniteNetwork& f, const Dataset& d);

// Euclidean projection onto the l1 ball (sort-and-threshold)
Vec l1_ball_project(const Vec& v, double radius);

// project every weight row onto the R_bar l1 ball and clamp biases to R_b
void project_network(FiniteNetwork& net, const NormBudget& budget);

// full-batch gradient of the mean squared risk with respect to all parameters
std::vector<Layer> risk_gradient(const FiniteNetwork& f, const Mat& X, const Vec& y);

struct TrainResult {
    FiniteNetwork net;
    std::vector<double> history;  // risk at init, then after each epoch
    int epochs_run = 0;
    bool converged = false;
};

// Projected gradient descent over the norm-constrained class. Full-batch runs
// backtrack (halve the step) on any risk increase, so history is monotone;
// mini-batch runs project after every step but do not backtrack. Throws on
// divergence past divergence_factor times the initial risk.
TrainResult train(const Dataset& d, const std::vector<int>& widths, const Activation& act,
                  const NormBudget& budget, const TrainConfig& cfg,
                  const FiniteNetwork* warm_start = nullptr);

} // namespace widthlab
