#pragma once

#include <string>
#include <utility>
#include <vector>

#include "widthlab/activation.hpp"
#include "widthlab/budget.hpp"
#include "widthlab/common.hpp"

namespace widthlab {

enum class Regime { tight, loose };

std::string regime_name(Regime r);
Regime parse_regime(const std::string& name);

// approximation-side bound: sum over l = 2..L of
// 2 sqrt(c_hat^(L-l)) R^(L-l+1) sqrt(lambda_l); lambdas holds lambda_2..lambda_L
double delta1(const NormBudget& budget, int L, const std::vector<double>& lambdas);

// width-dependent variant carrying the extra sqrt(m_{l+1}) factor; widths is
// the full m_1..m_{L+1} vector
double delta1_loose(const NormBudget& budget, int L, const std::vector<double>& lambdas,
                    const std::vector<int>& widths);

// estimation-side bound driven by the parameter count and the covering
// geometry; natural log, log_+(x) = max(1, log(x))
double delta2(const NormBudget& budget, int L, const std::vector<int>& widths, int n,
              double sigma, double g_hat, double r_hat_inf);

double covering_log(const NormBudget& budget, int L, const std::vector<int>& widths,
                    double g_hat, double eps);

// right-hand side of the generalization bound with the universal constant set
// to 1. The default bracket takes r_tilde in (1,2]; the appendix variant takes
// r_tilde in (0,1] and weights the first term by (1+r_tilde).
double thm2_rhs(double d1, double d2, double sigma, double r_hat_inf, int n, double r,
                double r_tilde, bool appendix_variant = false);

// the two stated success-probability expressions; reported, never asserted
double prob_bound_main(int n, double d1, double r_tilde, double r);
double prob_bound_appendix(int n, double d1, double r_tilde, double r);

double optimal_lambda(Regime regime, double a, double s, int n);
double rate_exponent(Regime regime, double s);

struct WidthPlan {
    Regime regime = Regime::tight;
    std::vector<double> lambda;                   // per layer 2..L
    std::vector<int> m;                           // per layer 2..L
    double predicted_rate_exponent = 0.0;
    std::vector<std::pair<double, double>> decays;  // (a, s) echoed
};

WidthPlan plan_widths(const std::vector<std::pair<double, double>>& decays, int n, double delta,
                      Regime regime);

struct BoundReport {
    double delta1 = 0.0;
    double delta1_loose = 0.0;
    double delta2 = 0.0;
    double g_hat = 0.0;
    double r_hat_inf = 0.0;
    std::vector<std::pair<double, double>> covering;  // (eps, covering_log)
    double thm2 = 0.0;
    double prob_main = 0.0;
    double prob_appendix = 0.0;
    // inputs echoed
    int L = 0;
    int n = 0;
    double sigma = 0.0;
    double r = 1.0;
    double r_tilde = 1.5;
    std::vector<int> widths;
    std::vector<double> lambdas;
    NormBudget budget;
    std::string activation;
};

BoundReport make_bound_report(const NormBudget& budget, const Activation& act,
                              const std::vector<int>& widths, const std::vector<double>& lambdas,
                              int n, double sigma, double r, double r_tilde,
                              const std::vector<double>& eps_grid);

std::string bound_report_to_json(const BoundReport& rep);
std::string width_plan_to_json(const WidthPlan& plan, int n, double delta);

} // namespace widthlab
