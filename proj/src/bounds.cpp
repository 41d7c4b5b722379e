#include "widthlab/bounds.hpp"

#include <cmath>

#include "json.hpp"
#include "widthlab/discretize.hpp"
#include "widthlab/network.hpp"
#include "widthlab/spectrum.hpp"

namespace widthlab {

std::string regime_name(Regime r)
{
    return r == Regime::tight ? "tight" : "loose";
}

Regime parse_regime(const std::string& name)
{
    if (name == "tight")
        return Regime::tight;
    if (name == "loose")
        return Regime::loose;
    throw std::invalid_argument("unknown regime: " + name);
}

static void check_lambdas(int L, const std::vector<double>& lambdas)
{
    if (L < 1)
        throw std::invalid_argument("bounds: L must be >= 1");
    if (lambdas.size() != static_cast<std::size_t>(L) - 1)
        throw std::invalid_argument("bounds: need one lambda per layer 2..L");
    for (double l : lambdas)
        if (!(l > 0.0))
            throw std::invalid_argument("bounds: lambdas must be positive");
}

static void check_widths(int L, const std::vector<int>& widths)
{
    if (widths.size() != static_cast<std::size_t>(L) + 1)
        throw std::invalid_argument("bounds: widths must hold m_1..m_{L+1}");
    for (int m : widths)
        if (m < 1)
            throw std::invalid_argument("bounds: widths must be >= 1");
}

double delta1(const NormBudget& budget, int L, const std::vector<double>& lambdas)
{
    check_lambdas(L, lambdas);
    const double chat = budget.c_hat();
    double sum = 0.0;
    for (int ell = 2; ell <= L; ++ell) {
        const double lam = lambdas[static_cast<std::size_t>(ell) - 2];
        sum += 2.0 * std::sqrt(std::pow(chat, L - ell)) * std::pow(budget.R, L - ell + 1) *
               std::sqrt(lam);
    }
    return sum;
}

double delta1_loose(const NormBudget& budget, int L, const std::vector<double>& lambdas,
                    const std::vector<int>& widths)
{
    check_lambdas(L, lambdas);
    check_widths(L, widths);
    const double chat = budget.c_hat();
    double sum = 0.0;
    for (int ell = 2; ell <= L; ++ell) {
        const double lam = lambdas[static_cast<std::size_t>(ell) - 2];
        const double m_next = widths[static_cast<std::size_t>(ell)];
        sum += 2.0 * std::sqrt(m_next * std::pow(chat, L - ell)) *
               std::pow(budget.R, L - ell + 1) * std::sqrt(lam);
    }
    return sum;
}

static double log_plus(double x)
{
    return std::max(1.0, std::log(x));
}

double delta2(const NormBudget& budget, int L, const std::vector<int>& widths, int n,
              double sigma, double g_hat, double r_hat_inf)
{
    check_widths(L, widths);
    if (n < 1)
        throw std::invalid_argument("delta2: n must be >= 1");
    if (!(sigma > 0.0))
        throw std::invalid_argument("delta2: sigma must be positive");
    double S = 0.0;
    for (int ell = 1; ell <= L; ++ell)
        S += static_cast<double>(widths[static_cast<std::size_t>(ell)]) *
             static_cast<double>(widths[static_cast<std::size_t>(ell) - 1]);
    const double denom = std::min(sigma, r_hat_inf) * std::sqrt(S);
    if (!(denom > 0.0))
        throw std::invalid_argument("delta2: degenerate min(sigma, R_hat_inf)");
    const double arg = 1.0 + std::sqrt(static_cast<double>(n)) * g_hat *
                                 std::max(budget.R_bar(), budget.R_b) / denom;
    return std::sqrt(S / static_cast<double>(n) * log_plus(arg));
}

double covering_log(const NormBudget& budget, int L, const std::vector<int>& widths,
                    double g_hat, double eps)
{
    check_widths(L, widths);
    if (!(eps > 0.0))
        throw std::invalid_argument("covering_log: eps must be positive");
    double count = 0.0;
    for (int ell = 1; ell <= L; ++ell)
        count += static_cast<double>(widths[static_cast<std::size_t>(ell)] + 1) *
                 static_cast<double>(widths[static_cast<std::size_t>(ell) - 1]);
    return std::log(1.0 + 2.0 * g_hat * std::max(budget.R_bar(), budget.R_b) / eps) * count;
}

double thm2_rhs(double d1, double d2, double sigma, double r_hat_inf, int n, double r,
                double r_tilde, bool appendix_variant)
{
    if (n < 1)
        throw std::invalid_argument("thm2_rhs: n must be >= 1");
    if (!(r > 0.0))
        throw std::invalid_argument("thm2_rhs: r must be positive");
    if (appendix_variant) {
        if (!(r_tilde > 0.0 && r_tilde <= 1.0))
            throw std::invalid_argument("thm2_rhs: appendix variant needs r_tilde in (0,1]");
    } else {
        if (!(r_tilde > 1.0 && r_tilde <= 2.0))
            throw std::invalid_argument("thm2_rhs: r_tilde must lie in (1,2]");
    }
    const double s2r2 = sigma * sigma + r_hat_inf * r_hat_inf;
    const double ratio = std::min(1.0, sigma / r_hat_inf);
    const double tail = s2r2 / static_cast<double>(n) *
                        (log_plus(std::sqrt(static_cast<double>(n)) / ratio) + r);
    const double first = appendix_variant ? (1.0 + r_tilde) * d1 * d1 : r_tilde * d1 * d1;
    return first + s2r2 * d2 * d2 + tail;
}

double prob_bound_main(int n, double d1, double r_tilde, double r)
{
    return 1.0 - std::exp(-n * d1 * d1 * (r_tilde - 1.0) * (r_tilde - 1.0) / 11.0) -
           2.0 * std::exp(-r);
}

double prob_bound_appendix(int n, double d1, double r_tilde, double r)
{
    return 1.0 - std::exp(-3.0 * n * d1 * d1 * r_tilde * r_tilde / 32.0) - 2.0 * std::exp(-r);
}

double optimal_lambda(Regime regime, double a, double s, int n)
{
    if (!(a > 0.0) || !(s > 0.0 && s < 1.0) || n < 1)
        throw std::invalid_argument("optimal_lambda: need a > 0, s in (0,1), n >= 1");
    const double nn = static_cast<double>(n);
    if (regime == Regime::loose)
        return std::pow(a, s / (1.0 + s)) * std::pow(nn, -1.0 / (1.0 + s));
    return std::pow(a, 2.0 * s / (1.0 + 2.0 * s)) * std::pow(nn, -1.0 / (1.0 + 2.0 * s));
}

double rate_exponent(Regime regime, double s)
{
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("rate_exponent: s must lie in (0,1)");
    if (regime == Regime::tight)
        return -1.0 / (1.0 + 2.0 * s);
    return -(1.0 - s) / (1.0 + s);
}

WidthPlan plan_widths(const std::vector<std::pair<double, double>>& decays, int n, double delta,
                      Regime regime)
{
    if (decays.empty())
        throw std::invalid_argument("plan_widths: need at least one internal layer decay");
    if (n < 2)
        throw std::invalid_argument("plan_widths: n must be >= 2");
    WidthPlan plan;
    plan.regime = regime;
    plan.decays = decays;
    double slowest = -1.0;
    for (const auto& [a, s] : decays) {
        const double lam = optimal_lambda(regime, a, s, n);
        const double N = dof_from_decay(a, s, lam);
        const double consistency =
            regime == Regime::tight ? std::sqrt(n * lam) : n * lam;
        const int m = std::max(min_width(N, delta),
                               static_cast<int>(std::ceil(consistency)));
        plan.lambda.push_back(lam);
        plan.m.push_back(m);
        slowest = std::max(slowest, rate_exponent(regime, s));
    }
    plan.predicted_rate_exponent = slowest;
    return plan;
}

BoundReport make_bound_report(const NormBudget& budget, const Activation& act,
                              const std::vector<int>& widths, const std::vector<double>& lambdas,
                              int n, double sigma, double r, double r_tilde,
                              const std::vector<double>& eps_grid)
{
    const int L = static_cast<int>(widths.size()) - 1;
    BoundReport rep;
    rep.L = L;
    rep.n = n;
    rep.sigma = sigma;
    rep.r = r;
    rep.r_tilde = r_tilde;
    rep.widths = widths;
    rep.lambdas = lambdas;
    rep.budget = budget;
    rep.activation = act.name();
    const auto sup = sup_norm_bound(budget, L, act);
    rep.g_hat = lip_diff_constant(budget, L, act);
    rep.r_hat_inf = sup.r_hat_inf;
    rep.delta1 = delta1(budget, L, lambdas);
    rep.delta1_loose = delta1_loose(budget, L, lambdas, widths);
    rep.delta2 = delta2(budget, L, widths, n, sigma, rep.g_hat, rep.r_hat_inf);
    for (double eps : eps_grid)
        rep.covering.emplace_back(eps, covering_log(budget, L, widths, rep.g_hat, eps));
    rep.thm2 = thm2_rhs(rep.delta1, rep.delta2, sigma, rep.r_hat_inf, n, r, r_tilde);
    rep.prob_main = prob_bound_main(n, rep.delta1, r_tilde, r);
    rep.prob_appendix = prob_bound_appendix(n, rep.delta1, std::min(1.0, r_tilde), r);
    return rep;
}

std::string bound_report_to_json(const BoundReport& rep)
{
    nlohmann::json j;
    j["delta1"] = rep.delta1;
    j["delta1_loose"] = rep.delta1_loose;
    j["delta2"] = rep.delta2;
    j["g_hat"] = rep.g_hat;
    j["r_hat_inf"] = rep.r_hat_inf;
    j["thm2_rhs"] = rep.thm2;
    j["thm2_constant"] = "up to universal constant C (reported with C = 1)";
    j["prob_main"] = rep.prob_main;
    j["prob_appendix"] = rep.prob_appendix;
    nlohmann::json cov = nlohmann::json::array();
    for (const auto& [eps, v] : rep.covering)
        cov.push_back({{"eps", eps}, {"covering_log", v}});
    j["covering"] = std::move(cov);
    j["inputs"] = {{"L", rep.L},
                   {"n", rep.n},
                   {"sigma", rep.sigma},
                   {"r", rep.r},
                   {"r_tilde", rep.r_tilde},
                   {"widths", rep.widths},
                   {"lambdas", rep.lambdas},
                   {"activation", rep.activation},
                   {"budget",
                    {{"R", rep.budget.R},
                     {"R_b", rep.budget.R_b},
                     {"D_x", rep.budget.D_x},
                     {"delta", rep.budget.delta}}}};
    return j.dump(2);
}

std::string width_plan_to_json(const WidthPlan& plan, int n, double delta)
{
    nlohmann::json j;
    j["regime"] = regime_name(plan.regime);
    j["n"] = n;
    j["delta"] = delta;
    j["predicted_rate_exponent"] = plan.predicted_rate_exponent;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t i = 0; i < plan.lambda.size(); ++i)
        layers.push_back({{"layer", i + 2},
                          {"lambda", plan.lambda[i]},
                          {"m", plan.m[i]},
                          {"a", plan.decays[i].first},
                          {"s", plan.decays[i].second}});
    j["layers"] = std::move(layers);
    return j.dump(2);
}

} // namespace widthlab
