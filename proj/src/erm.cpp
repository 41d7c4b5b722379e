#include "widthlab/erm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace widthlab {

double empirical_risk(const FiniteNetwork& f, const Dataset& d)
{
    if (d.n() == 0)
        throw std::invalid_argument("empirical_risk: empty dataset");
    return (d.y - f.eval_batch(d.X)).squaredNorm() / static_cast<double>(d.n());
}

Vec l1_ball_project(const Vec& v, double radius)
{
    if (!(radius > 0.0))
        throw std::invalid_argument("l1_ball_project: radius must be positive");
    const double l1 = v.cwiseAbs().sum();
    if (l1 <= radius)
        return v;
    std::vector<double> u(v.data(), v.data() + v.size());
    for (auto& x : u)
        x = std::abs(x);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - radius) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0)
            theta = t;
        else
            break;
    }
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i)) - theta;
        out(i) = mag > 0.0 ? (v(i) > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

void project_network(FiniteNetwork& net, const NormBudget& budget)
{
    const double rbar = budget.R_bar();
    for (auto& layer : net.layers) {
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i) {
            const Vec row = layer.W.row(i).transpose();
            if (row.cwiseAbs().sum() > rbar)
                layer.W.row(i) = l1_ball_project(row, rbar).transpose();
        }
        layer.b = layer.b.cwiseMax(-budget.R_b).cwiseMin(budget.R_b);
    }
}

std::vector<Layer> risk_gradient(const FiniteNetwork& f, const Mat& X, const Vec& y)
{
    const auto n = X.rows();
    const int L = f.L;
    // forward pass keeping pre-activations and hidden outputs
    std::vector<Mat> pre(static_cast<std::size_t>(L));
    std::vector<Mat> hid(static_cast<std::size_t>(L));  // hid[l] = eta(pre[l]), unused for l = L-1
    pre[0] = (X * f.layers[0].W.transpose()).rowwise() + f.layers[0].b.transpose();
    for (int l = 1; l < L; ++l) {
        hid[l - 1] = f.act.apply(pre[l - 1]);
        pre[l] = (hid[l - 1] * f.layers[l].W.transpose()).rowwise() + f.layers[l].b.transpose();
    }

    std::vector<Layer> grad(static_cast<std::size_t>(L));
    // dRisk/dA_L with risk = (1/n) sum (y - out)^2
    Mat G = (pre[static_cast<std::size_t>(L) - 1].col(0) - y) * (2.0 / static_cast<double>(n));
    for (int l = L - 1; l >= 0; --l) {
        const Mat& input = l == 0 ? X : hid[static_cast<std::size_t>(l) - 1];
        grad[static_cast<std::size_t>(l)].W = G.transpose() * input;
        grad[static_cast<std::size_t>(l)].b = G.colwise().sum().transpose();
        if (l > 0)
            G = (G * f.layers[static_cast<std::size_t>(l)].W)
                    .cwiseProduct(f.act.deriv(pre[static_cast<std::size_t>(l) - 1]));
    }
    return grad;
}

static void apply_step(FiniteNetwork& net, const std::vector<Layer>& grad, double step)
{
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        net.layers[l].W -= step * grad[l].W;
        net.layers[l].b -= step * grad[l].b;
    }
}

TrainResult train(const Dataset& d, const std::vector<int>& widths, const Activation& act,
                  const NormBudget& budget, const TrainConfig& cfg,
                  const FiniteNetwork* warm_start)
{
    cfg.validate();
    budget.validate();
    if (widths.front() != d.d())
        throw std::invalid_argument("train: input width must match the dataset dimension");

    Rng rng(derive_seed(cfg.seed, "train"));
    TrainResult res;
    if (cfg.init == TrainConfig::Init::fstar_warmstart) {
        if (warm_start == nullptr)
            throw std::invalid_argument("train: warm start requested but no network given");
        if (warm_start->widths != widths)
            throw std::invalid_argument("train: warm start architecture mismatch");
        res.net = *warm_start;
    } else {
        res.net = random_network(widths, act, budget, rng);
    }
    project_network(res.net, budget);

    double risk = empirical_risk(res.net, d);
    const double initial_risk = risk;
    res.history.push_back(risk);
    double step = cfg.step_size;
    int stalled = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        bool improved = false;
        if (cfg.batch <= 0 || cfg.batch >= d.n()) {
            const auto grad = risk_gradient(res.net, d.X, d.y);
            // backtracking: halve until the projected step does not increase risk
            FiniteNetwork trial = res.net;
            double trial_risk = risk;
            bool halved = false;
            for (int half = 0; half < 40; ++half) {
                trial = res.net;
                apply_step(trial, grad, step);
                project_network(trial, budget);
                trial_risk = empirical_risk(trial, d);
                if (trial_risk <= risk)
                    break;
                step *= 0.5;
                halved = true;
            }
            if (trial_risk <= risk) {
                improved = risk - trial_risk > cfg.tol * std::max(risk, 1e-300);
                res.net = std::move(trial);
                risk = trial_risk;
            }
            if (!halved)
                step = std::min(step * 1.2, cfg.step_size);
        } else {
            std::vector<int> order(static_cast<std::size_t>(d.n()));
            std::iota(order.begin(), order.end(), 0);
            for (int i = d.n() - 1; i > 0; --i)
                std::swap(order[static_cast<std::size_t>(i)],
                          order[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
            for (int start = 0; start < d.n(); start += cfg.batch) {
                const int len = std::min(cfg.batch, d.n() - start);
                Mat Xb(len, d.d());
                Vec yb(len);
                for (int i = 0; i < len; ++i) {
                    Xb.row(i) = d.X.row(order[static_cast<std::size_t>(start + i)]);
                    yb(i) = d.y(order[static_cast<std::size_t>(start + i)]);
                }
                const auto grad = risk_gradient(res.net, Xb, yb);
                apply_step(res.net, grad, step);
                project_network(res.net, budget);
            }
            const double new_risk = empirical_risk(res.net, d);
            improved = risk - new_risk > cfg.tol * std::max(risk, 1e-300);
            risk = new_risk;
        }

        res.history.push_back(risk);
        ++res.epochs_run;
        step *= cfg.step_decay;

        if (cfg.check_feasible_each_epoch && !res.net.feasible(budget, 1e-12))
            throw std::runtime_error("train: feasibility violated after projection");
        // absolute floor keeps a zero-risk warm start from tripping the guard
        // on harmless minibatch jitter
        if (risk > cfg.divergence_factor * std::max(initial_risk, 1e-6))
            throw std::runtime_error("train: risk diverged past the guard at epoch " +
                                     std::to_string(epoch));
        // two flat epochs in a row before declaring convergence, so a single
        // over-sized step that backtracking shrank to nothing does not stop us
        stalled = improved ? 0 : stalled + 1;
        if (stalled >= 2) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace widthlab
