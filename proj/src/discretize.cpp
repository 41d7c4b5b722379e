#include "widthlab/discretize.hpp"

#include <cmath>

#include "widthlab/spectrum.hpp"

namespace widthlab {

static int width_rule(double N, double delta, double factor)
{
    if (!(N > 0.0))
        throw std::invalid_argument("min_width: N must be positive");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("min_width: delta must lie in (0, 1/2)");
    const double v = 5.0 * N * std::log(factor * N / delta);
    const int w = static_cast<int>(std::ceil(v));
    return std::max(1, w);
}

int min_width(double N, double delta)
{
    return width_rule(N, delta, 32.0);
}

int min_width_16(double N, double delta)
{
    return width_rule(N, delta, 16.0);
}

LeverageProfile leverage_profile(const Mat& Phi, const Vec& Q, double lambda)
{
    if (!(lambda > 0.0))
        throw std::invalid_argument("leverage_profile: lambda must be positive");
    const auto n = Phi.rows();
    const auto M = Phi.cols();
    if (Q.size() != M)
        throw std::invalid_argument("leverage_profile: Q size mismatch");

    LeverageProfile prof;
    prof.lambda = lambda;

    Mat K = Phi * Q.asDiagonal() * Phi.transpose() / static_cast<double>(n);
    K = 0.5 * (K + K.transpose()).eval();
    K.diagonal().array() += lambda;
    Eigen::LLT<Mat> llt(K);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("leverage_profile: factorization failed");
    const Mat S = llt.solve(Phi);

    prof.leverage = Vec(M);
    for (Eigen::Index v = 0; v < M; ++v)
        prof.leverage(v) =
            std::max(0.0, Q(v) * Phi.col(v).dot(S.col(v)) / static_cast<double>(n));
    prof.dof = prof.leverage.sum();

    if (prof.dof <= 1e-12) {
        prof.uniform_fallback = true;
        prof.q = Vec::Constant(M, 1.0 / static_cast<double>(M));
    } else {
        prof.q = prof.leverage / prof.dof;
    }
    return prof;
}

SampledNodes sample_from_profile(const LeverageProfile& prof, const Vec& Q, int m, Rng& rng)
{
    if (m < 1)
        throw std::invalid_argument("sample_from_profile: m must be >= 1");
    SampledNodes nodes;
    nodes.layer = prof.layer;
    nodes.lambda = prof.lambda;
    nodes.uniform_fallback = prof.uniform_fallback;
    nodes.idx.resize(static_cast<std::size_t>(m));
    nodes.w = Vec(m);
    DiscreteSampler pick(prof.q);
    for (int j = 0; j < m; ++j) {
        const int v = pick(rng);
        nodes.idx[static_cast<std::size_t>(j)] = v;
        nodes.w(j) = prof.uniform_fallback ? 1.0 : std::sqrt(Q(v) / prof.q(v));
    }
    return nodes;
}

SampledNodes sample_nodes(const TeacherNetwork& t, int ell, double lambda, int m, const Mat& X,
                          std::uint64_t seed, SampleMode mode)
{
    if (ell < 2 || ell > t.L)
        throw std::invalid_argument("sample_nodes: ell must lie in 2..L");
    const Vec& Q = t.Q[static_cast<std::size_t>(ell) - 1];
    const int M = t.M[static_cast<std::size_t>(ell) - 1];

    if (mode == SampleMode::exhaustive) {
        if (m != M)
            throw std::invalid_argument("sample_nodes: exhaustive mode needs m == M_l");
        SampledNodes nodes;
        nodes.layer = ell;
        nodes.lambda = lambda;
        nodes.idx.resize(static_cast<std::size_t>(m));
        nodes.w = Vec(m);
        for (int v = 0; v < M; ++v) {
            nodes.idx[static_cast<std::size_t>(v)] = v;
            nodes.w(v) = std::sqrt(static_cast<double>(M) * Q(v));
        }
        return nodes;
    }

    const Mat Phi = layer_features(t, ell, X);
    LeverageProfile prof = leverage_profile(Phi, Q, lambda);
    prof.layer = ell;
    Rng rng(derive_seed(seed, "sample_nodes", static_cast<std::uint64_t>(ell)));
    return sample_from_profile(prof, Q, m, rng);
}

RidgeSolver::RidgeSolver(Mat A, double lambda, int m) : A_(std::move(A))
{
    if (!(lambda > 0.0) || m < 1)
        throw std::invalid_argument("RidgeSolver: lambda must be positive and m >= 1");
    lambda_m_ = lambda * static_cast<double>(m);
    const auto n = A_.rows();
    dual_ = A_.cols() > n;
    Mat G;
    if (dual_) {
        G = A_ * A_.transpose() / static_cast<double>(n);
    } else {
        G = A_.transpose() * A_ / static_cast<double>(n);
    }
    G.diagonal().array() += lambda_m_;
    llt_.compute(G);
    if (llt_.info() != Eigen::Success)
        throw std::runtime_error("RidgeSolver: factorization failed");
}

Vec RidgeSolver::solve(const Vec& target) const
{
    const double n = static_cast<double>(A_.rows());
    if (dual_)
        return A_.transpose() * llt_.solve(target) / n;
    return llt_.solve(A_.transpose() * target / n);
}

Mat RidgeSolver::solve_multi(const Mat& targets) const
{
    const double n = static_cast<double>(A_.rows());
    if (dual_)
        return A_.transpose() * llt_.solve(targets) / n;
    return llt_.solve(A_.transpose() * targets / n);
}

FitResult fit_beta(const RidgeSolver& solver, const Vec& target, double R, double c1)
{
    FitResult res;
    res.beta = solver.solve(target);
    const double n = static_cast<double>(solver.n());
    res.err_unconstrained = (target - solver.design() * res.beta).squaredNorm() / n;
    res.beta_norm2 = res.beta.squaredNorm();
    const double ball = c1 * R * R / static_cast<double>(res.beta.size());
    if (res.beta_norm2 > ball && res.beta_norm2 > 0.0) {
        res.beta *= std::sqrt(ball / res.beta_norm2);
        res.rescaled = true;
        res.err = (target - solver.design() * res.beta).squaredNorm() / n;
    } else {
        res.err = res.err_unconstrained;
    }
    return res;
}

ConstructResult construct_fstar(const TeacherNetwork& t, const std::vector<double>& lambdas,
                                const std::vector<int>& widths, double delta, const Mat& X,
                                std::uint64_t seed, SampleMode mode)
{
    t.check();
    const auto internal = static_cast<std::size_t>(t.L) - 1;
    if (lambdas.size() != internal || widths.size() != internal)
        throw std::invalid_argument("construct_fstar: need one lambda and width per layer 2..L");

    NormBudget budget = t.budget;
    budget.delta = delta;
    budget.validate();
    const double R_bar = budget.R_bar();

    // teacher layer node values once; Phi_l = eta(F_{l-1}) serves both the
    // sampling distribution and the row-fit designs
    const auto F = t.layer_values(X);
    const auto n = X.rows();

    // node draws for every internal layer
    std::vector<SampledNodes> nodes(internal);
    std::vector<LeverageProfile> profiles(internal);
    std::vector<Mat> Phis(internal);
    for (int ell = 2; ell <= t.L; ++ell) {
        const auto k = static_cast<std::size_t>(ell) - 2;
        Phis[k] = layer_features_from(F[k], t.act);
        profiles[k] = leverage_profile(Phis[k], t.Q[k + 1], lambdas[k]);
        profiles[k].layer = ell;
        if (mode == SampleMode::exhaustive) {
            const int M = t.M[static_cast<std::size_t>(ell) - 1];
            if (widths[k] != M)
                throw std::invalid_argument(
                    "construct_fstar: exhaustive mode needs m equal to the node-grid size");
            nodes[k].idx.resize(static_cast<std::size_t>(M));
            nodes[k].w.resize(M);
            for (int j = 0; j < M; ++j) {
                nodes[k].idx[static_cast<std::size_t>(j)] = j;
                nodes[k].w(j) = std::sqrt(static_cast<double>(M) * t.Q[k + 1](j));
            }
            nodes[k].lambda = lambdas[k];
        } else {
            Rng rng(derive_seed(seed, "construct_nodes", static_cast<std::uint64_t>(ell)));
            nodes[k] = sample_from_profile(profiles[k], t.Q[k + 1], widths[k], rng);
        }
        nodes[k].layer = ell;
    }

    ConstructResult out;
    std::vector<int> net_widths;
    net_widths.push_back(t.d_x);
    for (auto m : widths)
        net_widths.push_back(m);
    net_widths.push_back(1);
    out.net = FiniteNetwork::zeros(net_widths, t.act);

    // first layer: exact integral-representation rows at the sampled nodes of
    // T_2 (or the output node when L = 1)
    const std::vector<int> out_row{0};
    const std::vector<int>& v2 = t.L >= 2 ? nodes[0].idx : out_row;
    {
        Mat& W = out.net.layers[0].W;
        Vec& bvec = out.net.layers[0].b;
        for (std::size_t i = 0; i < v2.size(); ++i) {
            const int tau = v2[i];
            W.row(static_cast<Eigen::Index>(i)) =
                (t.h[0].row(tau).transpose().array() * t.Q[0].array()).transpose();
            bvec(static_cast<Eigen::Index>(i)) = t.b[0](tau);
        }
    }

    for (int ell = 2; ell <= t.L; ++ell) {
        const auto k = static_cast<std::size_t>(ell) - 2;
        const SampledNodes& nd = nodes[k];
        const int m = static_cast<int>(nd.idx.size());
        const Vec& Q = t.Q[k + 1];
        const Mat& Phi = Phis[k];

        Mat A(n, m);
        for (int j = 0; j < m; ++j)
            A.col(j) = nd.w(j) * Phi.col(nd.idx[static_cast<std::size_t>(j)]);

        // exact teacher row targets on the full node grid
        const std::vector<int>& rows = ell < t.L ? nodes[k + 1].idx : out_row;
        const auto kk = static_cast<Eigen::Index>(rows.size());
        Mat h_sel(kk, t.M[k + 1]);
        Vec b_sel(kk);
        for (Eigen::Index i = 0; i < kk; ++i) {
            h_sel.row(i) = t.h[k + 1].row(rows[static_cast<std::size_t>(i)]);
            b_sel(i) = t.b[k + 1](rows[static_cast<std::size_t>(i)]);
        }
        const Mat targets = Phi * (h_sel * Q.asDiagonal()).transpose();

        RidgeSolver solver(std::move(A), lambdas[k], m);
        Mat B = solver.solve_multi(targets);

        LayerBuildInfo info;
        info.ell = ell;
        info.m = m;
        info.lambda = lambdas[k];
        info.dof = profiles[k].dof;
        info.mean_w2 = nd.mean_w2();
        info.uniform_fallback = nd.uniform_fallback;
        if (profiles[k].dof > 0.0) {
            info.width_rule_32 = min_width(profiles[k].dof, delta);
            info.width_rule_16 = min_width_16(profiles[k].dof, delta);
        }

        const double ball = budget.c1 * budget.R * budget.R / static_cast<double>(m);
        for (Eigen::Index i = 0; i < kk; ++i) {
            const double b2 = B.col(i).squaredNorm();
            if (b2 > ball && b2 > 0.0) {
                B.col(i) *= std::sqrt(ball / b2);
                ++info.beta_rescales;
            }
        }

        Mat W = (nd.w.asDiagonal() * B).transpose();
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            const double l1 = W.row(i).cwiseAbs().sum();
            if (l1 > R_bar && l1 > 0.0) {
                const double scale = R_bar / l1;
                W.row(i) *= scale;
                B.col(i) *= scale;
                ++info.row_rescales;
            }
        }

        const Mat resid = targets - solver.design() * B;
        double total = 0.0, worst = 0.0;
        for (Eigen::Index i = 0; i < kk; ++i) {
            const double e = resid.col(i).squaredNorm() / static_cast<double>(n);
            total += e;
            worst = std::max(worst, e);
        }
        info.mean_row_err = total / static_cast<double>(kk);
        info.max_row_err = worst;

        out.net.layers[k + 1].W = std::move(W);
        out.net.layers[k + 1].b = b_sel;
        out.layers.push_back(info);
    }

    out.net.check_shapes();
    return out;
}

L2Error l2_px_error(const FiniteNetwork& f, const TeacherNetwork& t, const Mat& xs)
{
    if (xs.rows() == 0)
        throw std::invalid_argument("l2_px_error: empty sample");
    const Vec diff = f.eval_batch(xs) - t.eval_batch(xs);
    const auto n = static_cast<double>(xs.rows());
    const Vec sq = diff.array().square();
    const double mse = sq.mean();
    const double var = (sq.array() - mse).square().sum() / std::max(1.0, n - 1.0);
    const double se_mse = std::sqrt(var / n);
    L2Error out;
    out.value = std::sqrt(mse);
    // delta method: d sqrt(m) / dm = 1 / (2 sqrt(m))
    out.se = mse > 0.0 ? se_mse / (2.0 * out.value) : 0.0;
    return out;
}

} // namespace widthlab
