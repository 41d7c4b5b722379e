#include "widthlab/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace widthlab {

using nlohmann::json;

FiniteNetwork FiniteNetwork::zeros(const std::vector<int>& widths, const Activation& act)
{
    if (widths.size() < 2)
        throw std::invalid_argument("FiniteNetwork: need at least input and output widths");
    FiniteNetwork net;
    net.L = static_cast<int>(widths.size()) - 1;
    net.widths = widths;
    net.act = act;
    net.layers.resize(static_cast<std::size_t>(net.L));
    for (int l = 0; l < net.L; ++l) {
        net.layers[l].W = Mat::Zero(widths[l + 1], widths[l]);
        net.layers[l].b = Vec::Zero(widths[l + 1]);
    }
    return net;
}

void FiniteNetwork::check_shapes() const
{
    if (L < 1 || widths.size() != static_cast<std::size_t>(L) + 1 ||
        layers.size() != static_cast<std::size_t>(L))
        throw std::invalid_argument("FiniteNetwork: inconsistent layer count");
    if (widths.back() != 1)
        throw std::invalid_argument("FiniteNetwork: output width must be 1");
    for (int l = 0; l < L; ++l) {
        if (layers[l].W.rows() != widths[l + 1] || layers[l].W.cols() != widths[l] ||
            layers[l].b.size() != widths[l + 1])
            throw std::invalid_argument("FiniteNetwork: layer shape mismatch");
    }
}

double FiniteNetwork::eval(const Vec& x) const
{
    if (x.size() != widths.front())
        throw std::invalid_argument("FiniteNetwork::eval: input dimension mismatch");
    Vec a = layers[0].W * x + layers[0].b;
    for (int l = 1; l < L; ++l) {
        const Vec h = a.unaryExpr([this](double v) { return act(v); });
        a = layers[l].W * h + layers[l].b;
    }
    return a(0);
}

std::pair<double, std::vector<Vec>> FiniteNetwork::eval_with_preacts(const Vec& x) const
{
    if (x.size() != widths.front())
        throw std::invalid_argument("FiniteNetwork::eval_with_preacts: input dimension mismatch");
    std::vector<Vec> pre(static_cast<std::size_t>(L));
    pre[0] = layers[0].W * x + layers[0].b;
    for (int l = 1; l < L; ++l) {
        const Vec h = pre[l - 1].unaryExpr([this](double v) { return act(v); });
        pre[l] = layers[l].W * h + layers[l].b;
    }
    return {pre.back()(0), std::move(pre)};
}

Vec FiniteNetwork::eval_batch(const Mat& X) const
{
    if (X.cols() != widths.front())
        throw std::invalid_argument("FiniteNetwork::eval_batch: input dimension mismatch");
    Mat a = (X * layers[0].W.transpose()).rowwise() + layers[0].b.transpose();
    for (int l = 1; l < L; ++l)
        a = (act.apply(a) * layers[l].W.transpose()).rowwise() + layers[l].b.transpose();
    return a.col(0);
}

std::vector<Mat> FiniteNetwork::preacts_batch(const Mat& X) const
{
    if (X.cols() != widths.front())
        throw std::invalid_argument("FiniteNetwork::preacts_batch: input dimension mismatch");
    std::vector<Mat> pre(static_cast<std::size_t>(L));
    pre[0] = (X * layers[0].W.transpose()).rowwise() + layers[0].b.transpose();
    for (int l = 1; l < L; ++l)
        pre[l] = (act.apply(pre[l - 1]) * layers[l].W.transpose()).rowwise() +
                 layers[l].b.transpose();
    return pre;
}

double FiniteNetwork::max_winf() const
{
    double best = 0.0;
    for (const auto& layer : layers)
        best = std::max(best, winf_norm(layer.W));
    return best;
}

double FiniteNetwork::max_bias() const
{
    double best = 0.0;
    for (const auto& layer : layers)
        best = std::max(best, max_norm(layer.b));
    return best;
}

bool FiniteNetwork::feasible(const NormBudget& budget, double rtol) const
{
    const double wcap = budget.R_bar() + rtol * std::max(1.0, budget.R_bar());
    const double bcap = budget.R_b + rtol * std::max(1.0, budget.R_b);
    return max_winf() <= wcap && max_bias() <= bcap;
}

SupNormBounds sup_norm_bound(const NormBudget& budget, int L, const Activation& act)
{
    if (L < 1)
        throw std::invalid_argument("sup_norm_bound: L must be >= 1");
    const double ce = act.c_eta();
    const double Rb = budget.R_bar();
    SupNormBounds out;
    out.bound_fo = std::pow(budget.R, L) * budget.D_x;
    out.r_hat_inf = std::pow(Rb, L) * budget.D_x;
    for (int l = 1; l <= L; ++l) {
        out.bound_fo += std::pow(budget.R, L - l) * (budget.R_b + ce);
        out.r_hat_inf += std::pow(Rb, L - l) * (ce + budget.R_b);
    }
    return out;
}

double lip_diff_constant(const NormBudget& budget, int L, const Activation& act)
{
    if (L < 1)
        throw std::invalid_argument("lip_diff_constant: L must be >= 1");
    const double Rb = budget.R_bar();
    double g = L * std::pow(Rb, L - 1) * (budget.D_x + L * (act.c_eta() + budget.R_b));
    for (int l = 1; l <= L; ++l)
        g += std::pow(Rb, L - l);
    return g;
}

double empirical_sup_distance(const FiniteNetwork& f, const FiniteNetwork& g, const Mat& xs)
{
    if (f.widths != g.widths)
        throw std::invalid_argument("empirical_sup_distance: architectures differ");
    if (xs.rows() == 0)
        throw std::invalid_argument("empirical_sup_distance: empty sample");
    return (f.eval_batch(xs) - g.eval_batch(xs)).cwiseAbs().maxCoeff();
}

Vec random_l1_ball(int dim, double radius, Rng& rng)
{
    Vec v(dim);
    double l1 = 0.0;
    for (int i = 0; i < dim; ++i) {
        double u = rng.uniform();
        while (u <= 0.0)
            u = rng.uniform();
        const double e = -std::log(u);
        v(i) = rng.uniform() < 0.5 ? -e : e;
        l1 += e;
    }
    if (l1 <= 0.0)
        return Vec::Zero(dim);
    const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
    return v * (r / l1);
}

FiniteNetwork random_network(const std::vector<int>& widths, const Activation& act,
                             const NormBudget& budget, Rng& rng)
{
    FiniteNetwork net = FiniteNetwork::zeros(widths, act);
    for (auto& layer : net.layers) {
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
            layer.W.row(i) = random_l1_ball(static_cast<int>(layer.W.cols()), budget.R_bar(), rng).transpose();
        for (Eigen::Index i = 0; i < layer.b.size(); ++i)
            layer.b(i) = rng.uniform(-budget.R_b, budget.R_b);
    }
    return net;
}

static json matrix_to_json(const Mat& A)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            row.push_back(A(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

static Mat matrix_from_json(const json& rows)
{
    const auto nr = static_cast<Eigen::Index>(rows.size());
    if (nr == 0)
        return Mat(0, 0);
    const auto nc = static_cast<Eigen::Index>(rows.at(0).size());
    Mat A(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != nc)
            throw std::invalid_argument("network json: ragged weight matrix");
        for (Eigen::Index j = 0; j < nc; ++j)
            A(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return A;
}

std::string network_to_json(const FiniteNetwork& net)
{
    json j;
    j["L"] = net.L;
    j["widths"] = net.widths;
    j["activation"] = {{"kind", net.act.name()}, {"param", net.act.param}};
    json layers = json::array();
    for (const auto& layer : net.layers) {
        json jl;
        jl["W"] = matrix_to_json(layer.W);
        jl["b"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2);
}

FiniteNetwork network_from_json(const std::string& text)
{
    json j = json::parse(text);
    if (j.contains("network"))
        j = j.at("network");
    FiniteNetwork net;
    net.L = j.at("L").get<int>();
    net.widths = j.at("widths").get<std::vector<int>>();
    const auto& ja = j.at("activation");
    net.act = Activation::parse(ja.at("kind").get<std::string>(), ja.value("param", 0.0));
    for (const auto& jl : j.at("layers")) {
        Layer layer;
        layer.W = matrix_from_json(jl.at("W"));
        const auto b = jl.at("b").get<std::vector<double>>();
        layer.b = Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(b.size()));
        net.layers.push_back(std::move(layer));
    }
    net.check_shapes();
    return net;
}

void save_network(const FiniteNetwork& net, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << network_to_json(net) << '\n';
}

FiniteNetwork load_network(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

} // namespace widthlab
