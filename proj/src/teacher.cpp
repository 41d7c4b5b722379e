#include "widthlab/teacher.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace widthlab {

using nlohmann::json;

void TeacherNetwork::check() const
{
    if (L < 1 || M.size() != static_cast<std::size_t>(L) + 1)
        throw std::invalid_argument("TeacherNetwork: inconsistent layer count");
    if (M.front() != d_x || M.back() != 1)
        throw std::invalid_argument("TeacherNetwork: M must start at d_x and end at 1");
    if (Q.size() != static_cast<std::size_t>(L) || h.size() != Q.size() || b.size() != Q.size())
        throw std::invalid_argument("TeacherNetwork: per-layer field count mismatch");
    for (int l = 0; l < L; ++l) {
        if (Q[l].size() != M[l] || h[l].rows() != M[l + 1] || h[l].cols() != M[l] ||
            b[l].size() != M[l + 1])
            throw std::invalid_argument("TeacherNetwork: layer shape mismatch");
        if (Q[l].minCoeff() < 0.0 || std::abs(Q[l].sum() - 1.0) > 1e-12)
            throw std::invalid_argument("TeacherNetwork: Q must be a probability vector");
    }
}

double TeacherNetwork::row_norm2(int ell, int row) const
{
    const Mat& hl = h[static_cast<std::size_t>(ell - 1)];
    const Vec& ql = Q[static_cast<std::size_t>(ell - 1)];
    return (hl.row(row).transpose().array().square() * ql.array()).sum();
}

std::vector<Mat> TeacherNetwork::layer_values(const Mat& X) const
{
    if (X.cols() != d_x)
        throw std::invalid_argument("TeacherNetwork: input dimension mismatch");
    std::vector<Mat> F(static_cast<std::size_t>(L));
    Mat hq = h[0] * Q[0].asDiagonal();
    F[0] = (X * hq.transpose()).rowwise() + b[0].transpose();
    for (int l = 1; l < L; ++l) {
        hq = h[l] * Q[l].asDiagonal();
        F[l] = (act.apply(F[l - 1]) * hq.transpose()).rowwise() + b[l].transpose();
    }
    return F;
}

Vec TeacherNetwork::eval_batch(const Mat& X) const
{
    return layer_values(X).back().col(0);
}

std::pair<double, std::vector<Vec>> TeacherNetwork::eval(const Vec& x) const
{
    Mat X = x.transpose();
    auto F = layer_values(X);
    std::vector<Vec> outs(F.size());
    for (std::size_t l = 0; l < F.size(); ++l)
        outs[l] = F[l].row(0).transpose();
    return {outs.back()(0), std::move(outs)};
}

TeacherNetwork sample_teacher(const TeacherOptions& opt, std::uint64_t seed)
{
    opt.budget.validate();
    if (opt.L < 1 || opt.d_x < 1)
        throw std::invalid_argument("sample_teacher: L and d_x must be >= 1");
    if (!opt.resolutions.empty() &&
        opt.resolutions.size() != static_cast<std::size_t>(opt.L) - 1)
        throw std::invalid_argument("sample_teacher: need one resolution per internal layer");

    TeacherNetwork t;
    t.L = opt.L;
    t.d_x = opt.d_x;
    t.act = opt.act;
    t.budget = opt.budget;
    t.decay_s = opt.decay_s;
    t.M.resize(static_cast<std::size_t>(opt.L) + 1);
    t.M.front() = opt.d_x;
    t.M.back() = 1;
    for (int l = 2; l <= opt.L; ++l)
        t.M[static_cast<std::size_t>(l) - 1] =
            opt.resolutions.empty() ? 512 : opt.resolutions[static_cast<std::size_t>(l) - 2];

    const double R = opt.budget.R;
    Rng rng(derive_seed(seed, "teacher"));
    for (int l = 0; l < opt.L; ++l) {
        const int m_in = t.M[static_cast<std::size_t>(l)];
        const int m_out = t.M[static_cast<std::size_t>(l) + 1];
        Vec q = Vec::Constant(m_in, 1.0 / m_in);

        // per-coordinate standard deviations; j^(-1/s) variance profile when a
        // decay target is set, flat otherwise, scaled so a typical row has
        // squared L2(Q) norm (fill*R)^2
        Vec sd(m_in);
        if (opt.decay_s > 0.0) {
            for (int j = 0; j < m_in; ++j)
                sd(j) = std::pow(static_cast<double>(j + 1), -1.0 / opt.decay_s);
        } else {
            sd.setOnes();
        }
        const double mean_var = (sd.array() * q.array()).sum();
        const double scale2 = mean_var > 0.0 ? (opt.fill * R) * (opt.fill * R) / mean_var : 0.0;
        sd = (sd * scale2).cwiseSqrt();

        Mat hl(m_out, m_in);
        for (int i = 0; i < m_out; ++i) {
            for (int j = 0; j < m_in; ++j)
                hl(i, j) = sd(j) * rng.normal();
            const double n2 = (hl.row(i).transpose().array().square() * q.array()).sum();
            if (n2 > R * R && n2 > 0.0)
                hl.row(i) *= R / std::sqrt(n2);
        }
        Vec bl(m_out);
        for (int i = 0; i < m_out; ++i)
            bl(i) = rng.uniform(-opt.budget.R_b, opt.budget.R_b);

        t.Q.push_back(std::move(q));
        t.h.push_back(std::move(hl));
        t.b.push_back(std::move(bl));
    }
    t.check();
    return t;
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
    const auto nc = nr == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
    Mat A(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index j = 0; j < nc; ++j)
            A(i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
    return A;
}

std::string teacher_to_json(const TeacherNetwork& t)
{
    json j;
    j["L"] = t.L;
    j["d_x"] = t.d_x;
    j["M"] = t.M;
    j["activation"] = {{"kind", t.act.name()}, {"param", t.act.param}};
    j["budget"] = {{"R", t.budget.R},     {"R_b", t.budget.R_b}, {"D_x", t.budget.D_x},
                   {"delta", t.budget.delta}, {"c0", t.budget.c0},   {"c1", t.budget.c1}};
    j["decay_s"] = t.decay_s;
    json layers = json::array();
    for (int l = 0; l < t.L; ++l) {
        json jl;
        jl["Q"] = std::vector<double>(t.Q[l].data(), t.Q[l].data() + t.Q[l].size());
        jl["h"] = matrix_to_json(t.h[l]);
        jl["b"] = std::vector<double>(t.b[l].data(), t.b[l].data() + t.b[l].size());
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2);
}

TeacherNetwork teacher_from_json(const std::string& text)
{
    json j = json::parse(text);
    if (j.contains("teacher"))
        j = j.at("teacher");
    TeacherNetwork t;
    t.L = j.at("L").get<int>();
    t.d_x = j.at("d_x").get<int>();
    t.M = j.at("M").get<std::vector<int>>();
    const auto& ja = j.at("activation");
    t.act = Activation::parse(ja.at("kind").get<std::string>(), ja.value("param", 0.0));
    const auto& jb = j.at("budget");
    t.budget.R = jb.at("R").get<double>();
    t.budget.R_b = jb.at("R_b").get<double>();
    t.budget.D_x = jb.at("D_x").get<double>();
    t.budget.delta = jb.at("delta").get<double>();
    t.budget.c0 = jb.value("c0", 4.0);
    t.budget.c1 = jb.value("c1", 4.0);
    t.decay_s = j.value("decay_s", 0.0);
    for (const auto& jl : j.at("layers")) {
        const auto q = jl.at("Q").get<std::vector<double>>();
        t.Q.push_back(Eigen::Map<const Vec>(q.data(), static_cast<Eigen::Index>(q.size())));
        t.h.push_back(matrix_from_json(jl.at("h")));
        const auto bv = jl.at("b").get<std::vector<double>>();
        t.b.push_back(Eigen::Map<const Vec>(bv.data(), static_cast<Eigen::Index>(bv.size())));
    }
    t.check();
    return t;
}

void save_teacher(const TeacherNetwork& t, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << teacher_to_json(t) << '\n';
}

TeacherNetwork load_teacher(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return teacher_from_json(ss.str());
}

} // namespace widthlab
