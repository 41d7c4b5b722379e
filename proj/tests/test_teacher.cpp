#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "widthlab/dataset.hpp"
#include "widthlab/network.hpp"
#include "widthlab/teacher.hpp"

using namespace widthlab;

namespace {

TeacherOptions small_options()
{
    TeacherOptions opt;
    opt.L = 2;
    opt.d_x = 3;
    opt.resolutions = {8};
    opt.budget.R = 1.5;
    opt.budget.R_b = 0.4;
    opt.budget.D_x = 1.0;
    opt.act = Activation::parse("relu", 0.0);
    return opt;
}

// plain-loop evaluator kept deliberately independent of the Eigen code path
double reference_eval(const TeacherNetwork& t, const Vec& x)
{
    std::vector<double> cur(static_cast<std::size_t>(t.d_x));
    for (int j = 0; j < t.d_x; ++j)
        cur[static_cast<std::size_t>(j)] = x(j);
    for (int l = 0; l < t.L; ++l) {
        const int m_out = t.M[static_cast<std::size_t>(l) + 1];
        const int m_in = t.M[static_cast<std::size_t>(l)];
        std::vector<double> next(static_cast<std::size_t>(m_out));
        for (int i = 0; i < m_out; ++i) {
            double acc = t.b[static_cast<std::size_t>(l)](i);
            for (int j = 0; j < m_in; ++j) {
                const double v = l == 0 ? cur[static_cast<std::size_t>(j)]
                                        : t.act(cur[static_cast<std::size_t>(j)]);
                acc += t.h[static_cast<std::size_t>(l)](i, j) *
                       t.Q[static_cast<std::size_t>(l)](j) * v;
            }
            next[static_cast<std::size_t>(i)] = acc;
        }
        cur = std::move(next);
    }
    return cur[0];
}

} // namespace

TEST_SUITE("teacher") {

TEST_CASE("sampled teachers have the advertised shape") {
    auto opt = small_options();
    const auto t = sample_teacher(opt, 5);
    REQUIRE(t.L == 2);
    REQUIRE(t.M == std::vector<int>{3, 8, 1});
    REQUIRE(t.Q.size() == 2);
    CHECK(t.h[0].rows() == 8);
    CHECK(t.h[0].cols() == 3);
    CHECK(t.h[1].rows() == 1);
    CHECK(t.h[1].cols() == 8);
    // node measures are uniform probability vectors
    for (int l = 0; l < 2; ++l) {
        CHECK(t.Q[l].sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(t.Q[l].maxCoeff() == doctest::Approx(t.Q[l].minCoeff()));
    }
    CHECK_NOTHROW(t.check());

    // empty resolutions default every internal grid to 512
    opt.resolutions.clear();
    opt.L = 3;
    const auto big = sample_teacher(opt, 5);
    CHECK(big.M == std::vector<int>{3, 512, 512, 1});
}

TEST_CASE("row norms respect the budget and the fill target") {
    TeacherOptions opt;
    opt.L = 2;
    opt.d_x = 128;
    opt.resolutions = {256};
    opt.budget.R = 2.0;
    opt.budget.R_b = 0.3;
    opt.act = Activation::parse("relu", 0.0);
    const auto t = sample_teacher(opt, 11);

    double mean_norm2 = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double n2 = t.row_norm2(1, i);
        REQUIRE(n2 <= opt.budget.R * opt.budget.R * (1.0 + 1e-12));
        mean_norm2 += n2 / 256.0;
    }
    // rows aim at (fill * R)^2 = 0.81 R^2 before the rare onto-sphere rescale
    const double r2 = opt.budget.R * opt.budget.R;
    CHECK(mean_norm2 > 0.70 * r2);
    CHECK(mean_norm2 < 0.90 * r2);

    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < t.b[l].size(); ++i)
            REQUIRE(std::abs(t.b[l](i)) <= opt.budget.R_b);
}

TEST_CASE("row_norm2 agrees with a direct sum") {
    const auto t = sample_teacher(small_options(), 3);
    for (int i = 0; i < 8; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j)
            acc += t.h[0](i, j) * t.h[0](i, j) * t.Q[0](j);
        CHECK(t.row_norm2(1, i) == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("decay targeting concentrates weight on early nodes") {
    TeacherOptions opt;
    opt.L = 2;
    opt.d_x = 4;
    opt.resolutions = {256};
    opt.budget.R = 1.0;
    opt.act = Activation::parse("relu", 0.0);
    opt.decay_s = 0.5;
    const auto t = sample_teacher(opt, 9);
    // second-layer row integrates over the 256-node grid; with s = 1/2 the
    // coordinate variances fall like j^-2, so across first-layer rows the
    // empirical second moment of column 1 dwarfs that of column 16
    double m1 = 0.0, m16 = 0.0;
    for (int i = 0; i < 256; ++i) {
        m1 += t.h[0](i, 0) * t.h[0](i, 0) / 256.0;
        m16 += t.h[0](i, 3) * t.h[0](i, 3) / 256.0;
    }
    CHECK(m1 > 10.0 * m16);
}

TEST_CASE("sampling is seed deterministic") {
    const auto a = sample_teacher(small_options(), 42);
    const auto b = sample_teacher(small_options(), 42);
    const auto c = sample_teacher(small_options(), 43);
    CHECK(a.h[0] == b.h[0]);
    CHECK(a.b[1] == b.b[1]);
    CHECK(a.h[0] != c.h[0]);
}

TEST_CASE("option validation") {
    auto opt = small_options();
    opt.L = 0;
    CHECK_THROWS_AS(sample_teacher(opt, 1), std::invalid_argument);
    opt = small_options();
    opt.resolutions = {8, 8};
    CHECK_THROWS_AS(sample_teacher(opt, 1), std::invalid_argument);
    opt = small_options();
    opt.budget.delta = 0.7;
    CHECK_THROWS_AS(sample_teacher(opt, 1), std::invalid_argument);
}

TEST_CASE("evaluation matches a plain-loop reference") {
    TeacherOptions opt = small_options();
    opt.L = 3;
    opt.resolutions = {8, 6};
    opt.act = Activation::parse("elu", 0.5);
    const auto t = sample_teacher(opt, 21);
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        Vec x(3);
        for (int j = 0; j < 3; ++j)
            x(j) = rng.uniform(-1.0, 1.0);
        const double ref = reference_eval(t, x);
        CHECK(t.eval(x).first == doctest::Approx(ref).epsilon(1e-12));
    }
    Mat X(30, 3);
    for (int i = 0; i < X.size(); ++i)
        X(i / 3, i % 3) = rng.uniform(-1.0, 1.0);
    const Vec out = t.eval_batch(X);
    for (int i = 0; i < 30; ++i)
        CHECK(out(i) == doctest::Approx(reference_eval(t, X.row(i).transpose())).epsilon(1e-12));
}

TEST_CASE("eval exposes per-layer node values consistent with layer_values") {
    const auto t = sample_teacher(small_options(), 6);
    Vec x(3);
    x << 0.2, -0.4, 0.9;
    const auto [val, nodes] = t.eval(x);
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0].size() == 8);
    CHECK(nodes[1].size() == 1);
    CHECK(val == nodes[1](0));
    const auto F = t.layer_values(x.transpose());
    CHECK(F[0].row(0).transpose() == nodes[0]);
}

TEST_CASE("teacher outputs stay below the integral-class sup bound") {
    TeacherOptions opt;
    opt.L = 3;
    opt.d_x = 4;
    opt.resolutions = {32, 32};
    opt.budget.R = 1.3;
    opt.budget.R_b = 0.6;
    opt.budget.D_x = 1.5;
    opt.act = Activation::parse("sigmoid", 0.0);
    const auto t = sample_teacher(opt, 8);
    const double cap = sup_norm_bound(opt.budget, opt.L, opt.act).bound_fo;
    Rng rng(99);
    Mat X = sample_inputs(rng, 2000, 4, opt.budget.D_x);
    CHECK(t.eval_batch(X).cwiseAbs().maxCoeff() <= cap + 1e-12);
}

TEST_CASE("json round trip is bit exact and accepts the wrapped form") {
    const auto t = sample_teacher(small_options(), 13);
    const std::string text = teacher_to_json(t);
    const auto back = teacher_from_json(text);
    REQUIRE(back.L == t.L);
    REQUIRE(back.M == t.M);
    CHECK(back.act.name() == t.act.name());
    CHECK(back.budget.R == t.budget.R);
    CHECK(back.decay_s == t.decay_s);
    for (int l = 0; l < t.L; ++l) {
        CHECK(back.Q[l] == t.Q[l]);
        CHECK(back.h[l] == t.h[l]);
        CHECK(back.b[l] == t.b[l]);
    }
    // tool output nests the teacher under a top-level key
    const auto wrapped = teacher_from_json("{\"teacher\": " + text + "}");
    CHECK(wrapped.h[0] == t.h[0]);

    const auto path = (std::filesystem::temp_directory_path() / "teacher_roundtrip.json").string();
    save_teacher(t, path);
    const auto loaded = load_teacher(path);
    CHECK(loaded.h[0] == t.h[0]);
    std::filesystem::remove(path);

    // a corrupted node measure is rejected on load
    auto bad = t;
    bad.Q[0](0) += 0.5;
    CHECK_THROWS_AS(teacher_from_json(teacher_to_json(bad)), std::invalid_argument);
}

TEST_CASE("datasets are reproducible and noiseless labels match the teacher") {
    const auto t = sample_teacher(small_options(), 2);
    const auto d1 = generate_dataset(t, 64, 0.0, 7);
    const auto d2 = generate_dataset(t, 64, 0.0, 7);
    const auto d3 = generate_dataset(t, 64, 0.0, 8);
    CHECK(d1.X == d2.X);
    CHECK(d1.y == d2.y);
    CHECK(d1.X != d3.X);
    CHECK(d1.y == t.eval_batch(d1.X));
    CHECK(d1.X.cwiseAbs().maxCoeff() <= t.budget.D_x);
    CHECK(d1.n() == 64);
    CHECK(d1.d() == 3);
}

TEST_CASE("label noise has the requested scale") {
    const auto t = sample_teacher(small_options(), 2);
    const double sigma = 0.5;
    const auto d = generate_dataset(t, 20000, sigma, 77);
    const Vec noise = d.y - t.eval_batch(d.X);
    const double mean = noise.mean();
    const double var = (noise.array() - mean).square().sum() / (noise.size() - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.03));
}

TEST_CASE("truncated gaussian inputs stay in the box and differ from uniform") {
    const auto t = sample_teacher(small_options(), 2);
    const auto dg = generate_dataset(t, 4000, 0.0, 5, "truncated_gaussian");
    CHECK(dg.X.cwiseAbs().maxCoeff() <= t.budget.D_x);
    // the gaussian law piles mass near zero: fourth moment ratio separates it
    // from the flat law at this sample size
    const auto du = generate_dataset(t, 4000, 0.0, 5, "uniform");
    const double frac_g = (dg.X.cwiseAbs().array() < 0.5).count() / static_cast<double>(dg.X.size());
    const double frac_u = (du.X.cwiseAbs().array() < 0.5).count() / static_cast<double>(du.X.size());
    CHECK(frac_g > frac_u + 0.05);
    CHECK_THROWS_AS(generate_dataset(t, 10, 0.0, 1, "cauchy"), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(t, 10, -0.1, 1), std::invalid_argument);
}

TEST_CASE("dataset csv round trip preserves every bit") {
    const auto t = sample_teacher(small_options(), 30);
    const auto d = generate_dataset(t, 40, 0.2, 9);
    const auto path = (std::filesystem::temp_directory_path() / "teacher_dataset.csv").string();
    save_dataset(d, path, 9);
    const auto back = load_dataset(path);
    REQUIRE(back.n() == d.n());
    REQUIRE(back.d() == d.d());
    CHECK(back.X == d.X);
    CHECK(back.y == d.y);
    CHECK(back.sigma == d.sigma);
    CHECK(back.input_law == d.input_law);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta.json");
}

} // TEST_SUITE
