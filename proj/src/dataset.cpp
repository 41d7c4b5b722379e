#include "widthlab/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace widthlab {

Mat sample_inputs(Rng& rng, int n, int d_x, double D_x, const std::string& law)
{
    if (n < 1 || d_x < 1)
        throw std::invalid_argument("sample_inputs: n and d_x must be >= 1");
    Mat X(n, d_x);
    if (law == "uniform") {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d_x; ++j)
                X(i, j) = rng.uniform(-D_x, D_x);
    } else if (law == "truncated_gaussian") {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d_x; ++j) {
                double z = rng.normal();
                while (std::abs(z) > D_x)
                    z = rng.normal();
                X(i, j) = z;
            }
    } else {
        throw std::invalid_argument("sample_inputs: unknown input law " + law);
    }
    return X;
}

Dataset generate_dataset(const TeacherNetwork& t, int n, double sigma, std::uint64_t seed,
                         const std::string& law)
{
    if (sigma < 0.0)
        throw std::invalid_argument("generate_dataset: sigma must be >= 0");
    Dataset d;
    d.sigma = sigma;
    d.input_law = law;
    Rng rng(derive_seed(seed, "dataset"));
    d.X = sample_inputs(rng, n, t.d_x, t.budget.D_x, law);
    d.y = t.eval_batch(d.X);
    for (int i = 0; i < n; ++i)
        d.y(i) += sigma * rng.normal();
    return d;
}

static void append_double(std::string& out, double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

void save_dataset(const Dataset& d, const std::string& csv_path, std::uint64_t seed)
{
    std::string text;
    for (int j = 0; j < d.d(); ++j)
        text += "x_" + std::to_string(j + 1) + ",";
    text += "y\n";
    for (int i = 0; i < d.n(); ++i) {
        for (int j = 0; j < d.d(); ++j) {
            append_double(text, d.X(i, j));
            text += ',';
        }
        append_double(text, d.y(i));
        text += '\n';
    }
    std::ofstream out(csv_path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + csv_path);
    out << text;

    nlohmann::json meta{{"n", d.n()},
                        {"sigma", d.sigma},
                        {"seed", seed},
                        {"input_law", d.input_law}};
    std::ofstream mout(csv_path + ".meta.json");
    if (!mout)
        throw std::runtime_error("cannot open for writing: " + csv_path + ".meta.json");
    mout << meta.dump(2) << '\n';
}

Dataset load_dataset(const std::string& csv_path)
{
    std::ifstream in(csv_path);
    if (!in)
        throw std::runtime_error("cannot open: " + csv_path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty dataset file: " + csv_path);
    int cols = 1;
    for (char c : line)
        if (c == ',')
            ++cols;
    const int d_x = cols - 1;
    std::vector<double> vals;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        int got = 0;
        while (std::getline(ss, cell, ',')) {
            vals.push_back(std::stod(cell));
            ++got;
        }
        if (got != cols)
            throw std::runtime_error("ragged dataset row in " + csv_path);
        ++rows;
    }
    Dataset d;
    d.X.resize(rows, d_x);
    d.y.resize(rows);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < d_x; ++j)
            d.X(i, j) = vals[static_cast<std::size_t>(i) * cols + j];
        d.y(i) = vals[static_cast<std::size_t>(i) * cols + d_x];
    }
    std::ifstream min(csv_path + ".meta.json");
    if (min) {
        nlohmann::json meta = nlohmann::json::parse(min);
        d.sigma = meta.value("sigma", 0.0);
        d.input_law = meta.value("input_law", "uniform");
    }
    return d;
}

} // namespace widthlab
