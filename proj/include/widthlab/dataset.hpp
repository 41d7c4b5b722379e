#pragma once

#include <string>

#include "widthlab/common.hpp"
#include "widthlab/rng.hpp"
#include "widthlab/teacher.hpp"

namespace widthlab {

struct Dataset {
    Mat X;
    Vec y;
    double sigma = 0.0;
    std::string input_law = "uniform";

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
};

// i.i.d. inputs from the input law: "uniform" on [-D_x, D_x]^d or
// "truncated_gaussian" (unit normal rejected outside the box)
Mat sample_inputs(Rng& rng, int n, int d_x, double D_x, const std::string& law = "uniform");

Dataset generate_dataset(const TeacherNetwork& t, int n, double sigma, std::uint64_t seed,
                         const std::string& law = "uniform");

void save_dataset(const Dataset& d, const std::string& csv_path, std::uint64_t seed);
Dataset load_dataset(const std::string& csv_path);

} // namespace widthlab
