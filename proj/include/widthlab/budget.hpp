#pragma once

#include <cmath>

#include "widthlab/common.hpp"

namespace widthlab {

// Norm caps shared by the teacher and the finite class: R bounds the row
// weight functions in L2(Q), R_b the biases, D_x the input sup norm. delta is
// the node-sampling failure probability and inflates R to the row-l1 cap
// R_bar = sqrt(c1 * c_delta) * R of the trainable class.
struct NormBudget {
    double R = 1.0;
    double R_b = 0.5;
    double D_x = 1.0;
    double delta = 0.1;
    double c0 = 4.0;
    double c1 = 4.0;

    double c_delta() const { return 1.0 / (1.0 - delta); }
    double c_hat() const { return c1 * c_delta(); }
    double R_bar() const { return std::sqrt(c_hat()) * R; }

    void validate() const
    {
        if (!(delta > 0.0 && delta < 0.5))
            throw std::invalid_argument("NormBudget: delta must lie in (0, 1/2)");
        if (R < 0.0 || R_b < 0.0 || D_x < 0.0)
            throw std::invalid_argument("NormBudget: R, R_b, D_x must be >= 0");
    }
};

} // namespace widthlab
