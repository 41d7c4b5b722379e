#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace widthlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.1.0";

// max row l1-norm, the operator norm induced by the sup norm
inline double winf_norm(const Mat& A)
{
    double best = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        best = std::max(best, A.row(i).cwiseAbs().sum());
    return best;
}

inline double max_norm(const Vec& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace widthlab
