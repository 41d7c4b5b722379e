#pragma once

#include <string>

#include "widthlab/common.hpp"

namespace widthlab {

enum class Act { relu, leaky_relu, sigmoid, tanh_fn, elu };

// 1-Lipschitz scalar nonlinearity applied between layers. `param` is the
// negative-side slope for leaky_relu (in (0,1)) and alpha for elu (in (0,1];
// larger alpha would break the Lipschitz contract on the left of 0).
struct Activation {
    Act kind = Act::relu;
    double param = 0.0;

    Activation() = default;
    Activation(Act k, double p = 0.0);

    double operator()(double x) const;
    // derivative; at the kink of relu/leaky_relu/elu we return 0
    double deriv(double x) const;
    double c_eta() const;

    Mat apply(const Mat& X) const;
    Mat deriv(const Mat& X) const;

    std::string name() const;
    static Activation parse(const std::string& name, double param);
};

} // namespace widthlab
