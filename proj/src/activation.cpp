#include "widthlab/activation.hpp"

#include <cmath>

namespace widthlab {

Activation::Activation(Act k, double p) : kind(k), param(p)
{
    switch (kind) {
    case Act::leaky_relu:
        if (!(param > 0.0 && param < 1.0))
            throw std::invalid_argument("leaky_relu slope must lie in (0,1)");
        break;
    case Act::elu:
        if (!(param > 0.0 && param <= 1.0))
            throw std::invalid_argument("elu alpha must lie in (0,1]");
        break;
    default:
        param = 0.0;
        break;
    }
}

double Activation::operator()(double x) const
{
    switch (kind) {
    case Act::relu:
        return x > 0.0 ? x : 0.0;
    case Act::leaky_relu:
        return x > 0.0 ? x : param * x;
    case Act::sigmoid:
        return 1.0 / (1.0 + std::exp(-x));
    case Act::tanh_fn:
        return std::tanh(x);
    case Act::elu:
        return x > 0.0 ? x : param * (std::exp(x) - 1.0);
    }
    return 0.0;
}

double Activation::deriv(double x) const
{
    switch (kind) {
    case Act::relu:
        return x > 0.0 ? 1.0 : 0.0;
    case Act::leaky_relu:
        return x > 0.0 ? 1.0 : (x < 0.0 ? param : 0.0);
    case Act::sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 - s);
    }
    case Act::tanh_fn: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Act::elu:
        return x > 0.0 ? 1.0 : (x < 0.0 ? param * std::exp(x) : 0.0);
    }
    return 0.0;
}

double Activation::c_eta() const
{
    return kind == Act::sigmoid ? 0.5 : 0.0;
}

Mat Activation::apply(const Mat& X) const
{
    return X.unaryExpr([this](double v) { return (*this)(v); });
}

Mat Activation::deriv(const Mat& X) const
{
    return X.unaryExpr([this](double v) { return deriv(v); });
}

std::string Activation::name() const
{
    switch (kind) {
    case Act::relu:
        return "relu";
    case Act::leaky_relu:
        return "leaky_relu";
    case Act::sigmoid:
        return "sigmoid";
    case Act::tanh_fn:
        return "tanh";
    case Act::elu:
        return "elu";
    }
    return "?";
}

Activation Activation::parse(const std::string& name, double param)
{
    if (name == "relu")
        return Activation(Act::relu);
    if (name == "leaky_relu")
        return Activation(Act::leaky_relu, param);
    if (name == "sigmoid")
        return Activation(Act::sigmoid);
    if (name == "tanh")
        return Activation(Act::tanh_fn);
    if (name == "elu")
        return Activation(Act::elu, param);
    throw std::invalid_argument("unknown activation: " + name);
}

} // namespace widthlab
