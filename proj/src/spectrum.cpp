#include "widthlab/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace widthlab {

Mat layer_features_from(const Mat& prev_values, const Activation& act)
{
    return act.apply(prev_values);
}

Mat layer_features(const TeacherNetwork& t, int ell, const Mat& X)
{
    if (ell < 2 || ell > t.L)
        throw std::invalid_argument("layer_features: ell must lie in 2..L");
    const auto F = t.layer_values(X);
    return layer_features_from(F[static_cast<std::size_t>(ell) - 2], t.act);
}

Mat layer_gram(const TeacherNetwork& t, int ell, const Mat& X)
{
    if (X.rows() < 2)
        throw std::invalid_argument("layer_gram: need at least 2 inputs");
    const Mat Phi = layer_features(t, ell, X);
    const Vec& q = t.Q[static_cast<std::size_t>(ell) - 1];
    Mat K = Phi * q.asDiagonal() * Phi.transpose();
    // enforce exact symmetry against rounding in the product
    K = 0.5 * (K + K.transpose()).eval();
    return K;
}

LayerSpectrum spectrum_of(const Mat& K, int n_x)
{
    if (K.rows() != K.cols())
        throw std::invalid_argument("spectrum_of: matrix must be square");
    if (n_x < 1)
        throw std::invalid_argument("spectrum_of: n_x must be >= 1");
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument("spectrum_of: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (K + K.transpose()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectrum_of: eigendecomposition failed");
    Vec ev = es.eigenvalues().reverse() / static_cast<double>(n_x);
    LayerSpectrum spec;
    spec.mu = ev.cwiseMax(0.0);
    spec.n_x = n_x;
    return spec;
}

LayerSpectrum layer_spectrum(const TeacherNetwork& t, int ell, const Mat& X)
{
    LayerSpectrum spec = spectrum_of(layer_gram(t, ell, X), static_cast<int>(X.rows()));
    spec.layer = ell;
    return spec;
}

double dof_of(const Vec& mu, double lambda)
{
    if (!(lambda > 0.0))
        throw std::invalid_argument("dof: lambda must be positive");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j)
        sum += mu(j) / (mu(j) + lambda);
    return sum;
}

double dof(const LayerSpectrum& spec, double lambda)
{
    return dof_of(spec.mu, lambda);
}

DecayFit fit_decay(const LayerSpectrum& spec)
{
    if (spec.mu.size() == 0)
        throw std::invalid_argument("fit_decay: empty spectrum");
    const double floor = 1e-12 * spec.mu(0);
    int n = 0;
    while (n < spec.mu.size() && spec.mu(n) > floor && spec.mu(n) > 0.0)
        ++n;
    if (n < 8)
        throw std::invalid_argument("fit_decay: only " + std::to_string(n) +
                                    " eigenvalues above the numerical floor; need 8");

    // least squares of log mu_j on log j
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int j = 0; j < n; ++j) {
        const double x = std::log(static_cast<double>(j + 1));
        const double y = std::log(spec.mu(j));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    DecayFit fit;
    fit.n_used = n;
    fit.a = std::exp(intercept);
    fit.s_raw = slope < 0.0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
    fit.s = fit.s_raw;
    const double lo = 1e-6, hi = 1.0 - 1e-6;
    if (!(fit.s_raw > lo) || !(fit.s_raw < hi)) {
        fit.s = std::min(hi, std::max(lo, fit.s_raw));
        fit.clamped = true;
    }
    return fit;
}

double dof_from_decay(double a, double s, double lambda)
{
    if (!(a > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("dof_from_decay: a and lambda must be positive");
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("dof_from_decay: s must lie in (0,1)");
    return std::pow(lambda / a, -s);
}

} // namespace widthlab
