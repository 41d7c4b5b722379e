#pragma once

#include "widthlab/common.hpp"
#include "widthlab/teacher.hpp"

namespace widthlab {

// Empirical eigenvalues of one layer's kernel integral operator, estimated by
// Gram matrix / n_x over an i.i.d. input sample.
struct LayerSpectrum {
    int layer = 0;  // l in 2..L
    Vec mu;         // nonincreasing, clipped at 0
    int n_x = 0;
    bool has_fit = false;
    double a = 0.0;
    double s = 0.0;
};

struct DecayFit {
    double a = 0.0;
    double s = 0.0;      // reported inside (0,1)
    double s_raw = 0.0;  // unclamped least-squares value
    bool clamped = false;
    int n_used = 0;
};

// Phi(i, v) = eta(F_{l-1}(x_i, v)) over the node grid T_l
Mat layer_features(const TeacherNetwork& t, int ell, const Mat& X);
Mat layer_features_from(const Mat& prev_values, const Activation& act);

// K_ij = sum_v Q_l(v) Phi(i,v) Phi(j,v)
Mat layer_gram(const TeacherNetwork& t, int ell, const Mat& X);

LayerSpectrum spectrum_of(const Mat& K, int n_x);
LayerSpectrum layer_spectrum(const TeacherNetwork& t, int ell, const Mat& X);

double dof_of(const Vec& mu, double lambda);
double dof(const LayerSpectrum& spec, double lambda);

DecayFit fit_decay(const LayerSpectrum& spec);
double dof_from_decay(double a, double s, double lambda);

} // namespace widthlab
