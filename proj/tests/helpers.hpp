#pragma once

#include <complex>
#include <random>

#include "tds/interconnect.hpp"
#include "tds/model.hpp"

namespace testutil {

using tds::Complex;
using tds::GltiModel;
using tds::Mat;
using tds::Vec;

inline std::mt19937& rng() {
    static std::mt19937 gen(20260826u);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng());
}

inline Mat random_matrix(int rows, int cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = uniform(-scale, scale);
    return m;
}

/// Random delay-free model whose A has its spectrum shifted left of -margin.
inline GltiModel random_stable_ss(int n, int mi, int p, double margin = 0.2) {
    Mat a = random_matrix(n, n);
    Eigen::EigenSolver<Mat> es(a, false);
    double maxre = 0.0;
    for (long i = 0; i < n; ++i) maxre = std::max(maxre, es.eigenvalues()(i).real());
    a -= (maxre + margin) * Mat::Identity(n, n);
    return tds::make_ss(a, random_matrix(n, mi), random_matrix(p, n), random_matrix(p, mi, 0.3));
}

/// Random model with delay channels: a stable rational core plus nc delay
/// channels of random width and delay, coupled weakly enough to stay
/// well-posed.
inline GltiModel random_delay_model(int n, int mi, int p, int nc) {
    GltiModel m = random_stable_ss(n, mi, p);
    int q = 0;
    std::vector<int> widths;
    for (int k = 0; k < nc; ++k) {
        widths.push_back(uniform_int(1, 2));
        q += widths.back();
    }
    m.b2 = random_matrix(n, q, 0.4);
    m.c2 = random_matrix(q, n, 0.4);
    m.d12 = random_matrix(p, q, 0.2);
    m.d21 = random_matrix(q, mi, 0.2);
    m.d22 = Mat::Zero(q, q);
    m.tau = Vec(nc);
    for (int k = 0; k < nc; ++k) m.tau(k) = uniform(0.1, 3.0);
    m.delay_widths = widths;
    tds::validate(m);
    return m;
}

inline double rel_err(Complex got, Complex want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double max_rel_err(const tds::CMat& got, const tds::CMat& want) {
    double e = 0.0;
    for (long i = 0; i < got.rows(); ++i)
        for (long j = 0; j < got.cols(); ++j) e = std::max(e, rel_err(got(i, j), want(i, j)));
    return e;
}

}  // namespace testutil
