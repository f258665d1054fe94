#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tds/frequency.hpp"
#include "tds/stability.hpp"

using namespace tds;
using testutil::random_delay_model;

namespace {
const Complex kJ(0.0, 1.0);

// Scalar Newton iteration on s + a e^{-tau s} = 0 from a given start.
Complex scalar_root(double a, double tau, Complex s0) {
    Complex s = s0;
    for (int it = 0; it < 80; ++it) {
        const Complex f = s + a * std::exp(-tau * s);
        const Complex df = 1.0 - a * tau * std::exp(-tau * s);
        const Complex step = f / df;
        s -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(s))) break;
    }
    return s;
}
}  // namespace

TEST_CASE("first-order Pade coefficients and all-pass property") {
    PadeApprox p = pade_delay(2.0, 1);
    REQUIRE(p.num.size() == 2);
    REQUIRE(p.den.size() == 2);
    CHECK(p.num[0] == doctest::Approx(-1.0));  // (1 - tau s / 2)
    CHECK(p.num[1] == doctest::Approx(1.0));
    CHECK(p.den[0] == doctest::Approx(1.0));   // (1 + tau s / 2)
    CHECK(p.den[1] == doctest::Approx(1.0));
    for (int order : {1, 2, 3, 5, 8}) {
        PadeApprox pa = pade_delay(1.7, order);
        for (double w : {0.1, 1.0, 5.0}) {
            const Complex v = poly_eval(pa.num, kJ * w) / poly_eval(pa.den, kJ * w);
            CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(pade_delay(-1.0, 2), ModelError);
    CHECK_THROWS_AS(pade_delay(1.0, 0), ModelError);
}

TEST_CASE("Pade substitution grows the order and keeps DC exact") {
    GltiModel g = to_glti(make_tf(Poly{5.6}, Poly{40.2, 1.0}, 93.9));
    GltiModel p3 = pade_model(g, 3);
    CHECK(!p3.has_delays());
    CHECK(p3.order() == 1 + 3);
    CHECK(dcgain(p3).value(0, 0) == doctest::Approx(5.6).epsilon(1e-9));
    // omega tau ~ 0.94 here: order 3 is good to a few 1e-5
    const Complex have = freq_response_at(p3, 0.01)(0, 0);
    const Complex want = freq_response_at(g, 0.01)(0, 0);
    CHECK(std::abs(have - want) < 1e-4 * std::abs(want));
}

TEST_CASE("Pade error decreases with order in its accuracy band") {
    GltiModel g = to_glti(make_tf(Poly{5.6}, Poly{40.2, 1.0}, 93.9));
    double prev_err = 1e300;
    for (int order : {1, 2, 4, 8}) {
        GltiModel pm = pade_model(g, order);
        double err = 0.0;
        for (double w = 0.002; w <= 0.05; w *= 1.25) {
            const Complex want = freq_response_at(g, w)(0, 0);
            err = std::max(err, std::abs(freq_response_at(pm, w)(0, 0) - want) / std::abs(want));
        }
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-7);  // order 8 out to omega tau ~ 4.7
}

TEST_CASE("delay-free spectra are exact eigenvalues") {
    Mat a(3, 3);
    a << -1.0, 1.0, 0.0, 0.0, -2.0, 0.5, 0.0, 0.0, -5.0;
    GltiModel m = make_ss(a, Mat::Zero(3, 1), Mat::Zero(1, 3), Mat::Zero(1, 1));
    SpectrumResult r = rightmost_roots(m, 3);
    REQUIRE(r.roots.size() == 3);
    CHECK(r.converged);
    CHECK(r.n_cheb == 0);
    CHECK(r.roots(0).real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.roots(1).real() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.roots(2).real() == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("scalar delay equation x' = -x(t-1)") {
    // rightmost pair of s + e^{-s} = 0
    DelayDdeForm f;
    f.a0 = Mat::Zero(1, 1);
    f.b0 = Mat::Zero(1, 1);
    f.c0 = Mat::Identity(1, 1);
    f.d0 = Mat::Zero(1, 1);
    DelayDdeTerm t;
    t.theta = 1.0;
    t.a = Mat::Constant(1, 1, -1.0);
    t.b = Mat::Zero(1, 1);
    t.c = Mat::Zero(1, 1);
    t.d = Mat::Zero(1, 1);
    f.terms.push_back(t);
    GltiModel m = from_delay_dde(f);

    SpectrumResult r = rightmost_roots(m, 4, 1e-10);
    REQUIRE(r.roots.size() >= 2);
    CHECK(r.converged);
    CHECK(r.max_residual < 1e-8);
    const Complex want = scalar_root(1.0, 1.0, Complex(-0.3, 1.3));
    CHECK(want.real() == doctest::Approx(-0.3181315052).epsilon(1e-8));  // sanity on the oracle
    CHECK(want.imag() == doctest::Approx(1.3372357014).epsilon(1e-8));
    CHECK(std::abs(r.roots(0).real() - want.real()) < 1e-9);
    CHECK(std::abs(std::abs(r.roots(0).imag()) - want.imag()) < 1e-9);
    // conjugate pair present
    CHECK(std::abs(r.roots(1) - std::conj(r.roots(0))) < 1e-9);
    // defining equation satisfied
    for (long i = 0; i < std::min<long>(r.roots.size(), 4); ++i) {
        const Complex s = r.roots(i);
        CHECK(std::abs(s + std::exp(-s)) < 1e-8 * (1.0 + std::abs(s)));
    }
}

TEST_CASE("unstable scalar delay equation x' = +x(t-1)") {
    // s - e^{-s} = 0 has the real root 0.567143 (omega constant)
    DelayDdeForm f;
    f.a0 = Mat::Zero(1, 1);
    f.b0 = Mat::Zero(1, 1);
    f.c0 = Mat::Identity(1, 1);
    f.d0 = Mat::Zero(1, 1);
    DelayDdeTerm t;
    t.theta = 1.0;
    t.a = Mat::Constant(1, 1, 1.0);
    t.b = Mat::Zero(1, 1);
    t.c = Mat::Zero(1, 1);
    t.d = Mat::Zero(1, 1);
    f.terms.push_back(t);
    GltiModel m = from_delay_dde(f);
    SpectrumResult r = rightmost_roots(m, 3, 1e-10);
    const Complex want = scalar_root(-1.0, 1.0, Complex(0.5, 0.0));
    CHECK(r.roots(0).real() == doctest::Approx(want.real()).epsilon(1e-9));
    CHECK(r.roots(0).imag() == doctest::Approx(0.0));
    CHECK(is_stable(m) == Stability::kUnstable);
}

TEST_CASE("two incommensurate delays satisfy the characteristic equation") {
    // x' = -2 x(t) - x(t - 0.7) - 0.5 x(t - 1.9)
    DelayDdeForm f;
    f.a0 = Mat::Constant(1, 1, -2.0);
    f.b0 = Mat::Zero(1, 1);
    f.c0 = Mat::Identity(1, 1);
    f.d0 = Mat::Zero(1, 1);
    for (double pair : {0.0, 1.0}) {
        DelayDdeTerm t;
        t.theta = pair == 0.0 ? 0.7 : 1.9;
        t.a = Mat::Constant(1, 1, pair == 0.0 ? -1.0 : -0.5);
        t.b = Mat::Zero(1, 1);
        t.c = Mat::Zero(1, 1);
        t.d = Mat::Zero(1, 1);
        f.terms.push_back(t);
    }
    GltiModel m = from_delay_dde(f);
    SpectrumResult r = rightmost_roots(m, 6, 1e-10);
    CHECK(r.converged);
    REQUIRE(r.roots.size() >= 4);
    for (long i = 0; i < r.roots.size(); ++i) {
        const Complex s = r.roots(i);
        const Complex chi =
            s + 2.0 + std::exp(-0.7 * s) + 0.5 * std::exp(-1.9 * s);
        CHECK(std::abs(chi) < 1e-8 * (1.0 + std::abs(s)));
        // descending real part
        if (i > 0) CHECK(r.roots(i).real() <= r.roots(i - 1).real() + 1e-12);
    }
    // complex roots come in conjugate pairs
    for (long i = 0; i < r.roots.size(); ++i) {
        if (std::abs(r.roots(i).imag()) < 1e-10) continue;
        bool paired = false;
        for (long j = 0; j < r.roots.size(); ++j)
            if (std::abs(r.roots(j) - std::conj(r.roots(i))) < 1e-7) paired = true;
        CHECK(paired);
    }
    CHECK(is_stable(m) == Stability::kStable);
}

TEST_CASE("delay channels with zero state coupling fall back to eigenvalues") {
    // delay acts only on the input/output path, free dynamics are just A
    GltiModel g = to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}, 2.0));
    SpectrumResult r = rightmost_roots(g, 2);
    CHECK(r.n_cheb == 0);
    CHECK(r.converged);
    CHECK(r.roots(0).real() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("neutral-type coupling is rejected") {
    GltiModel m = random_delay_model(2, 1, 1, 1);
    m.d22(0, 0) = 0.4;  // delayed signal feeds a delayed signal directly
    CHECK_THROWS_AS(rightmost_roots(m, 3), ModelError);
}

TEST_CASE("argument validation") {
    GltiModel g = to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}));
    CHECK_THROWS_AS(rightmost_roots(g, 0), ModelError);
    CHECK_THROWS_AS(rightmost_roots(g, 3, 0.0), ModelError);
}

TEST_CASE("stability verdicts") {
    CHECK(is_stable(to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}, 0.5))) == Stability::kStable);
    CHECK(is_stable(to_glti(make_tf(Poly{1.0}, Poly{1.0, -0.2}))) == Stability::kUnstable);
    // integrator: rightmost root exactly on the axis
    CHECK(is_stable(to_glti(make_tf(Poly{1.0}, Poly{1.0, 0.0}))) == Stability::kUndecided);
}
