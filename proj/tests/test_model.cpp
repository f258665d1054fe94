#include <doctest.h>

#include "helpers.hpp"
#include "tds/frequency.hpp"
#include "tds/model.hpp"

using namespace tds;
using testutil::max_rel_err;
using testutil::random_delay_model;

namespace {
const Complex kJ(0.0, 1.0);
}

TEST_CASE("polynomial helpers") {
    CHECK(poly_trim({0.0, 0.0, 1.0, 2.0}) == Poly{1.0, 2.0});
    CHECK(poly_trim({0.0, 0.0}).empty());
    CHECK(poly_mul({1.0, 1.0}, {1.0, -1.0}) == Poly{1.0, 0.0, -1.0});
    CHECK(poly_mul({}, {1.0}).empty());
    CHECK(poly_eval({1.0, 2.0, 3.0}, Complex(2.0, 0.0)) == Complex(11.0, 0.0));
}

TEST_CASE("validate rejects inconsistent blocks") {
    GltiModel m = make_ss(Mat::Zero(2, 2), Mat::Zero(2, 1), Mat::Zero(1, 2), Mat::Zero(1, 1));
    CHECK_NOTHROW(validate(m));
    GltiModel bad = m;
    bad.b1 = Mat::Zero(3, 1);
    CHECK_THROWS_AS(validate(bad), ModelError);
    bad = m;
    bad.tau = Vec::Constant(1, 1.0);
    CHECK_THROWS_AS(validate(bad), ModelError);  // widths missing
    bad = m;
    bad.tau = Vec::Constant(1, -1.0);
    bad.delay_widths = {1};
    CHECK_THROWS_AS(validate(bad), ModelError);  // negative delay, wrong q
    bad = m;
    bad.input_names = {"a", "b"};
    CHECK_THROWS_AS(validate(bad), ModelError);
}

TEST_CASE("static gains") {
    GltiModel g = static_gain(2.5);
    CHECK(g.order() == 0);
    CHECK(freq_response_at(g, 1.0)(0, 0) == Complex(2.5, 0.0));
    GltiModel eye = identity_gain(3);
    CHECK(eye.num_inputs() == 3);
    CHECK(freq_response_at(eye, 0.3)(1, 1) == Complex(1.0, 0.0));
    CHECK(freq_response_at(eye, 0.3)(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("make_tf validation") {
    CHECK_THROWS_AS(make_tf(Poly{1.0}, Poly{0.0}), ModelError);  // zero denominator
    CHECK_THROWS_AS(make_tf(Poly{1.0}, Poly{}), ModelError);     // empty denominator
    CHECK_THROWS_AS(make_tf(Poly{1.0}, Poly{1.0}, -1.0), ModelError);
    CHECK_THROWS_AS(to_glti(make_tf(Poly{1.0, 0.0, 0.0}, Poly{1.0, 1.0})), ModelError);  // improper
    // improper only before trimming leading zeros is fine
    CHECK_NOTHROW(to_glti(make_tf(Poly{0.0, 0.0, 1.0}, Poly{1.0, 1.0})));
}

TEST_CASE("first-order lag with dead time realizes exactly") {
    GltiModel p = to_glti(make_tf({5.6}, {40.2, 1.0}, 93.9));
    CHECK(p.order() == 1);
    CHECK(p.num_channels() == 1);
    CHECK(p.tau(0) == 93.9);
    CHECK(p.delay_widths == std::vector<int>{1});
    for (double w : {1e-3, 0.02, 0.3, 2.0}) {
        const Complex s = kJ * w;
        const Complex want = 5.6 / (40.2 * s + 1.0) * std::exp(-93.9 * s);
        CHECK(std::abs(freq_response_at(p, w)(0, 0) - want) < 1e-12 * std::abs(want));
    }
}

TEST_CASE("biproper channel keeps its feedthrough") {
    GltiModel g = to_glti(make_tf({1.0, 1.0}, {1.0, 2.0}));
    CHECK(g.order() == 1);
    CHECK(g.d11(0, 0) == doctest::Approx(1.0));
    const Complex s = kJ * 0.7;
    const Complex want = (s + 1.0) / (s + 2.0);
    CHECK(std::abs(freq_response_at(g, 0.7)(0, 0) - want) < 1e-14);
}

TEST_CASE("transfer matrix with mixed delays matches channel formulas") {
    // 2x2: shared column denominators, one zero channel, all delay kinds
    std::vector<std::vector<Poly>> num = {{{1.0}, {2.0, 0.5}}, {{}, {3.0}}};
    std::vector<std::vector<Poly>> den = {{{1.0, 1.0}, {1.0, 3.0, 2.0}}, {{1.0}, {2.0, 1.0}}};
    Mat io(2, 2);
    io << 0.4, 0.0, 0.0, 1.3;
    Vec ind(2), outd(2);
    ind << 0.2, 0.0;
    outd << 0.0, 0.7;
    GltiModel g = to_glti(make_tf(num, den, io, ind, outd));
    CHECK(g.num_inputs() == 2);
    CHECK(g.num_outputs() == 2);
    for (double w : {0.05, 0.4, 1.7}) {
        const Complex s = kJ * w;
        CMat want(2, 2);
        want(0, 0) = 1.0 / (s + 1.0) * std::exp(-(0.4 + 0.2) * s);
        want(0, 1) = (2.0 * s + 0.5) / (s * s + 3.0 * s + 2.0);
        want(1, 0) = 0.0;
        want(1, 1) = 3.0 / (2.0 * s + 1.0) * std::exp(-(1.3 + 0.7) * s);
        CHECK(max_rel_err(freq_response_at(g, w), want) < 1e-11);
    }
}

TEST_CASE("delay-differential form with state and input delays") {
    // dx/dt = -x(t-1) + u(t), y = x
    DelayDdeForm f;
    f.a0 = Mat::Zero(1, 1);
    f.b0 = Mat::Constant(1, 1, 1.0);
    f.c0 = Mat::Identity(1, 1);
    f.d0 = Mat::Zero(1, 1);
    DelayDdeTerm t;
    t.theta = 1.0;
    t.a = Mat::Constant(1, 1, -1.0);
    t.b = Mat::Zero(1, 1);
    t.c = Mat::Zero(1, 1);
    t.d = Mat::Zero(1, 1);
    f.terms.push_back(t);
    GltiModel g = from_delay_dde(f);
    CHECK(g.order() == 1);
    CHECK(g.delay_signal_count() == 1);  // only x is tapped
    for (double w : {0.1, 1.0, 4.0}) {
        const Complex s = kJ * w;
        const Complex want = 1.0 / (s + std::exp(-s));
        CHECK(std::abs(freq_response_at(g, w)(0, 0) - want) < 1e-12);
    }

    // dx/dt = -x(t) + u(t - 0.5), y = x: the input tap goes through d21
    DelayDdeForm f2;
    f2.a0 = Mat::Constant(1, 1, -1.0);
    f2.b0 = Mat::Zero(1, 1);
    f2.c0 = Mat::Identity(1, 1);
    f2.d0 = Mat::Zero(1, 1);
    DelayDdeTerm t2;
    t2.theta = 0.5;
    t2.a = Mat::Zero(1, 1);
    t2.b = Mat::Constant(1, 1, 1.0);
    t2.c = Mat::Zero(1, 1);
    t2.d = Mat::Zero(1, 1);
    f2.terms.push_back(t2);
    GltiModel g2 = from_delay_dde(f2);
    const Complex s = kJ * 0.8;
    const Complex want = std::exp(-0.5 * s) / (s + 1.0);
    CHECK(std::abs(freq_response_at(g2, 0.8)(0, 0) - want) < 1e-13);
}

TEST_CASE("equal-delay terms merge into one channel") {
    DelayDdeForm f;
    f.a0 = Mat::Zero(2, 2);
    f.b0 = Mat::Zero(2, 1);
    f.b0(0, 0) = 1.0;
    f.c0 = Mat::Identity(2, 2).topRows(1);
    f.d0 = Mat::Zero(1, 1);
    for (int rep = 0; rep < 2; ++rep) {
        DelayDdeTerm t;
        t.theta = 1.5;
        t.a = Mat::Zero(2, 2);
        t.a(rep, rep) = -0.5;
        t.b = Mat::Zero(2, 1);
        t.c = Mat::Zero(1, 2);
        t.d = Mat::Zero(1, 1);
        f.terms.push_back(t);
    }
    GltiModel g = from_delay_dde(f);
    CHECK(g.num_channels() == 1);
    CHECK(g.delay_widths == std::vector<int>{2});
}

TEST_CASE("normalize folds zero delays and is idempotent") {
    // z = u + 0.5 w, y = w, tau = 0  =>  w = 2u, y = 2u
    GltiModel m;
    m.a = Mat(0, 0);
    m.b1 = Mat(0, 1);
    m.b2 = Mat(0, 1);
    m.c1 = Mat::Zero(1, 0);
    m.d11 = Mat::Zero(1, 1);
    m.d12 = Mat::Constant(1, 1, 1.0);
    m.c2 = Mat::Zero(1, 0);
    m.d21 = Mat::Constant(1, 1, 1.0);
    m.d22 = Mat::Constant(1, 1, 0.5);
    m.tau = Vec::Zero(1);
    m.delay_widths = {1};
    GltiModel n = normalize(m);
    CHECK(n.num_channels() == 0);
    CHECK(n.d11(0, 0) == doctest::Approx(2.0));

    GltiModel ill = m;
    ill.d22(0, 0) = 1.0;
    CHECK_THROWS_AS(normalize(ill), NumericalError);
}

TEST_CASE("normalize sorts and merges channels, preserving the response") {
    GltiModel m = random_delay_model(3, 2, 2, 3);
    m.tau(0) = 2.0;
    m.tau(1) = 0.5;
    m.tau(2) = 2.0;  // same as channel 0: must merge
    GltiModel n = normalize(m);
    CHECK(n.num_channels() == 2);
    CHECK(n.tau(0) == 0.5);
    CHECK(n.tau(1) == 2.0);
    CHECK(n.delay_widths[1] ==
          m.delay_widths[0] + m.delay_widths[2]);
    for (double w : {0.3, 1.1, 2.7}) {
        CHECK(max_rel_err(freq_response_at(n, w), freq_response_at(m, w)) < 1e-12);
    }
    GltiModel n2 = normalize(n);
    CHECK((n2.a - n.a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((n2.d22 - n.d22).cwiseAbs().maxCoeff() == 0.0);
    CHECK(n2.tau == n.tau);
    CHECK(n2.delay_widths == n.delay_widths);
}

TEST_CASE("lft closure formula") {
    const CMat m11 = CMat::Constant(1, 1, Complex(1.0, 0.0));
    const CMat m12 = CMat::Constant(1, 1, Complex(2.0, 0.0));
    const CMat m21 = CMat::Constant(1, 1, Complex(3.0, 0.0));
    const CMat m22 = CMat::Constant(1, 1, Complex(0.25, 0.0));
    const CMat theta = CMat::Constant(1, 1, Complex(0.5, 0.5));
    const Complex want =
        1.0 + 2.0 * Complex(0.5, 0.5) / (1.0 - 0.25 * Complex(0.5, 0.5)) * 3.0;
    CHECK(std::abs(lft_eval(m11, m12, m21, m22, theta)(0, 0) - want) < 1e-15);
    CHECK(lft_eval(m11, m12, m21, m22, CMat::Zero(1, 1))(0, 0) == Complex(1.0, 0.0));
    CHECK_THROWS_AS(lft_eval(m11, m12, m21, CMat::Constant(1, 1, Complex(2.0, 0.0)),
                             CMat::Constant(1, 1, Complex(0.5, 0.0))),
                    NumericalError);
}

TEST_CASE("delay operator diagonal") {
    GltiModel m = random_delay_model(2, 1, 1, 2);
    m.tau << 1.0, 2.0;
    GltiModel n = normalize(m);
    const Complex s(0.3, 1.2);
    CVec d = delay_diag(n, s);
    int col = 0;
    for (int k = 0; k < n.num_channels(); ++k)
        for (int w = 0; w < n.delay_widths[static_cast<size_t>(k)]; ++w, ++col)
            CHECK(std::abs(d(col) - std::exp(-n.tau(k) * s)) < 1e-15);
}
