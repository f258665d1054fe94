#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tds/demos.hpp"
#include "tds/frequency.hpp"
#include "tds/interconnect.hpp"

using namespace tds;
using testutil::max_rel_err;
using testutil::random_delay_model;

namespace {
const Complex kJ(0.0, 1.0);
constexpr double kPi = 3.14159265358979323846;

// Solves f(w) = 0 on [lo, hi] for monotone f, to ~1e-12 relative.
template <typename F>
double bisect(F f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((flo <= 0.0) == (f(mid) <= 0.0)) {
            lo = mid;
            flo = f(mid);
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}
}  // namespace

TEST_CASE("pure dead time evaluates exactly") {
    GltiModel d = to_glti(make_tf(Poly{1.0}, Poly{1.0}, 2.5));
    CHECK(d.order() == 0);
    for (double w : {0.1, 1.0, 10.0, 100.0}) {
        const Complex want = std::exp(-2.5 * kJ * w);
        CHECK(std::abs(freq_response_at(d, w)(0, 0) - want) < 1e-15);
    }
}

TEST_CASE("responses are conjugate symmetric and real on the real axis") {
    GltiModel m = random_delay_model(3, 2, 2, 2);
    const Complex s(0.4, 1.3);
    const CMat hp = response_at(m, s);
    const CMat hm = response_at(m, std::conj(s));
    CHECK((hm - hp.conjugate()).cwiseAbs().maxCoeff() < 1e-13);
    const CMat hr = response_at(m, Complex(0.7, 0.0));
    CHECK(hr.imag().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dc gain closes the delay loop first") {
    // unity-feedback PI loop: raw A is singular, yet H(0) = 1
    GltiModel loop = tank_pi_loop();
    DcGain dc = dcgain(loop);
    CHECK(!dc.integrator);
    CHECK(dc.value(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(response_at(loop, Complex(0.0, 0.0))(0, 0) - Complex(1.0, 0.0)) < 1e-12);

    DcGain open = dcgain(to_glti(make_tf(Poly{1.0}, Poly{1.0, 0.0})));
    CHECK(open.integrator);
    CHECK(std::isinf(open.value(0, 0)));
}

TEST_CASE("auto grid spans the feature band with exact point count") {
    GltiModel p = tank_plant(0);
    Vec g = auto_grid(p);
    CHECK(g.size() == 500);
    for (long i = 1; i < g.size(); ++i) CHECK(g(i) > g(i - 1));
    CHECK(g(0) == doctest::Approx(0.01 / 40.2).epsilon(1e-9));
    CHECK(g(g.size() - 1) == doctest::Approx(100.0 * 2.0 * kPi / 93.9).epsilon(1e-9));
    // cluster points near the delay frequency
    const double wd = 2.0 * kPi / 93.9;
    int near = 0;
    for (long i = 0; i < g.size(); ++i)
        if (g(i) > wd * std::pow(10.0, -0.11) && g(i) < wd * std::pow(10.0, 0.11)) ++near;
    CHECK(near >= 5);

    CHECK(auto_grid(p, 37).size() == 37);
    CHECK_THROWS_AS(auto_grid(p, 1), ModelError);
}

TEST_CASE("grid evaluation skips exact poles") {
    GltiModel osc = to_glti(make_tf(Poly{1.0}, Poly{1.0, 0.0, 1.0}));
    Vec grid(3);
    grid << 0.5, 1.0, 2.0;
    FrequencyResponse fr = freq_response(osc, grid);
    REQUIRE(fr.skipped == std::vector<int>{1});
    CHECK(fr.h[0].size() == 1);
    CHECK(fr.h[1].size() == 0);
    CHECK(std::abs(fr.h[2](0, 0) - 1.0 / (1.0 - 4.0)) < 1e-14);
}

TEST_CASE("bandwidth of a first-order lag matches the closed form") {
    GltiModel p = to_glti(make_tf(Poly{5.6}, Poly{40.2, 1.0}));
    const double want = std::sqrt(std::pow(10.0, 0.3) - 1.0) / 40.2;
    CHECK(bandwidth(p) == doctest::Approx(want).epsilon(2e-6));

    CHECK_THROWS_AS(bandwidth(to_glti(make_tf(Poly{1.0}, Poly{1.0, 0.0}))), NumericalError);
    CHECK_THROWS_AS(bandwidth(to_glti(make_tf(Poly{1.0, 0.0}, Poly{1.0, 1.0}))), NumericalError);
}

TEST_CASE("continued phase of a pure delay never aliases") {
    GltiModel d = to_glti(make_tf(Poly{1.0}, Poly{1.0}, 1.0));
    Vec grid(10);
    for (int i = 0; i < 10; ++i) grid(i) = 0.5 + 59.5 * i / 9.0;  // steps of ~6.6 rad
    Vec phi = continuous_phase(d, grid);
    for (long i = 0; i < grid.size(); ++i) CHECK(std::abs(phi(i) + grid(i)) < 1e-9);
}

TEST_CASE("phase crossing refinement against a transcendental root") {
    // phase of e^{-s}/(s+1) reaches -pi where w + atan(w) = pi
    GltiModel g = to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}, 1.0));
    const double wstar = bisect([](double w) { return w + std::atan(w) - kPi; }, 1.0, 3.0);
    const double phia = -1.5 - std::atan(1.5);
    const double phib = -3.0 - std::atan(3.0);
    const double w = phase_crossing_refine(g, 1.5, phia, 3.0, phib, -kPi);
    CHECK(w == doctest::Approx(wstar).epsilon(1e-8));
}

TEST_CASE("margins of an integrator") {
    MarginReport r = margins(to_glti(make_tf(Poly{1.0}, Poly{1.0, 0.0})));
    REQUIRE(r.phase_margins.size() == 1);
    CHECK(r.phase_margins[0].first == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.phase_margins[0].second == doctest::Approx(90.0).epsilon(1e-8));
    CHECK(r.pm_min == doctest::Approx(90.0).epsilon(1e-8));
    CHECK(r.gain_margins.empty());
    CHECK(std::isinf(r.gm_min));
    CHECK(r.omega_gm == 0.0);
    CHECK(!r.truncated);
}

TEST_CASE("margins of a triple lag") {
    MarginReport r = margins(to_glti(make_tf(Poly{2.0}, Poly{poly_mul(
        poly_mul({1.0, 1.0}, {1.0, 1.0}), {1.0, 1.0})})));
    // phase hits -180 deg at w = sqrt(3), where |H| = 2/8
    REQUIRE(r.gain_margins.size() == 1);
    CHECK(r.gain_margins[0].first == doctest::Approx(std::sqrt(3.0)).epsilon(1e-7));
    CHECK(r.gain_margins[0].second == doctest::Approx(4.0).epsilon(1e-7));
    CHECK(r.gm_min == doctest::Approx(4.0).epsilon(1e-7));
    // |H| = 1 at w = sqrt(2^(2/3) - 1)
    const double wgc = std::sqrt(std::pow(2.0, 2.0 / 3.0) - 1.0);
    const double pm = 180.0 - 3.0 * std::atan(wgc) * 180.0 / kPi;
    REQUIRE(r.phase_margins.size() == 1);
    CHECK(r.phase_margins[0].first == doctest::Approx(wgc).epsilon(1e-7));
    CHECK(r.pm_min == doctest::Approx(pm).epsilon(1e-6));
    CHECK(!r.truncated);

    // doubling the gain halves the gain margin
    MarginReport r2 = margins(to_glti(make_tf(Poly{4.0}, Poly{poly_mul(
        poly_mul({1.0, 1.0}, {1.0, 1.0}), {1.0, 1.0})})));
    CHECK(r2.gm_min == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("margins of a static gain are degenerate") {
    MarginReport r = margins(static_gain(0.5));
    CHECK(r.gain_margins.empty());
    CHECK(r.phase_margins.empty());
    CHECK(std::isinf(r.gm_min));
    CHECK(std::isinf(r.pm_min));
}

TEST_CASE("margins with dead time against transcendental oracles") {
    // e^{-s}/(s+1): |H(0)| = 1 contributes the limit entry (0, 180); the first
    // 180-degree crossing solves w + atan(w) = pi with gm = sqrt(1 + w^2).
    GltiModel g = to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}, 1.0));
    MarginReport r = margins(g);
    REQUIRE(!r.phase_margins.empty());
    CHECK(r.phase_margins[0].first == 0.0);
    CHECK(r.phase_margins[0].second == doctest::Approx(180.0));
    CHECK(r.pm_min == doctest::Approx(180.0));
    const double wpc = bisect([](double w) { return w + std::atan(w) - kPi; }, 1.0, 3.0);
    REQUIRE(!r.gain_margins.empty());
    CHECK(r.gm_min == doctest::Approx(std::sqrt(1.0 + wpc * wpc)).epsilon(1e-6));
    CHECK(r.omega_gm == doctest::Approx(wpc).epsilon(1e-6));
    CHECK(r.gain_margins.size() > 1);  // later crossings stay in the list
    CHECK(r.truncated);

    // 2 e^{-0.1 s}/(s+1): unit gain at sqrt(3)
    GltiModel g2 = to_glti(make_tf(Poly{2.0}, Poly{1.0, 1.0}, 0.1));
    MarginReport r2 = margins(g2);
    const double wgc = std::sqrt(3.0);
    const double pm = 180.0 + (-0.1 * wgc - std::atan(wgc)) * 180.0 / kPi;
    REQUIRE(!r2.phase_margins.empty());
    CHECK(r2.pm_min == doctest::Approx(pm).epsilon(1e-6));
    CHECK(r2.omega_pm == doctest::Approx(wgc).epsilon(1e-6));
    const double wpc2 = bisect([](double w) { return 0.1 * w + std::atan(w) - kPi; }, 1.0, 40.0);
    CHECK(r2.gm_min == doctest::Approx(std::sqrt(1.0 + wpc2 * wpc2) / 2.0).epsilon(1e-6));
}

TEST_CASE("bode table layout and phase continuity") {
    GltiModel p = tank_plant(0);
    BodeTable t = bode_data(p, 200);
    REQUIRE(t.omega.size() == 200);
    REQUIRE(t.mag_db.cols() == 1);
    const double w0 = t.omega(0);
    const double mag0 = 20.0 * std::log10(5.6 / std::hypot(1.0, 40.2 * w0));
    CHECK(t.mag_db(0, 0) == doctest::Approx(mag0).epsilon(1e-10));
    const double ph0 = (-std::atan(40.2 * w0) - 93.9 * w0) * 180.0 / kPi;
    CHECK(t.phase_deg(0, 0) == doctest::Approx(ph0).epsilon(1e-9));
    for (long i = 1; i < t.omega.size(); ++i) {
        CHECK(t.phase_deg(i, 0) < t.phase_deg(i - 1, 0));  // monotone for lag + delay
        const double want =
            (-std::atan(40.2 * t.omega(i)) - 93.9 * t.omega(i)) * 180.0 / kPi;
        CHECK(t.phase_deg(i, 0) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("nyquist table column layout") {
    GltiModel a = to_glti(make_tf(Poly{1.0}, Poly{1.0, 1.0}));
    GltiModel b = to_glti(make_tf(Poly{2.0}, Poly{1.0, 0.5}, 0.4));
    GltiModel m = append(a, b);  // 2x2, off-diagonals zero
    Vec grid(3);
    grid << 0.2, 1.0, 5.0;
    NyquistTable t = nyquist_data(m, grid);
    REQUIRE(t.re.rows() == 3);
    REQUIRE(t.re.cols() == 4);
    for (long r = 0; r < 3; ++r) {
        const CMat h = freq_response_at(m, grid(r));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(t.re(r, i * 2 + j) == doctest::Approx(h(i, j).real()).epsilon(1e-12));
                CHECK(t.im(r, i * 2 + j) == doctest::Approx(h(i, j).imag()).epsilon(1e-12));
            }
    }
}
