#include "tds/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace tds {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail_at(const char* what, Complex s) {
    std::ostringstream os;
    os << what << " at s = " << s.real() << (s.imag() < 0 ? " - " : " + ")
       << std::abs(s.imag()) << "j";
    throw NumericalError(os.str());
}

// Rational equivalent with the delay loop closed at Theta = I (s = 0).
struct FoldedDc {
    Mat a, b, c, d;
};

FoldedDc fold_dc(const GltiModel& m) {
    const int n = m.order();
    const int mi = m.num_inputs();
    const int q = m.delay_signal_count();
    if (q == 0) return {m.a, m.b1, m.c1, m.d11};
    Eigen::FullPivLU<Mat> lu(Mat::Identity(q, q) - m.d22);
    if (!lu.isInvertible())
        throw NumericalError("ill-posed model: singular delay algebraic loop at s = 0");
    Mat rhs(q, n + mi);
    rhs << m.c2, m.d21;
    Mat w = lu.solve(rhs);
    return {m.a + m.b2 * w.leftCols(n), m.b1 + m.b2 * w.rightCols(mi),
            m.c1 + m.d12 * w.leftCols(n), m.d11 + m.d12 * w.rightCols(mi)};
}

// Assumes a normalized model (all delays positive).
CMat eval_normalized(const GltiModel& m, Complex s) {
    if (s == Complex(0.0, 0.0)) {
        FoldedDc f = fold_dc(m);
        if (f.a.rows() == 0) return f.d.cast<Complex>();
        Eigen::FullPivLU<Mat> lu(f.a);
        if (!lu.isInvertible()) fail_at("pole (integrator)", s);
        return (f.d - f.c * lu.solve(f.b)).cast<Complex>();
    }
    const int n = m.order();
    const int mi = m.num_inputs();
    const int q = m.delay_signal_count();
    CMat g11, g12, g21, g22;
    if (n > 0) {
        CMat res = -m.a.cast<Complex>();
        res.diagonal().array() += s;
        Eigen::FullPivLU<CMat> lu(res);
        if (!lu.isInvertible()) fail_at("pole of the rational part", s);
        CMat rhs(n, mi + q);
        rhs << m.b1.cast<Complex>(), m.b2.cast<Complex>();
        CMat x = lu.solve(rhs);
        g11 = m.d11.cast<Complex>() + m.c1.cast<Complex>() * x.leftCols(mi);
        g12 = m.d12.cast<Complex>() + m.c1.cast<Complex>() * x.rightCols(q);
        g21 = m.d21.cast<Complex>() + m.c2.cast<Complex>() * x.leftCols(mi);
        g22 = m.d22.cast<Complex>() + m.c2.cast<Complex>() * x.rightCols(q);
    } else {
        g11 = m.d11.cast<Complex>();
        g12 = m.d12.cast<Complex>();
        g21 = m.d21.cast<Complex>();
        g22 = m.d22.cast<Complex>();
    }
    if (q == 0) return g11;
    CVec th = delay_diag(m, s);
    return lft_eval(g11, g12, g21, g22, CMat(th.asDiagonal()));
}

using ScalarEval = std::function<Complex(double)>;

// Width cap for one accepted phase step: the delay contribution to the phase
// slope is bounded by the sum of the delays, so intervals no wider than
// pi / (2 sum tau) cannot hide a full turn of delay phase.
double max_phase_dw(const GltiModel& m) {
    const double tsum = m.tau.size() > 0 ? m.tau.sum() : 0.0;
    return tsum > 0.0 ? kPi / (2.0 * tsum) : kInf;
}

// Phase increment from wa to wb, subdividing until the interval is narrower
// than max_dw and its principal-argument step stays below pi/2, so neither
// delay phase nor a sharp resonance can alias.
double phase_step(const ScalarEval& h, double wa, Complex ha, double wb, Complex hb,
                  double max_dw, int depth) {
    const double d = std::arg(hb / ha);
    if ((std::abs(d) <= kPi / 2 && wb - wa <= max_dw) || depth >= 48 || wb - wa <= 1e-14 * wb)
        return d;
    const double wm = std::sqrt(wa * wb);
    if (!(wm > wa && wm < wb)) return d;
    const Complex hm = h(wm);
    return phase_step(h, wa, ha, wm, hm, max_dw, depth + 1) +
           phase_step(h, wm, hm, wb, hb, max_dw, depth + 1);
}

double wrap180(double deg) {
    double w = std::remainder(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    return w;
}

void check_grid(const Vec& grid) {
    if (grid.size() < 1) throw ModelError("frequency grid must be nonempty");
    for (long i = 0; i < grid.size(); ++i)
        if (!(grid(i) > 0.0) || !std::isfinite(grid(i)))
            throw ModelError("frequency grid must be positive and finite");
    for (long i = 1; i < grid.size(); ++i)
        if (!(grid(i) > grid(i - 1))) throw ModelError("frequency grid must be strictly ascending");
}

}  // namespace

CMat response_at(const GltiModel& m, Complex s) { return eval_normalized(normalize(m), s); }

CMat freq_response_at(const GltiModel& m, double omega) {
    return response_at(m, Complex(0.0, omega));
}

FrequencyResponse freq_response(const GltiModel& m, const Vec& grid) {
    check_grid(grid);
    GltiModel mn = normalize(m);
    FrequencyResponse fr;
    fr.omega = grid;
    fr.h.resize(static_cast<size_t>(grid.size()));
    for (long i = 0; i < grid.size(); ++i) {
        try {
            fr.h[static_cast<size_t>(i)] = eval_normalized(mn, Complex(0.0, grid(i)));
        } catch (const NumericalError&) {
            fr.skipped.push_back(static_cast<int>(i));
        }
    }
    return fr;
}

Vec auto_grid(const GltiModel& m, int n_points) {
    if (n_points < 2) throw ModelError("auto_grid needs at least 2 points");
    GltiModel mn = normalize(m);
    const int n = mn.order();
    const int mi = mn.num_inputs();
    const int p = mn.num_outputs();

    std::vector<double> feats;
    if (n > 0) {
        Eigen::EigenSolver<Mat> es(mn.a, false);
        for (long i = 0; i < n; ++i) {
            const double v = std::abs(es.eigenvalues()(i));
            if (v > 1e-12) feats.push_back(v);
        }
    }
    if (n > 0 && mi == p && n + mi <= 60) {
        // Invariant zeros of the rational part via the system pencil.
        Mat ap(n + mi, n + mi), bp = Mat::Zero(n + mi, n + mi);
        ap << mn.a, mn.b1, mn.c1, mn.d11;
        bp.topLeftCorner(n, n) = Mat::Identity(n, n);
        Eigen::GeneralizedEigenSolver<Mat> ges(ap, bp, true);
        for (long i = 0; i < ges.alphas().size(); ++i) {
            const Complex alpha = ges.alphas()(i);
            const double beta = ges.betas()(i);
            if (std::abs(beta) < 1e-10 * std::max(1.0, std::abs(alpha))) continue;
            const double v = std::abs(alpha / beta);
            if (v > 1e-12 && v < 1e12) feats.push_back(v);
        }
    }
    std::vector<double> wdelay;
    for (long k = 0; k < mn.tau.size(); ++k) {
        wdelay.push_back(2.0 * kPi / mn.tau(k));
        feats.push_back(wdelay.back());
    }

    double lo = 1e-2, hi = 1e2;
    if (!feats.empty()) {
        lo = 0.01 * *std::min_element(feats.begin(), feats.end());
        hi = 100.0 * *std::max_element(feats.begin(), feats.end());
    }
    if (hi <= lo * 1.000001) {
        lo /= 10.0;
        hi *= 10.0;
    }

    std::vector<double> pts;
    const int n_cluster = static_cast<int>(wdelay.size()) * 5;
    const int n_base = (n_points - n_cluster >= 10) ? n_points - n_cluster : n_points;
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < n_base; ++i)
        pts.push_back(std::pow(10.0, llo + (lhi - llo) * i / (n_base - 1)));
    if (n_base < n_points) {
        for (double wd : wdelay)
            for (int i = 0; i < 5; ++i) {
                const double w = wd * std::pow(10.0, -0.1 + 0.05 * i);
                if (w > lo && w < hi) pts.push_back(w);
            }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return b - a <= 1e-12 * b; }),
              pts.end());

    while (static_cast<int>(pts.size()) > n_points) {
        size_t drop = 1;
        double best = kInf;
        for (size_t i = 1; i + 1 < pts.size(); ++i) {
            const double gap = std::log(pts[i] / pts[i - 1]);
            if (gap < best) {
                best = gap;
                drop = i;
            }
        }
        pts.erase(pts.begin() + static_cast<long>(drop));
    }
    while (static_cast<int>(pts.size()) < n_points) {
        size_t at = 0;
        double best = -kInf;
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const double gap = std::log(pts[i + 1] / pts[i]);
            if (gap > best) {
                best = gap;
                at = i;
            }
        }
        pts.insert(pts.begin() + static_cast<long>(at) + 1, std::sqrt(pts[at] * pts[at + 1]));
    }
    return Eigen::Map<Vec>(pts.data(), static_cast<long>(pts.size()));
}

DcGain dcgain(const GltiModel& m) {
    GltiModel mn = normalize(m);
    FoldedDc f = fold_dc(mn);
    DcGain g;
    if (f.a.rows() == 0) {
        g.value = f.d;
        return g;
    }
    Eigen::FullPivLU<Mat> lu(f.a);
    if (!lu.isInvertible()) {
        g.value = Mat::Constant(mn.num_outputs(), mn.num_inputs(), kInf);
        g.integrator = true;
        return g;
    }
    g.value = f.d - f.c * lu.solve(f.b);
    return g;
}

double bandwidth(const GltiModel& m) {
    GltiModel mn = normalize(m);
    if (!mn.is_siso()) throw ModelError("bandwidth is defined for SISO models only");
    DcGain dc = dcgain(mn);
    if (dc.integrator) throw NumericalError("bandwidth undefined: infinite DC gain (integrator)");
    const double h0 = std::abs(dc.value(0, 0));
    if (h0 == 0.0) throw NumericalError("bandwidth undefined: zero DC gain");
    const double target = h0 * std::pow(10.0, -3.0 / 20.0);

    auto mag = [&](double w) { return std::abs(eval_normalized(mn, Complex(0.0, w))(0, 0)); };
    Vec grid = auto_grid(mn, 500);
    double wlo = 0.0, whi = 0.0;
    for (long i = 0; i < grid.size(); ++i) {
        double v;
        try {
            v = mag(grid(i));
        } catch (const NumericalError&) {
            continue;
        }
        if (v < target) {
            whi = grid(i);
            wlo = (i == 0) ? grid(0) * 1e-3 : grid(i - 1);
            break;
        }
    }
    if (whi == 0.0) {
        std::ostringstream os;
        os << "no -3 dB crossing in [" << grid(0) << ", " << grid(grid.size() - 1) << "]";
        throw NumericalError(os.str());
    }
    while (mag(wlo) < target) {
        wlo *= 0.1;
        if (wlo < 1e-15 * whi) throw NumericalError("no -3 dB crossing: gain below target everywhere");
    }
    for (int it = 0; it < 100 && whi - wlo > 1e-6 * whi; ++it) {
        const double wm = std::sqrt(wlo * whi);
        (mag(wm) >= target ? wlo : whi) = wm;
    }
    return 0.5 * (wlo + whi);
}

Vec continuous_phase(const GltiModel& m, const Vec& grid) {
    check_grid(grid);
    GltiModel mn = normalize(m);
    if (!mn.is_siso()) throw ModelError("continuous_phase is defined for SISO models only");
    ScalarEval h = [&](double w) { return eval_normalized(mn, Complex(0.0, w))(0, 0); };
    const double dw = max_phase_dw(mn);
    Vec phi(grid.size());
    Complex prev = h(grid(0));
    if (prev == Complex(0.0, 0.0)) throw NumericalError("zero response: phase undefined");
    phi(0) = std::arg(prev);
    for (long i = 1; i < grid.size(); ++i) {
        const Complex cur = h(grid(i));
        if (cur == Complex(0.0, 0.0)) throw NumericalError("zero response: phase undefined");
        phi(i) = phi(i - 1) + phase_step(h, grid(i - 1), prev, grid(i), cur, dw, 0);
        prev = cur;
    }
    return phi;
}

double phase_crossing_refine(const GltiModel& m, double wa, double phia, double wb, double phib,
                             double level_rad) {
    GltiModel mn = normalize(m);
    if (!mn.is_siso()) throw ModelError("phase refinement is defined for SISO models only");
    ScalarEval h = [&](double w) { return eval_normalized(mn, Complex(0.0, w))(0, 0); };
    const double dw = max_phase_dw(mn);
    Complex ha = h(wa), hb = h(wb);
    if ((phia - level_rad) * (phib - level_rad) > 0.0)
        throw NumericalError("phase crossing not bracketed");
    for (int it = 0; it < 100 && wb - wa > 1e-9 * wb; ++it) {
        const double wm = std::sqrt(wa * wb);
        const Complex hm = h(wm);
        const double phim = phia + phase_step(h, wa, ha, wm, hm, dw, 0);
        if ((phia - level_rad) * (phim - level_rad) <= 0.0) {
            wb = wm;
            phib = phim;
            hb = hm;
        } else {
            wa = wm;
            phia = phim;
            ha = hm;
        }
    }
    return std::sqrt(wa * wb);
}

MarginReport margins(const GltiModel& m) {
    GltiModel mn = normalize(m);
    if (!mn.is_siso()) throw ModelError("margins are defined for SISO models only");
    ScalarEval h = [&](double w) { return eval_normalized(mn, Complex(0.0, w))(0, 0); };
    const double dw = max_phase_dw(mn);

    const Vec grid = auto_grid(mn, 500);
    const long ng = grid.size();
    std::vector<Complex> hv(static_cast<size_t>(ng));
    for (long i = 0; i < ng; ++i) hv[static_cast<size_t>(i)] = h(grid(i));
    Vec phi(ng);
    phi(0) = std::arg(hv[0]);
    for (long i = 1; i < ng; ++i)
        phi(i) = phi(i - 1) + phase_step(h, grid(i - 1), hv[static_cast<size_t>(i - 1)], grid(i),
                                         hv[static_cast<size_t>(i)], dw, 0);

    MarginReport rep;
    rep.search_band = {grid(0), grid(ng - 1)};
    rep.truncated = mn.has_delays();

    // Unit-gain crossings -> phase margins.
    DcGain dc = dcgain(mn);
    if (!dc.integrator && std::abs(std::abs(dc.value(0, 0)) - 1.0) <= 1e-6) {
        const double phase0 = dc.value(0, 0) >= 0.0 ? 0.0 : -180.0;
        rep.phase_margins.emplace_back(0.0, wrap180(180.0 + phase0));
    }
    auto refine_gain = [&](double wa, double wb) {
        for (int it = 0; it < 100 && wb - wa > 1e-9 * wb; ++it) {
            const double wm = std::sqrt(wa * wb);
            if ((std::abs(h(wa)) - 1.0) * (std::abs(h(wm)) - 1.0) <= 0.0)
                wb = wm;
            else
                wa = wm;
        }
        return std::sqrt(wa * wb);
    };
    for (long i = 0; i < ng; ++i) {
        const double fi = std::abs(hv[static_cast<size_t>(i)]) - 1.0;
        if (fi == 0.0) {
            if (i == 0 || std::abs(hv[static_cast<size_t>(i - 1)]) - 1.0 != 0.0) {
                const double pdeg = phi(i) * 180.0 / kPi;
                rep.phase_margins.emplace_back(grid(i), wrap180(180.0 + pdeg));
            }
            continue;
        }
        if (i + 1 < ng) {
            const double fj = std::abs(hv[static_cast<size_t>(i + 1)]) - 1.0;
            if (fi * fj < 0.0) {
                const double wgc = refine_gain(grid(i), grid(i + 1));
                const Complex hc = h(wgc);
                const double pc =
                    phi(i) + phase_step(h, grid(i), hv[static_cast<size_t>(i)], wgc, hc, dw, 0);
                rep.phase_margins.emplace_back(wgc, wrap180(180.0 + pc * 180.0 / kPi));
            }
        }
    }

    // 180-degree crossings -> gain margins.
    const Vec phideg = phi * (180.0 / kPi);
    const double pmin = phideg.minCoeff(), pmax = phideg.maxCoeff();
    const long k_lo = static_cast<long>(std::ceil((pmin - 180.0) / 360.0));
    const long k_hi = static_cast<long>(std::floor((pmax - 180.0) / 360.0));
    for (long k = k_lo; k <= k_hi; ++k) {
        const double level = (180.0 + 360.0 * static_cast<double>(k)) * kPi / 180.0;
        for (long i = 0; i + 1 < ng; ++i) {
            const double fa = phi(i) - level, fb = phi(i + 1) - level;
            if (fa == 0.0) {
                if (i == 0 || phi(i - 1) - level != 0.0)
                    rep.gain_margins.emplace_back(grid(i), 1.0 / std::abs(hv[static_cast<size_t>(i)]));
                continue;
            }
            if (fa * fb < 0.0) {
                double wa = grid(i), wb = grid(i + 1);
                double phia = phi(i), phib = phi(i + 1);
                Complex ha = hv[static_cast<size_t>(i)], hb = hv[static_cast<size_t>(i + 1)];
                for (int it = 0; it < 100 && wb - wa > 1e-9 * wb; ++it) {
                    const double wm = std::sqrt(wa * wb);
                    const Complex hm = h(wm);
                    const double phim = phia + phase_step(h, wa, ha, wm, hm, dw, 0);
                    if ((phia - level) * (phim - level) <= 0.0) {
                        wb = wm;
                        phib = phim;
                        hb = hm;
                    } else {
                        wa = wm;
                        phia = phim;
                        ha = hm;
                    }
                }
                const double wpc = std::sqrt(wa * wb);
                rep.gain_margins.emplace_back(wpc, 1.0 / std::abs(h(wpc)));
            }
        }
    }
    std::sort(rep.gain_margins.begin(), rep.gain_margins.end());

    rep.gm_min = kInf;
    rep.omega_gm = 0.0;
    for (const auto& [w, gm] : rep.gain_margins) {
        if (!(gm > 0.0) || !std::isfinite(gm)) continue;
        if (!std::isfinite(rep.gm_min) || std::abs(std::log(gm)) < std::abs(std::log(rep.gm_min))) {
            rep.gm_min = gm;
            rep.omega_gm = w;
        }
    }
    rep.pm_min = kInf;
    rep.omega_pm = 0.0;
    for (const auto& [w, pm] : rep.phase_margins) {
        if (!std::isfinite(rep.pm_min) || std::abs(pm) < std::abs(rep.pm_min)) {
            rep.pm_min = pm;
            rep.omega_pm = w;
        }
    }
    return rep;
}

BodeTable bode_data(const GltiModel& m, int n_points) {
    return bode_data(m, auto_grid(m, n_points));
}

BodeTable bode_data(const GltiModel& m, const Vec& grid) {
    GltiModel mn = normalize(m);
    FrequencyResponse fr = freq_response(mn, grid);
    const int p = mn.num_outputs(), mi = mn.num_inputs();
    std::vector<long> kept;
    for (long i = 0; i < grid.size(); ++i)
        if (fr.h[static_cast<size_t>(i)].size() > 0) kept.push_back(i);
    BodeTable t;
    t.omega = Vec(static_cast<long>(kept.size()));
    t.mag_db = Mat(static_cast<long>(kept.size()), p * mi);
    t.phase_deg = Mat(static_cast<long>(kept.size()), p * mi);
    for (size_t r = 0; r < kept.size(); ++r) t.omega(static_cast<long>(r)) = grid(kept[r]);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < mi; ++j) {
            const int col = i * mi + j;
            ScalarEval h = [&](double w) { return eval_normalized(mn, Complex(0.0, w))(i, j); };
            double phase = 0.0;
            Complex prev(0.0, 0.0);
            double wprev = 0.0;
            bool seeded = false;
            for (size_t r = 0; r < kept.size(); ++r) {
                const Complex v = fr.h[static_cast<size_t>(kept[r])](i, j);
                t.mag_db(static_cast<long>(r), col) = 20.0 * std::log10(std::abs(v));
                if (v == Complex(0.0, 0.0)) {
                    t.phase_deg(static_cast<long>(r), col) = seeded ? phase * 180.0 / kPi : 0.0;
                    continue;
                }
                if (!seeded) {
                    phase = std::arg(v);
                    seeded = true;
                } else {
                    phase += phase_step(h, wprev, prev, t.omega(static_cast<long>(r)), v,
                                        max_phase_dw(mn), 0);
                }
                t.phase_deg(static_cast<long>(r), col) = phase * 180.0 / kPi;
                prev = v;
                wprev = t.omega(static_cast<long>(r));
            }
        }
    }
    return t;
}

NyquistTable nyquist_data(const GltiModel& m, int n_points) {
    return nyquist_data(m, auto_grid(m, n_points));
}

NyquistTable nyquist_data(const GltiModel& m, const Vec& grid) {
    GltiModel mn = normalize(m);
    FrequencyResponse fr = freq_response(mn, grid);
    const int p = mn.num_outputs(), mi = mn.num_inputs();
    std::vector<long> kept;
    for (long i = 0; i < grid.size(); ++i)
        if (fr.h[static_cast<size_t>(i)].size() > 0) kept.push_back(i);
    NyquistTable t;
    t.omega = Vec(static_cast<long>(kept.size()));
    t.re = Mat(static_cast<long>(kept.size()), p * mi);
    t.im = Mat(static_cast<long>(kept.size()), p * mi);
    for (size_t r = 0; r < kept.size(); ++r) {
        t.omega(static_cast<long>(r)) = grid(kept[r]);
        const CMat& v = fr.h[static_cast<size_t>(kept[r])];
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < mi; ++j) {
                t.re(static_cast<long>(r), i * mi + j) = v(i, j).real();
                t.im(static_cast<long>(r), i * mi + j) = v(i, j).imag();
            }
    }
    return t;
}

}  // namespace tds
