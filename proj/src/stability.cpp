#include "tds/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tds/interconnect.hpp"

namespace tds {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

constexpr double kPi = 3.14159265358979323846;

bool near_duplicate(const CVec& kept, long count, Complex s) {
    for (long i = 0; i < count; ++i)
        if (std::abs(kept(i) - s) <= 1e-6 * (1.0 + std::abs(kept(i)))) return true;
    return false;
}

void sort_desc_real(std::vector<Complex>& v) {
    std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

}  // namespace

PadeApprox pade_delay(double tau, int order) {
    require(order >= 1, "Pade order must be at least 1");
    require(std::isfinite(tau) && tau > 0.0, "Pade delay must be positive");
    PadeApprox pa;
    pa.tau = tau;
    pa.order = order;
    pa.num.assign(static_cast<size_t>(order) + 1, 0.0);
    pa.den.assign(static_cast<size_t>(order) + 1, 0.0);
    double p = 1.0;  // p_k = (2n-k)! n! / ((2n)! k! (n-k)!)
    for (int k = 0; k <= order; ++k) {
        pa.num[static_cast<size_t>(order - k)] = p * std::pow(-tau, k);
        pa.den[static_cast<size_t>(order - k)] = p * std::pow(tau, k);
        if (k < order)
            p *= static_cast<double>(order - k) /
                 (static_cast<double>(2 * order - k) * static_cast<double>(k + 1));
    }
    return pa;
}

GltiModel pade_model(const GltiModel& m, int order) {
    require(order >= 1, "Pade order must be at least 1");
    GltiModel g = normalize(m);
    if (!g.has_delays()) return g;
    const int n = g.order();
    const int mi = g.num_inputs();
    const int p = g.num_outputs();
    const int q = g.delay_signal_count();

    // Rational part with the delay taps exposed as externals.
    GltiModel flat;
    flat.a = g.a;
    flat.b1 = Mat(n, mi + q);
    flat.b1 << g.b1, g.b2;
    flat.c1 = Mat(p + q, n);
    flat.c1 << g.c1, g.c2;
    flat.d11 = Mat(p + q, mi + q);
    flat.d11 << g.d11, g.d12, g.d21, g.d22;
    flat.b2 = Mat::Zero(n, 0);
    flat.c2 = Mat::Zero(0, n);
    flat.d12 = Mat::Zero(p + q, 0);
    flat.d21 = Mat::Zero(0, mi + q);
    flat.d22 = Mat::Zero(0, 0);
    flat.tau = Vec::Zero(0);

    // One approximant per delay signal, stacked block-diagonally.
    GltiModel bank;
    bool first = true;
    for (int k = 0; k < g.num_channels(); ++k) {
        PadeApprox pa = pade_delay(g.tau(k), order);
        GltiModel cell = to_glti(make_tf(pa.num, pa.den));
        for (int w = 0; w < g.delay_widths[static_cast<size_t>(k)]; ++w) {
            bank = first ? cell : append(bank, cell);
            first = false;
        }
    }

    GltiModel all = append(flat, bank);
    const int mtot = mi + q + q;  // [u, w, bank in]
    const int ptot = p + q + q;   // [y, z, bank out]
    Mat kmat = Mat::Zero(mtot, ptot);
    kmat.block(mi, p + q, q, q) = Mat::Identity(q, q);  // w   <- bank out
    kmat.block(mi + q, p, q, q) = Mat::Identity(q, q);  // bank in <- z
    Mat e = Mat::Zero(mtot, mi);
    e.topRows(mi) = Mat::Identity(mi, mi);
    Mat f = Mat::Zero(p, ptot);
    f.leftCols(p) = Mat::Identity(p, p);
    GltiModel r = close_interconnection(all, kmat, e, f);
    r.input_names = g.input_names;
    r.output_names = g.output_names;
    return r;
}

SpectrumResult rightmost_roots(const GltiModel& m, int k, double tol) {
    require(k >= 1, "root count must be at least 1");
    require(tol > 0.0, "tolerance must be positive");
    GltiModel g = normalize(m);
    const int n = g.order();
    SpectrumResult res;
    if (n == 0) {
        res.roots = CVec(0);
        res.converged = true;
        return res;
    }
    if (g.d22.size() > 0 && g.d22.cwiseAbs().maxCoeff() != 0.0)
        throw ModelError("delayed feedthrough between delay channels (neutral type) not supported");

    // Per-channel state-coupling A_k = B2_k C2_k; taps through inputs or
    // outputs do not feed the free dynamics.
    std::vector<Mat> ak;
    std::vector<double> taus;
    {
        int off = 0;
        for (int c = 0; c < g.num_channels(); ++c) {
            const int w = g.delay_widths[static_cast<size_t>(c)];
            Mat a = g.b2.middleCols(off, w) * g.c2.middleRows(off, w);
            off += w;
            if (a.cwiseAbs().maxCoeff() != 0.0) {
                ak.push_back(std::move(a));
                taus.push_back(g.tau(c));
            }
        }
    }
    if (ak.empty()) {
        Eigen::EigenSolver<Mat> es(g.a);
        std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
        sort_desc_real(ev);
        const long keep = std::min<long>(k, static_cast<long>(ev.size()));
        res.roots = Eigen::Map<CVec>(ev.data(), keep);
        res.converged = true;
        return res;
    }

    const double taumax = *std::max_element(taus.begin(), taus.end());
    const auto nterm = static_cast<size_t>(ak.size());

    // Exact characteristic matrix and its derivative for Newton polishing.
    auto newton = [&](Complex s, double& resid) -> Complex {
        for (int it = 0; it < 60; ++it) {
            if (std::abs(s) > 1e10) break;
            bool overflow = false;
            CMat delta = -g.a.cast<Complex>();
            delta.diagonal().array() += s;
            CMat dd = CMat::Identity(n, n);
            for (size_t j = 0; j < nterm; ++j) {
                if (-taus[j] * s.real() > 500.0) {
                    overflow = true;
                    break;
                }
                const Complex ex = std::exp(-taus[j] * s);
                delta -= ak[j].cast<Complex>() * ex;
                dd += taus[j] * ak[j].cast<Complex>() * ex;
            }
            if (overflow) break;
            Eigen::FullPivLU<CMat> lu(delta);
            if (!lu.isInvertible()) {
                resid = 0.0;
                return s;
            }
            const Complex tr = lu.solve(dd).trace();
            const Complex step = -1.0 / tr;
            s += step;
            resid = std::abs(step);
            if (resid <= 1e-12 * (1.0 + std::abs(s))) return s;
        }
        resid = std::numeric_limits<double>::infinity();
        return s;
    };

    double prev_rightmost = std::numeric_limits<double>::quiet_NaN();
    std::vector<Complex> kept_roots;
    std::vector<double> kept_resid;
    for (int n_cheb : {16, 32, 64, 128, 256}) {
        const int nodes = n_cheb;
        const int mdeg = nodes - 1;
        // Chebyshev-Gauss-Lobatto differentiation matrix on [-1, 1].
        Vec x(nodes), cw(nodes);
        for (int i = 0; i < nodes; ++i) {
            x(i) = std::cos(kPi * i / mdeg);
            cw(i) = (i == 0 || i == mdeg) ? 2.0 : 1.0;
            if (i % 2 == 1) cw(i) = -cw(i);
        }
        Mat d(nodes, nodes);
        for (int i = 0; i < nodes; ++i) {
            double rowsum = 0.0;
            for (int j = 0; j < nodes; ++j) {
                if (i == j) continue;
                d(i, j) = (cw(i) / cw(j)) / (x(i) - x(j));
                rowsum += d(i, j);
            }
            d(i, i) = -rowsum;
        }
        d *= 2.0 / taumax;  // theta = (x - 1) * taumax / 2

        // Generator: derivative rows everywhere except the theta = 0 node,
        // which carries the delay-differential splice.
        Mat gen = Mat::Zero(n * nodes, n * nodes);
        for (int i = 1; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j)
                gen.block(i * n, j * n, n, n) = d(i, j) * Mat::Identity(n, n);
        gen.block(0, 0, n, n) = g.a;
        for (size_t t = 0; t < nterm; ++t) {
            // Barycentric interpolation weights at theta = -tau_t.
            const double xq = 1.0 - 2.0 * taus[t] / taumax;
            int exact = -1;
            for (int j = 0; j < nodes; ++j)
                if (xq == x(j)) exact = j;
            if (exact >= 0) {
                gen.block(0, exact * n, n, n) += ak[t];
                continue;
            }
            Vec l(nodes);
            double denom = 0.0;
            for (int j = 0; j < nodes; ++j) {
                l(j) = cw(j) / (xq - x(j));
                denom += l(j);
            }
            l /= denom;
            for (int j = 0; j < nodes; ++j)
                if (l(j) != 0.0) gen.block(0, j * n, n, n) += l(j) * ak[t];
        }

        Eigen::EigenSolver<Mat> es(gen);
        std::vector<Complex> cand(es.eigenvalues().data(), es.eigenvalues().data() + gen.rows());
        sort_desc_real(cand);

        kept_roots.clear();
        kept_resid.clear();
        CVec dedupe(2 * k + 8);
        long ndedupe = 0;
        const size_t max_cand = static_cast<size_t>(2 * k + 8);
        for (const Complex& c : cand) {
            if (kept_roots.size() >= max_cand) break;
            if (std::abs(c) > 1e8 || -c.real() * taumax > 500.0) continue;
            double resid = std::numeric_limits<double>::infinity();
            const Complex s = newton(c, resid);
            if (!(resid < 1e-8 * (1.0 + std::abs(s)))) continue;
            if (near_duplicate(dedupe, ndedupe, s)) continue;
            dedupe(ndedupe++) = s;
            kept_roots.push_back(s);
            kept_resid.push_back(resid);
        }
        res.n_cheb = nodes;
        if (kept_roots.empty()) continue;

        double rightmost = -std::numeric_limits<double>::infinity();
        for (const Complex& s : kept_roots) rightmost = std::max(rightmost, s.real());
        if (std::isfinite(prev_rightmost) && std::abs(rightmost - prev_rightmost) < tol) {
            res.converged = true;
            break;
        }
        prev_rightmost = rightmost;
    }

    std::vector<size_t> order(kept_roots.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (kept_roots[a].real() != kept_roots[b].real())
            return kept_roots[a].real() > kept_roots[b].real();
        return kept_roots[a].imag() > kept_roots[b].imag();
    });
    const long keep = std::min<long>(k, static_cast<long>(order.size()));
    res.roots = CVec(keep);
    res.max_residual = 0.0;
    for (long i = 0; i < keep; ++i) {
        Complex s = kept_roots[order[static_cast<size_t>(i)]];
        if (std::abs(s.imag()) <= 1e-9 * (1.0 + std::abs(s.real()))) s = Complex(s.real(), 0.0);
        res.roots(i) = s;
        res.max_residual = std::max(res.max_residual, kept_resid[order[static_cast<size_t>(i)]]);
    }
    return res;
}

Stability is_stable(const GltiModel& m) {
    SpectrumResult r = rightmost_roots(m, 5, 1e-8);
    if (!r.converged) return Stability::kUndecided;
    if (r.roots.size() == 0) return Stability::kStable;
    const double re = r.roots(0).real();
    if (re < -1e-8) return Stability::kStable;
    if (re > 1e-8) return Stability::kUnstable;
    return Stability::kUndecided;
}

}  // namespace tds
