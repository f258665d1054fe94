#include "tds/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace tds {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

std::string shape(const Mat& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void check_block(const Mat& m, int rows, int cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << ": expected " << rows << "x" << cols << ", got " << shape(m);
        throw ModelError(os.str());
    }
}

// First delay-signal index of each channel.
std::vector<int> channel_offsets(const std::vector<int>& widths) {
    std::vector<int> off(widths.size() + 1, 0);
    for (size_t k = 0; k < widths.size(); ++k) off[k + 1] = off[k] + widths[k];
    return off;
}

}  // namespace

Poly poly_trim(const Poly& p) {
    size_t i = 0;
    while (i < p.size() && p[i] == 0.0) ++i;
    return Poly(p.begin() + static_cast<long>(i), p.end());
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

Complex poly_eval(const Poly& p, Complex s) {
    Complex v = 0.0;
    for (double c : p) v = v * s + c;
    return v;
}

void validate(const GltiModel& m) {
    const int n = static_cast<int>(m.a.rows());
    const int mi = static_cast<int>(m.b1.cols());
    const int p = static_cast<int>(m.c1.rows());
    const int q = static_cast<int>(m.b2.cols());
    require(m.a.cols() == n, "a must be square, got " + shape(m.a));
    check_block(m.b1, n, mi, "b1");
    check_block(m.b2, n, q, "b2");
    check_block(m.c1, p, n, "c1");
    check_block(m.d11, p, mi, "d11");
    check_block(m.d12, p, q, "d12");
    check_block(m.c2, q, n, "c2");
    check_block(m.d21, q, mi, "d21");
    check_block(m.d22, q, q, "d22");
    require(static_cast<int>(m.tau.size()) == static_cast<int>(m.delay_widths.size()),
            "tau and delay_widths must have the same length");
    int total = 0;
    for (size_t k = 0; k < m.delay_widths.size(); ++k) {
        require(m.delay_widths[k] >= 1, "delay_widths entries must be positive");
        require(std::isfinite(m.tau[static_cast<long>(k)]) && m.tau[static_cast<long>(k)] >= 0.0,
                "delays must be finite and nonnegative");
        total += m.delay_widths[k];
    }
    require(total == q, "sum of delay_widths must equal the delay signal count");
    require(m.input_names.empty() || static_cast<int>(m.input_names.size()) == mi,
            "input_names must be empty or one per input");
    require(m.output_names.empty() || static_cast<int>(m.output_names.size()) == p,
            "output_names must be empty or one per output");
}

GltiModel make_ss(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
    GltiModel m;
    const int n = static_cast<int>(a.rows());
    const int mi = static_cast<int>(b.cols());
    const int p = static_cast<int>(c.rows());
    m.a = a;
    m.b1 = b;
    m.c1 = c;
    m.d11 = d;
    m.b2 = Mat::Zero(n, 0);
    m.c2 = Mat::Zero(0, n);
    m.d12 = Mat::Zero(p, 0);
    m.d21 = Mat::Zero(0, mi);
    m.d22 = Mat::Zero(0, 0);
    m.tau = Vec::Zero(0);
    validate(m);
    return m;
}

GltiModel static_gain(const Mat& k) {
    return make_ss(Mat::Zero(0, 0), Mat::Zero(0, k.cols()), Mat::Zero(k.rows(), 0), k);
}

GltiModel static_gain(double k) { return static_gain(Mat::Constant(1, 1, k)); }

GltiModel identity_gain(int size) { return static_gain(Mat::Identity(size, size)); }

TransferFunction make_tf(Poly num, Poly den, double io_delay) {
    return make_tf({{std::move(num)}}, {{std::move(den)}}, Mat::Constant(1, 1, io_delay));
}

TransferFunction make_tf(std::vector<std::vector<Poly>> num, std::vector<std::vector<Poly>> den,
                         Mat io_delay, Vec input_delay, Vec output_delay) {
    TransferFunction tf;
    const int p = static_cast<int>(num.size());
    require(p > 0 && !num[0].empty(), "transfer matrix must be nonempty");
    const int mi = static_cast<int>(num[0].size());
    require(static_cast<int>(den.size()) == p, "num and den must have the same number of rows");
    for (int i = 0; i < p; ++i) {
        require(static_cast<int>(num[i].size()) == mi && static_cast<int>(den[i].size()) == mi,
                "all rows of num and den must have the same length");
        for (int j = 0; j < mi; ++j) {
            den[i][j] = poly_trim(den[i][j]);
            num[i][j] = poly_trim(num[i][j]);
            if (den[i][j].empty()) {
                std::ostringstream os;
                os << "zero denominator in channel (" << i << "," << j << ")";
                throw ModelError(os.str());
            }
        }
    }
    if (io_delay.size() == 0) io_delay = Mat::Zero(p, mi);
    if (input_delay.size() == 0) input_delay = Vec::Zero(mi);
    if (output_delay.size() == 0) output_delay = Vec::Zero(p);
    check_block(io_delay, p, mi, "io_delay");
    require(static_cast<int>(input_delay.size()) == mi, "input_delay must have one entry per input");
    require(static_cast<int>(output_delay.size()) == p, "output_delay must have one entry per output");
    auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    require(io_delay.unaryExpr([&](double v) { return nonneg(v) ? 0.0 : 1.0; }).sum() == 0.0 &&
                input_delay.unaryExpr([&](double v) { return nonneg(v) ? 0.0 : 1.0; }).sum() == 0.0 &&
                output_delay.unaryExpr([&](double v) { return nonneg(v) ? 0.0 : 1.0; }).sum() == 0.0,
            "delays must be finite and nonnegative");
    tf.num = std::move(num);
    tf.den = std::move(den);
    tf.io_delay = std::move(io_delay);
    tf.input_delay = std::move(input_delay);
    tf.output_delay = std::move(output_delay);
    return tf;
}

GltiModel to_glti(const TransferFunction& tf) {
    const int p = tf.num_outputs();
    const int mi = tf.num_inputs();
    require(p > 0 && mi > 0, "transfer matrix must be nonempty");

    for (int i = 0; i < p; ++i)
        for (int j = 0; j < mi; ++j)
            if (tf.num[i][j].size() > tf.den[i][j].size()) {
                std::ostringstream os;
                os << "improper channel (" << i << "," << j << "): deg num > deg den";
                throw ModelError(os.str());
            }

    // Realize column by column: states of column j realize every dynamic
    // channel of that column over the product of their denominators.
    std::vector<int> nu(mi, 0);  // states per column
    std::vector<Poly> dmon(mi);  // monic column denominator
    std::vector<double> dlead(mi, 1.0);
    for (int j = 0; j < mi; ++j) {
        Poly d = {1.0};
        for (int i = 0; i < p; ++i)
            if (tf.den[i][j].size() > 1) d = poly_mul(d, tf.den[i][j]);
        dlead[j] = d[0];
        for (double& c : d) c /= dlead[j];
        dmon[j] = d;
        nu[j] = static_cast<int>(d.size()) - 1;
    }
    const int n = std::accumulate(nu.begin(), nu.end(), 0);
    std::vector<int> xoff(mi + 1, 0);
    for (int j = 0; j < mi; ++j) xoff[j + 1] = xoff[j] + nu[j];

    GltiModel g;
    g.a = Mat::Zero(n, n);
    g.b1 = Mat::Zero(n, mi);
    for (int j = 0; j < mi; ++j) {
        if (nu[j] == 0) continue;
        const int o = xoff[j];
        for (int r = 0; r < nu[j]; ++r) g.a(o, o + r) = -dmon[j][static_cast<size_t>(r) + 1];
        for (int r = 1; r < nu[j]; ++r) g.a(o + r, o + r - 1) = 1.0;
        g.b1(o, j) = 1.0;
    }

    // Per-channel numerator over the column denominator, split into direct
    // feedthrough e and the strictly proper residue row c.
    struct PendingDelay {
        int out, in;
        double tau;
        Vec c_row;  // over all n states
        double e;
    };
    std::vector<PendingDelay> delayed;
    g.c1 = Mat::Zero(p, n);
    g.d11 = Mat::Zero(p, mi);
    for (int j = 0; j < mi; ++j) {
        for (int i = 0; i < p; ++i) {
            const Poly& nij = tf.num[i][j];
            const Poly& dij = tf.den[i][j];
            double e = 0.0;
            Vec crow = Vec::Zero(n);
            if (nij.empty()) {
                // zero channel
            } else if (dij.size() == 1 && nu[j] == 0) {
                e = nij[0] / dij[0];
            } else {
                Poly numx;
                if (dij.size() == 1) {
                    numx = nij;
                    for (double& c : numx) c /= dij[0];
                    numx = poly_mul(numx, dmon[j]);
                } else {
                    numx = nij;
                    for (int k = 0; k < p; ++k)
                        if (k != i && tf.den[k][j].size() > 1) numx = poly_mul(numx, tf.den[k][j]);
                    for (double& c : numx) c /= dlead[j];
                }
                // numx / dmon[j], deg numx <= nu[j]
                if (static_cast<int>(numx.size()) == nu[j] + 1) {
                    e = numx[0];
                    for (int r = 0; r < nu[j]; ++r)
                        numx[static_cast<size_t>(r) + 1] -= e * dmon[j][static_cast<size_t>(r) + 1];
                    numx.erase(numx.begin());
                }
                const int deg = static_cast<int>(numx.size());
                for (int r = 0; r < deg; ++r) crow(xoff[j] + nu[j] - deg + r) = numx[static_cast<size_t>(r)];
            }
            const double total = tf.io_delay(i, j) + tf.input_delay(j) + tf.output_delay(i);
            if (total > 0.0) {
                delayed.push_back({i, j, total, crow, e});
            } else {
                g.c1.row(i) += crow.transpose();
                g.d11(i, j) += e;
            }
        }
    }

    const int q = static_cast<int>(delayed.size());
    g.b2 = Mat::Zero(n, q);
    g.c2 = Mat::Zero(q, n);
    g.d12 = Mat::Zero(p, q);
    g.d21 = Mat::Zero(q, mi);
    g.d22 = Mat::Zero(q, q);
    g.tau = Vec::Zero(q);
    g.delay_widths.assign(static_cast<size_t>(q), 1);
    for (int k = 0; k < q; ++k) {
        const PendingDelay& pd = delayed[static_cast<size_t>(k)];
        g.c2.row(k) = pd.c_row.transpose();
        g.d21(k, pd.in) = pd.e;
        g.d12(pd.out, k) = 1.0;
        g.tau(k) = pd.tau;
    }
    g.input_names = tf.input_names;
    g.output_names = tf.output_names;
    validate(g);
    return normalize(g);
}

GltiModel from_delay_dde(const DelayDdeForm& form) {
    const int n = static_cast<int>(form.a0.rows());
    const int mi = static_cast<int>(form.b0.cols());
    const int p = static_cast<int>(form.c0.rows());
    require(form.a0.cols() == n, "a0 must be square, got " + shape(form.a0));
    check_block(form.b0, n, mi, "b0");
    check_block(form.c0, p, n, "c0");
    check_block(form.d0, p, mi, "d0");

    // Sum terms sharing the exact same delay; a zero delay folds into the
    // instantaneous part directly.
    Mat a0 = form.a0, b0 = form.b0, c0 = form.c0, d0 = form.d0;
    std::map<double, std::array<Mat, 4>> groups;
    for (const DelayDdeTerm& t : form.terms) {
        require(std::isfinite(t.theta) && t.theta >= 0.0, "term delays must be finite and nonnegative");
        check_block(t.a, n, n, "term a");
        check_block(t.b, n, mi, "term b");
        check_block(t.c, p, n, "term c");
        check_block(t.d, p, mi, "term d");
        if (t.theta == 0.0) {
            a0 += t.a;
            b0 += t.b;
            c0 += t.c;
            d0 += t.d;
            continue;
        }
        auto it = groups.find(t.theta);
        if (it == groups.end()) {
            groups.emplace(t.theta, std::array<Mat, 4>{t.a, t.b, t.c, t.d});
        } else {
            it->second[0] += t.a;
            it->second[1] += t.b;
            it->second[2] += t.c;
            it->second[3] += t.d;
        }
    }

    // One channel per distinct delay, tapping only the entries of [x; u]
    // that the term actually reads.
    struct Channel {
        double theta;
        std::vector<int> taps;  // indices into [x; u]
        Mat e;                  // (n + p) x taps: stacked [A B; C D] columns
    };
    std::vector<Channel> channels;
    for (const auto& [theta, mats] : groups) {
        Mat e(n + p, n + mi);
        e.topLeftCorner(n, n) = mats[0];
        e.topRightCorner(n, mi) = mats[1];
        e.bottomLeftCorner(p, n) = mats[2];
        e.bottomRightCorner(p, mi) = mats[3];
        Channel ch;
        ch.theta = theta;
        for (int k = 0; k < n + mi; ++k)
            if (e.col(k).cwiseAbs().maxCoeff() != 0.0) ch.taps.push_back(k);
        if (ch.taps.empty()) continue;
        ch.e = Mat(n + p, static_cast<int>(ch.taps.size()));
        for (size_t k = 0; k < ch.taps.size(); ++k) ch.e.col(static_cast<int>(k)) = e.col(ch.taps[k]);
        channels.push_back(std::move(ch));
    }

    int q = 0;
    for (const Channel& ch : channels) q += static_cast<int>(ch.taps.size());
    GltiModel g;
    g.a = a0;
    g.b1 = b0;
    g.c1 = c0;
    g.d11 = d0;
    g.b2 = Mat::Zero(n, q);
    g.c2 = Mat::Zero(q, n);
    g.d12 = Mat::Zero(p, q);
    g.d21 = Mat::Zero(q, mi);
    g.d22 = Mat::Zero(q, q);
    g.tau = Vec::Zero(static_cast<long>(channels.size()));
    int col = 0;
    for (size_t c = 0; c < channels.size(); ++c) {
        const Channel& ch = channels[c];
        g.tau(static_cast<long>(c)) = ch.theta;
        g.delay_widths.push_back(static_cast<int>(ch.taps.size()));
        for (size_t k = 0; k < ch.taps.size(); ++k, ++col) {
            const int tap = ch.taps[k];
            if (tap < n)
                g.c2(col, tap) = 1.0;
            else
                g.d21(col, tap - n) = 1.0;
            g.b2.col(col) = ch.e.col(static_cast<int>(k)).head(n);
            g.d12.col(col) = ch.e.col(static_cast<int>(k)).tail(p);
        }
    }
    validate(g);
    return normalize(g);
}

GltiModel normalize(const GltiModel& m0) {
    validate(m0);
    GltiModel m = m0;
    const int n = m.order();
    const int mi = m.num_inputs();

    // Fold zero-delay channels into the rational part.
    {
        std::vector<int> off = channel_offsets(m.delay_widths);
        std::vector<int> zsig, psig;
        std::vector<double> ptau;
        std::vector<int> pwidth;
        for (int k = 0; k < m.num_channels(); ++k) {
            const bool zero = m.tau(k) == 0.0;
            for (int s = off[k]; s < off[k + 1]; ++s) (zero ? zsig : psig).push_back(s);
            if (!zero) {
                ptau.push_back(m.tau(k));
                pwidth.push_back(m.delay_widths[static_cast<size_t>(k)]);
            }
        }
        if (!zsig.empty()) {
            const int q0 = static_cast<int>(zsig.size());
            const int qp = static_cast<int>(psig.size());
            auto pick_rows = [](const Mat& src, const std::vector<int>& idx) {
                Mat out(static_cast<int>(idx.size()), src.cols());
                for (size_t r = 0; r < idx.size(); ++r) out.row(static_cast<int>(r)) = src.row(idx[r]);
                return out;
            };
            auto pick_cols = [](const Mat& src, const std::vector<int>& idx) {
                Mat out(src.rows(), static_cast<int>(idx.size()));
                for (size_t c = 0; c < idx.size(); ++c) out.col(static_cast<int>(c)) = src.col(idx[c]);
                return out;
            };
            Mat b2z = pick_cols(m.b2, zsig), b2p = pick_cols(m.b2, psig);
            Mat d12z = pick_cols(m.d12, zsig), d12p = pick_cols(m.d12, psig);
            Mat c2z = pick_rows(m.c2, zsig), c2p = pick_rows(m.c2, psig);
            Mat d21z = pick_rows(m.d21, zsig), d21p = pick_rows(m.d21, psig);
            Mat d22zz = pick_cols(pick_rows(m.d22, zsig), zsig);
            Mat d22zp = pick_cols(pick_rows(m.d22, zsig), psig);
            Mat d22pz = pick_cols(pick_rows(m.d22, psig), zsig);
            Mat d22pp = pick_cols(pick_rows(m.d22, psig), psig);

            Eigen::FullPivLU<Mat> lu(Mat::Identity(q0, q0) - d22zz);
            if (!lu.isInvertible())
                throw NumericalError("ill-posed model: singular zero-delay algebraic loop");
            Mat rhs(q0, n + mi + qp);
            rhs << c2z, d21z, d22zp;
            Mat w = lu.solve(rhs);  // w0 = w * [x; u; wp]
            Mat wx = w.leftCols(n), wu = w.middleCols(n, mi), wp = w.rightCols(qp);

            m.a = m.a + b2z * wx;
            m.b1 = m.b1 + b2z * wu;
            m.b2 = b2p + b2z * wp;
            m.c1 = m.c1 + d12z * wx;
            m.d11 = m.d11 + d12z * wu;
            m.d12 = d12p + d12z * wp;
            m.c2 = c2p + d22pz * wx;
            m.d21 = d21p + d22pz * wu;
            m.d22 = d22pp + d22pz * wp;
            m.tau = Eigen::Map<Vec>(ptau.data(), static_cast<long>(ptau.size()));
            m.delay_widths = pwidth;
        }
    }

    // Sort channels ascending and merge bitwise-equal delays.
    {
        const int nc = m.num_channels();
        std::vector<int> order(static_cast<size_t>(nc));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return m.tau(a) < m.tau(b); });
        std::vector<int> off = channel_offsets(m.delay_widths);
        std::vector<int> sig;
        for (int k : order)
            for (int s = off[k]; s < off[k + 1]; ++s) sig.push_back(s);
        const int q = static_cast<int>(sig.size());
        Mat b2(n, q), c2(q, n), d21(q, mi), d12(m.num_outputs(), q), d22(q, q);
        for (int i = 0; i < q; ++i) {
            b2.col(i) = m.b2.col(sig[static_cast<size_t>(i)]);
            d12.col(i) = m.d12.col(sig[static_cast<size_t>(i)]);
            c2.row(i) = m.c2.row(sig[static_cast<size_t>(i)]);
            d21.row(i) = m.d21.row(sig[static_cast<size_t>(i)]);
        }
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                d22(i, j) = m.d22(sig[static_cast<size_t>(i)], sig[static_cast<size_t>(j)]);
        m.b2 = std::move(b2);
        m.c2 = std::move(c2);
        m.d21 = std::move(d21);
        m.d12 = std::move(d12);
        m.d22 = std::move(d22);

        std::vector<double> tau;
        std::vector<int> widths;
        for (int k : order) {
            const double t = m.tau(k);
            if (!tau.empty() && tau.back() == t) {
                widths.back() += m.delay_widths[static_cast<size_t>(k)];
            } else {
                tau.push_back(t);
                widths.push_back(m.delay_widths[static_cast<size_t>(k)]);
            }
        }
        m.tau = Eigen::Map<Vec>(tau.data(), static_cast<long>(tau.size()));
        m.delay_widths = std::move(widths);
    }

    validate(m);
    return m;
}

CMat lft_eval(const CMat& m11, const CMat& m12, const CMat& m21, const CMat& m22,
              const CMat& theta) {
    const long q = m22.rows();
    require(m22.cols() == q && theta.rows() == q && theta.cols() == q &&
                m12.cols() == q && m21.rows() == q && m11.rows() == m12.rows() &&
                m11.cols() == m21.cols(),
            "lft_eval: inconsistent block dimensions");
    Eigen::FullPivLU<CMat> lu(CMat::Identity(q, q) - m22 * theta);
    if (!lu.isInvertible()) throw NumericalError("ill-posed model: singular delay algebraic loop");
    return m11 + m12 * theta * lu.solve(m21);
}

CVec delay_diag(const GltiModel& m, Complex s) {
    CVec d(m.delay_signal_count());
    int col = 0;
    for (int k = 0; k < m.num_channels(); ++k) {
        const Complex e = std::exp(-m.tau(k) * s);
        for (int w = 0; w < m.delay_widths[static_cast<size_t>(k)]; ++w) d(col++) = e;
    }
    return d;
}

}  // namespace tds
