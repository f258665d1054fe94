#include "tds/simulate.hpp"

#include <cmath>
#include <limits>

namespace tds {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

// z column value at time tq, cubic through the 4 samples around tq/dt.
// Samples before t = 0 are the zero pre-history; they enter the stencil like
// any other sample, so a time shift of the whole record shifts reads exactly.
double sample_z(const Mat& z, long col, double tq, double dt) {
    if (tq < -2.0 * dt) return 0.0;
    const double th = tq / dt;
    double fl = std::floor(th);
    double frac = th - fl;
    if (frac > 1.0 - 1e-9) {
        fl += 1.0;
        frac = 0.0;
    }
    const long i = static_cast<long>(fl);
    auto at = [&](long idx) { return idx < 0 ? 0.0 : z(idx, col); };
    if (frac < 1e-9) return at(i);
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * frac *
                    (p2 - p0 +
                     frac * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                             frac * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

SimulationResult simulate(const GltiModel& m, const Mat& u, const Vec& t) {
    GltiModel g = normalize(m);
    const int n = g.order();
    const int mi = g.num_inputs();
    const int p = g.num_outputs();
    const int q = g.delay_signal_count();
    const long nt = t.size();
    require(nt >= 2, "time grid needs at least two points");
    require(t(0) == 0.0, "time grid must start at 0");
    const double dt = t(1) - t(0);
    require(dt > 0.0, "time grid must be increasing");
    for (long i = 1; i < nt; ++i)
        require(std::abs(t(i) - t(i - 1) - dt) <= 1e-9 * dt, "time grid must be uniform");
    require(u.rows() == nt && u.cols() == mi, "input samples must be (points x inputs)");
    if (q > 0)
        require(dt <= g.tau.minCoeff() / 4.0 + 1e-12 * dt,
                "dt must not exceed a quarter of the smallest delay");

    // Per delay signal, the delay it is read back with.
    Vec sig_tau(q);
    {
        int col = 0;
        for (int k = 0; k < g.num_channels(); ++k)
            for (int w = 0; w < g.delay_widths[static_cast<size_t>(k)]; ++w)
                sig_tau(col++) = g.tau(k);
    }

    SimulationResult r;
    r.t = t;
    r.u = u;
    r.y = Mat::Zero(nt, p);
    r.z = Mat::Zero(nt, q);
    r.dt = dt;

    Vec x = Vec::Zero(n);
    Vec w(q), wh(q), wf(q);
    auto fill_w = [&](double tq, Vec& out) {
        for (int c = 0; c < q; ++c) out(c) = sample_z(r.z, c, tq - sig_tau(c), dt);
    };
    for (long step = 0; step < nt; ++step) {
        const Vec us = u.row(step).transpose();
        if (q > 0) {
            fill_w(t(step), w);
            r.z.row(step) = (g.c2 * x + g.d21 * us + g.d22 * w).transpose();
            r.y.row(step) = (g.c1 * x + g.d11 * us + g.d12 * w).transpose();
        } else {
            r.y.row(step) = (g.c1 * x + g.d11 * us).transpose();
        }
        if (step + 1 == nt || n == 0) continue;

        const Vec bu = g.b1 * us;
        Vec k1, k2, k3, k4;
        if (q > 0) {
            fill_w(t(step) + 0.5 * dt, wh);
            fill_w(t(step) + dt, wf);
            k1 = g.a * x + bu + g.b2 * w;
            k2 = g.a * (x + 0.5 * dt * k1) + bu + g.b2 * wh;
            k3 = g.a * (x + 0.5 * dt * k2) + bu + g.b2 * wh;
            k4 = g.a * (x + dt * k3) + bu + g.b2 * wf;
        } else {
            k1 = g.a * x + bu;
            k2 = g.a * (x + 0.5 * dt * k1) + bu;
            k3 = g.a * (x + 0.5 * dt * k2) + bu;
            k4 = g.a * (x + dt * k3) + bu;
        }
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return r;
}

double default_dt(const GltiModel& m, double t_final) {
    GltiModel g = normalize(m);
    double dt = t_final / 50.0;
    if (g.has_delays()) dt = std::min(dt, g.tau.minCoeff() / 20.0);
    if (g.order() > 0) {
        Eigen::EigenSolver<Mat> es(g.a, false);
        double slowest = 0.0;
        for (long i = 0; i < g.order(); ++i) {
            const double re = es.eigenvalues()(i).real();
            if (re < -1e-12) slowest = std::max(slowest, 1.0 / -re);
        }
        if (slowest > 0.0) dt = std::min(dt, slowest / 100.0);
    }
    if (!g.has_delays() && g.order() == 0) dt = t_final / 500.0;
    return std::max(dt, t_final / 2e6);
}

SimulationResult step_response(const GltiModel& m, double t_final, double dt) {
    require(t_final > 0.0, "t_final must be positive");
    GltiModel g = normalize(m);
    require(g.num_inputs() == 1, "step response needs a single-input model");
    if (dt <= 0.0) dt = default_dt(g, t_final);
    const long nt = static_cast<long>(std::floor(t_final / dt + 1e-9)) + 1;
    Vec t(nt);
    for (long i = 0; i < nt; ++i) t(i) = dt * static_cast<double>(i);
    return simulate(g, Mat::Ones(nt, 1), t);
}

StepMetrics step_metrics(const SimulationResult& r, double band) {
    require(r.y.cols() == 1, "step metrics need a single output");
    require(band > 0.0 && band < 1.0, "settling band must be in (0, 1)");
    const long nt = r.y.rows();
    require(nt >= 10, "record too short for step metrics");
    const Vec y = r.y.col(0);

    const long tail = std::max<long>(1, nt / 10);
    const double final_value = y.tail(tail).mean();
    const double scale = y.cwiseAbs().maxCoeff();
    if (std::abs(final_value) <= 1e-9 * std::max(scale, 1e-300))
        throw NumericalError("step metrics undefined: final value is zero");
    const double sgn = final_value > 0.0 ? 1.0 : -1.0;
    const Vec yn = y * (sgn / std::abs(final_value));  // normalized toward +1

    StepMetrics sm;
    sm.final_value = final_value;
    sm.settled = (yn.tail(tail).array() - 1.0).abs().maxCoeff() <= band;

    long ipeak = 0;
    yn.maxCoeff(&ipeak);
    sm.peak = y(ipeak);
    sm.peak_time = r.t(ipeak);
    sm.overshoot_pct = std::max(0.0, yn(ipeak) - 1.0) * 100.0;

    auto first_reach = [&](double level) {
        for (long i = 0; i < nt; ++i) {
            if (yn(i) >= level) {
                if (i == 0 || yn(i) == yn(i - 1)) return r.t(i);
                const double a = (level - yn(i - 1)) / (yn(i) - yn(i - 1));
                return r.t(i - 1) + a * (r.t(i) - r.t(i - 1));
            }
        }
        return std::numeric_limits<double>::infinity();
    };
    const double t10 = first_reach(0.1), t90 = first_reach(0.9);
    sm.rise_time = t90 - t10;
    if (!std::isfinite(t90)) {
        sm.rise_time = std::numeric_limits<double>::infinity();
        sm.settled = false;
    }

    long last_out = -1;
    for (long i = nt - 1; i >= 0; --i) {
        if (std::abs(yn(i) - 1.0) > band) {
            last_out = i;
            break;
        }
    }
    if (last_out < 0) {
        sm.settling_time = 0.0;
    } else if (last_out == nt - 1) {
        sm.settling_time = std::numeric_limits<double>::infinity();
        sm.settled = false;
    } else {
        const double e0 = std::abs(yn(last_out) - 1.0), e1 = std::abs(yn(last_out + 1) - 1.0);
        const double a = (e0 - band) / std::max(e0 - e1, 1e-300);
        sm.settling_time = r.t(last_out) + std::min(1.0, std::max(0.0, a)) * r.dt;
    }
    return sm;
}

}  // namespace tds
