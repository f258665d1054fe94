#include "tds/pid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "tds/frequency.hpp"
#include "tds/interconnect.hpp"

namespace tds {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

double wrap180(double deg) {
    double w = std::remainder(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    return w;
}

}  // namespace

GltiModel to_glti(const PidController& c) {
    require(std::isfinite(c.kp) && std::isfinite(c.ki) && std::isfinite(c.kd) &&
                std::isfinite(c.t_filter),
            "controller gains must be finite");
    if (c.kd != 0.0)
        require(c.t_filter > 0.0, "derivative action needs a positive filter constant");
    const bool has_i = c.ki != 0.0;
    const bool has_d = c.kd != 0.0;
    if (!has_i && !has_d) return static_gain(c.kp);
    if (!has_d) return to_glti(make_tf({c.kp, c.ki}, {1.0, 0.0}));
    const double tf = c.t_filter;
    if (!has_i) return to_glti(make_tf({c.kp * tf + c.kd, c.kp}, {tf, 1.0}));
    return to_glti(make_tf({c.kp * tf + c.kd, c.kp + c.ki * tf, c.ki}, {tf, 1.0, 0.0}));
}

CrossoverChoice default_crossover(const GltiModel& plant, double pm_target_deg) {
    GltiModel g = normalize(plant);
    require(g.is_siso(), "crossover selection needs a SISO plant");
    require(pm_target_deg > 0.0 && pm_target_deg < 180.0, "target phase margin must be in (0, 180)");
    const Vec grid = auto_grid(g, 500);
    const Vec phi = continuous_phase(g, grid);
    const double level = -(180.0 - pm_target_deg) * (2.0 / 3.0) * kPi / 180.0;
    if (phi.maxCoeff() - phi.minCoeff() < 1e-9)
        throw NumericalError("flat phase response: no crossover heuristic applies");
    for (long i = 0; i + 1 < grid.size(); ++i) {
        if ((phi(i) - level) == 0.0) return {grid(i), false};
        if ((phi(i) - level) * (phi(i + 1) - level) < 0.0) {
            const double w =
                phase_crossing_refine(g, grid(i), phi(i), grid(i + 1), phi(i + 1), level);
            return {w, false};
        }
    }
    // Phase never reaches the level inside the band: clamp to the nearer end.
    if (phi.minCoeff() > level) return {grid(grid.size() - 1), true};
    return {grid(0), true};
}

TuneReport tune_pid(const GltiModel& plant, PidType type, double crossover, double pm_target_deg) {
    GltiModel g = normalize(plant);
    require(g.is_siso(), "tuning needs a SISO plant");
    require(pm_target_deg > 0.0 && pm_target_deg < 180.0, "target phase margin must be in (0, 180)");
    if (is_stable(g) != Stability::kStable)
        throw ModelError("tuning requires a plant that passes the stability test");

    TuneReport rep;
    if (crossover > 0.0) {
        const Vec grid = auto_grid(g, 2);
        require(crossover >= grid(0) && crossover <= grid(1),
                "crossover lies outside the plant's analysis band");
        rep.crossover = crossover;
    } else {
        CrossoverChoice cc = default_crossover(g, pm_target_deg);
        rep.crossover = cc.omega;
        rep.crossover_clamped = cc.clamped;
    }
    const double wc = rep.crossover;

    const Complex pw = freq_response_at(g, wc)(0, 0);
    if (std::abs(pw) == 0.0) throw NumericalError("plant response is zero at the crossover");
    const double c = 1.0 / std::abs(pw);
    const double phi_deg = wrap180(-180.0 + pm_target_deg - std::arg(pw) * 180.0 / kPi);
    if (std::abs(phi_deg) >= 90.0 - 1e-9) {
        std::ostringstream os;
        os << "required controller phase " << phi_deg << " deg at " << wc
           << " rad/s is outside (-90, 90)";
        throw NumericalError(os.str());
    }
    const double phi = phi_deg * kPi / 180.0;

    PidController ctl;
    ctl.type = type;
    switch (type) {
        case PidType::kP: {
            if (std::abs(phi_deg) > 1e-6)
                throw NumericalError("P controller cannot supply nonzero phase");
            ctl.kp = c;
            break;
        }
        case PidType::kPI: {
            if (phi_deg > 1e-12)
                throw NumericalError("PI controller cannot supply phase lead");
            ctl.kp = c * std::cos(phi);
            ctl.ki = -c * std::sin(phi) * wc;
            break;
        }
        case PidType::kPID: {
            if (phi_deg == 0.0) {
                ctl.kp = c;
                break;
            }
            const double alpha = phi < 0.0 ? 6.0 : 1.0 / 6.0;
            double tf = 0.0, kp = 0.0, kd = 0.0, ki = 0.0;
            for (int it = 0; it < 200; ++it) {
                const double den = 1.0 + tf * tf * wc * wc;
                kd = c * std::sin(phi) / (wc * (1.0 / den - alpha * alpha));
                ki = alpha * alpha * wc * wc * kd;
                kp = c * std::cos(phi) - kd * tf * wc * wc / den;
                const double tf_new = kp > 0.0 ? kd / (10.0 * kp) : tf;
                const bool done = std::abs(tf_new - tf) <= 1e-14 * (1.0 + tf);
                tf = tf_new;
                if (done) break;
            }
            if (!(kp > 0.0) || !(ki >= 0.0) || !(kd >= 0.0) || !(tf > 0.0))
                throw NumericalError("loop shaping produced non-positive gains");
            ctl.kp = kp;
            ctl.ki = ki;
            ctl.kd = kd;
            ctl.t_filter = tf;
            break;
        }
    }
    rep.controller = ctl;

    GltiModel loop = series(to_glti(ctl), g);
    const Complex lw = freq_response_at(loop, wc)(0, 0);
    const double shape_gain = std::abs(std::abs(lw) - 1.0);
    const double shape_phase =
        std::abs(wrap180(std::arg(lw) * 180.0 / kPi - (-180.0 + pm_target_deg)));
    if (shape_gain > 1e-6 || shape_phase > 1e-6)
        throw NumericalError("loop shaping did not land on the target point");

    MarginReport mr = margins(loop);
    rep.gain_margin = mr.gm_min;
    rep.phase_margin = std::numeric_limits<double>::quiet_NaN();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [w, pm] : mr.phase_margins) {
        const double d = std::abs(std::log(std::max(w, 1e-300) / wc));
        if (d < best) {
            best = d;
            rep.phase_margin = pm;
        }
    }
    rep.stable = is_stable(feedback(loop, static_gain(1.0))) == Stability::kStable;
    return rep;
}

}  // namespace tds
