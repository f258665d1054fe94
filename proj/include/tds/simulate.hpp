#pragma once

#include "tds/model.hpp"

namespace tds {

struct SimulationResult {
    Vec t;     // uniform, starting at 0
    Mat u;     // points x inputs
    Mat y;     // points x outputs
    Mat z;     // points x delay signals (sources of the delayed taps)
    double dt = 0.0;
};

/// Integrates the model from zero initial state and zero pre-history with
/// classical RK4 on the rational part.  Inputs are held zero-order over each
/// step; delayed signals w(t) = z(t - tau) are read from the stored z samples
/// with 4-point cubic interpolation.  Requires a uniform grid starting at 0
/// and dt <= min(tau)/4.
SimulationResult simulate(const GltiModel& m, const Mat& u, const Vec& t);

/// Unit step on the (single) input over [0, t_final]; dt = 0 picks
/// default_dt.
SimulationResult step_response(const GltiModel& m, double t_final, double dt = 0.0);

/// Step size heuristic: min(tau)/20 and a hundredth of the slowest rational
/// time constant, whichever is smaller, with sane bounds from t_final.
double default_dt(const GltiModel& m, double t_final);

struct StepMetrics {
    double final_value = 0.0;     // tail average
    double overshoot_pct = 0.0;   // max excursion past final, percent
    double rise_time = 0.0;       // 10% -> 90% of final
    double settling_time = 0.0;   // last exit from the +-band around final
    double peak = 0.0;            // extreme value toward the step direction
    double peak_time = 0.0;
    bool settled = true;          // tail stays inside the band
};

/// Classical step-response figures for a single-output simulation.  The final
/// value is the average of the last tenth of the record and must be away from
/// zero; band is the settling tolerance (fraction of final).
StepMetrics step_metrics(const SimulationResult& r, double band = 0.02);

}  // namespace tds
