#pragma once

#include <utility>
#include <vector>

#include "tds/model.hpp"

namespace tds {

/// Transfer matrix evaluated at a general complex frequency.  At s = 0 the
/// delay loop is folded first, so responses with a singular raw A but finite
/// DC behaviour (typical for closed loops) still evaluate.
CMat response_at(const GltiModel& m, Complex s);

/// response_at on the imaginary axis, s = j omega.
CMat freq_response_at(const GltiModel& m, double omega);

struct FrequencyResponse {
    Vec omega;            // strictly ascending, rad/s
    std::vector<CMat> h;  // one p x m response per point (empty at skipped points)
    std::vector<int> skipped;  // indices where evaluation hit a pole exactly
};

FrequencyResponse freq_response(const GltiModel& m, const Vec& grid);

/// Logarithmic frequency grid spanning two decades beyond the model's pole,
/// zero and delay (2 pi / tau) scales, with extra points clustered near each
/// delay frequency.  Exactly n_points, strictly ascending.
Vec auto_grid(const GltiModel& m, int n_points = 500);

struct DcGain {
    Mat value;               // infinities when integrator is set
    bool integrator = false; // rational part singular at s = 0
};

/// Steady-state gain H(0) with the delay loop closed at s = 0.
DcGain dcgain(const GltiModel& m);

/// First frequency where a SISO gain falls 3 dB below |H(0)|, refined by
/// bisection to 1e-6 relative accuracy.  Throws NumericalError when the DC
/// gain is zero, infinite, or no crossing lies in the search band.
double bandwidth(const GltiModel& m);

/// Phase (radians) along a strictly ascending grid, continued analytically:
/// principal-argument increments are accumulated, with adaptive interval
/// bisection whenever a step exceeds pi/2, so delay phase never aliases.
Vec continuous_phase(const GltiModel& m, const Vec& grid);

/// Refines an omega where the continuous phase reaches level_rad, given a
/// bracket [wa, wb] with continuous phase values phia, phib around it.
double phase_crossing_refine(const GltiModel& m, double wa, double phia, double wb, double phib,
                             double level_rad);

/// Stability margins of a SISO response treated as a loop transfer function.
/// All unit-gain and 180-degree crossings inside the search band are located
/// on the auto grid and bisection-refined; the worst-case pair minimizes
/// |log gm| and |pm|.  A DC gain within 1e-6 of unity contributes the limit
/// entry (omega = 0, pm = 180 + phase(0+)).
struct MarginReport {
    std::vector<std::pair<double, double>> gain_margins;   // (omega_pc, gm)
    std::vector<std::pair<double, double>> phase_margins;  // (omega_gc, pm in degrees)
    double gm_min;    // +inf when no phase crossing exists
    double omega_gm;  // 0 when gm_min is +inf
    double pm_min;    // +inf when no gain crossing exists, degrees in (-180, 180]
    double omega_pm;  // 0 when pm_min is +inf
    std::pair<double, double> search_band;
    bool truncated;  // delays present: crossings beyond the band exist
};

MarginReport margins(const GltiModel& m);

/// Bode table over the auto grid (or a caller grid): gains in dB and
/// per-channel continued phase in degrees.  Channel (i,j) sits in column
/// i * num_inputs + j.  Grid points where evaluation fails are dropped.
struct BodeTable {
    Vec omega;
    Mat mag_db;     // points x (p*m)
    Mat phase_deg;  // points x (p*m)
};

BodeTable bode_data(const GltiModel& m, int n_points = 500);
BodeTable bode_data(const GltiModel& m, const Vec& grid);

struct NyquistTable {
    Vec omega;
    Mat re, im;  // points x (p*m)
};

NyquistTable nyquist_data(const GltiModel& m, int n_points = 500);
NyquistTable nyquist_data(const GltiModel& m, const Vec& grid);

}  // namespace tds
