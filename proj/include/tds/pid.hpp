#pragma once

#include "tds/model.hpp"
#include "tds/stability.hpp"

namespace tds {

enum class PidType { kP, kPI, kPID };

/// C(s) = kp + ki/s + kd s / (t_filter s + 1).
struct PidController {
    PidType type = PidType::kPID;
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double t_filter = 0.0;  // required positive whenever kd != 0
};

GltiModel to_glti(const PidController& c);

/// Crossover heuristic: the lowest frequency where the plant's continued
/// phase reaches -(180 - pm_target) * 2/3 degrees.  Clamps to the nearest
/// band edge (flagged) when the phase never reaches that level.
struct CrossoverChoice {
    double omega = 0.0;
    bool clamped = false;
};

CrossoverChoice default_crossover(const GltiModel& plant, double pm_target_deg = 60.0);

struct TuneReport {
    PidController controller;
    double crossover = 0.0;       // rad/s the loop was shaped at
    double phase_margin = 0.0;    // measured at the crossover, degrees
    double gain_margin = 0.0;     // measured worst gain margin of the loop
    bool stable = false;          // closed loop passed the spectral test
    bool crossover_clamped = false;
};

/// Single-frequency loop shaping: picks gains so that C(j wc) P(j wc) has
/// unit gain and phase -180 + pm_target degrees.  The required controller
/// phase must lie in (-90, 90); PID splits it with ki = (6 wc)^2 kd for lag
/// (factor 1/6 for lead) and a derivative filter t_filter = kd / (10 kp)
/// folded in by fixed point.  The plant must be SISO and stable; crossover =
/// 0 picks default_crossover.  The report carries measured margins and the
/// spectral verdict on the closed loop.
TuneReport tune_pid(const GltiModel& plant, PidType type, double crossover = 0.0,
                    double pm_target_deg = 60.0);

}  // namespace tds
