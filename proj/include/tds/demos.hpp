#pragma once

#include <string>

#include "tds/interconnect.hpp"
#include "tds/json_io.hpp"
#include "tds/model.hpp"

namespace tds {

/// Mixing-tank concentration plant: 5.6 exp(-93.9 s) / (40.2 s + 1).
/// Variants perturb gain, lag and dead time: 1 -> 5 exp(-90 s)/(38 s + 1),
/// 2 -> 6 exp(-100 s)/(42 s + 1).
GltiModel tank_plant(int variant = 0);

/// The tank's direct PI concentration controller 0.12 (1 + 1/(100 s)).
GltiModel tank_pi_controller();

/// Closed PI loop from setpoint to concentration.
GltiModel tank_pi_loop();

/// Smith predictor around the tank: PI controller, dead-time-free internal
/// model, delayed internal model, and filter 1/(20 s + 1), closed around the
/// plant variant (0 = nominal).
GltiModel smith_loop(int plant_variant = 0);

/// The Smith structure as a netlist usable with connect()/the CLI.
Json smith_netlist(int plant_variant = 0);

/// Setpoint history used by the tracking studies: 4 on [0, 1000), 8 from
/// 1000 on.
Mat tank_reference(const Vec& t);
Vec uniform_grid(double t_final, double dt);

/// Writes the demo artifacts for `name` (tank-pi, smith, pidtune) into
/// out_dir.  Returns a short human-readable summary.
std::string run_demo(const std::string& name, const std::string& out_dir);

}  // namespace tds
