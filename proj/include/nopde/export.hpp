#pragma once

#include <string>

#include "nopde/grid.hpp"
#include "nopde/newton.hpp"

namespace nopde {

/// CSV: iter, residual_linf, step_l2 (step_l2 is the L2 norm of the step
/// taken from that iterate; 0 on the final row).
void write_trajectory_csv(const std::string& path, const NewtonTrajectory& traj);

/// 8-bit binary PGM (P5) with linear min-max scaling; the scaling constants
/// go to path + ".scale" so the image is invertible.
void write_pgm_with_sidecar(const std::string& path, const GridFunction& field);

} // namespace nopde
