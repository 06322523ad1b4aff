#pragma once

#include <string>
#include <vector>

#include "rigidity/surface.hpp"

namespace rigidity {

// Ordered product of Z-rotations by the sector angles and X-rotations by the
// folding angles, accumulating from the right.
Mat3 vertex_transform(const std::vector<double>& sector_angles,
                      const std::vector<double>& folding_angles);

// Ordered product of homogeneous transforms for one representative cycle.
// `lengths`, `gammas`, `betas` and `folding_angles` are per step.
Mat4 cycle_transform(const std::vector<double>& lengths,
                     const std::vector<double>& gammas,
                     const std::vector<double>& betas,
                     const std::vector<double>& folding_angles);

// Full loop transform for one of the surface's loops (fan or cycle) at the
// given state, conjugated into the global frame.
Mat4 loop_transform(const Surface& s, const Loop& loop, const FoldingState& st);

// Closure residual: 3 components per interior vertex then 6 per cycle, in
// input order. Components are the (3,2), (1,3), (2,1) rotation entries and,
// for cycles, the translation column.
VecX residual(const Surface& s, const FoldingState& st);

struct ConfigCheck {
    bool ok = false;
    double max_residual = 0.0;       // max |f| component
    double max_identity_defect = 0.0; // max deviation of a rotation block from I
    std::string detail;               // names the worst offender when !ok
};

constexpr double kDefaultTolConfig = 1e-9;

// True iff the residual is below tol in the sup norm AND every full rotation
// block is within tol of the identity (rules out non-identity rotations with
// vanishing selected components).
ConfigCheck is_configuration(const Surface& s, const FoldingState& st,
                             double tol_config = kDefaultTolConfig);

} // namespace rigidity
