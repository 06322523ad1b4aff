#pragma once

#include <random>
#include <string>
#include <vector>

#include "rigidity/constraint_derivatives.hpp"
#include "rigidity/jets.hpp"
#include "rigidity/surface.hpp"

namespace fixtures {

using rigidity::ConstraintJets;
using rigidity::Mat3;
using rigidity::MatX;
using rigidity::Surface;
using rigidity::TrajectoryJet;
using rigidity::Vec3;
using rigidity::VecX;

std::string data_path(const std::string& name);
Surface load(const std::string& name);

// Independent spherical-linkage oracle for the degree-4 cone vertex with all
// sector angles pi/3. Solves the one-parameter folding family directly from
// spherical geometry; produces the four crease directions, the realization
// coordinates and the folding angles without touching the closure machinery.
struct ConeOracle {
    double phi2 = 0.0;
    double phi3 = 0.0;
    std::vector<Vec3> creases;       // u1..u4
    std::vector<Vec3> coordinates;   // apex + outer vertices
    VecX folding_angles;             // per angle index of the cone document
};
ConeOracle cone_oracle(double phi2);

// Synthetic constraint systems for the analysis-level tests. Residuals are
// polynomial in rho; tensors are written down directly.
struct ToySystem {
    ConstraintJets cj;
    std::function<VecX(const VecX&)> residual;
    std::vector<int> block_sizes;
};

// f(rho1, rho2) = rho1^2 + c * rho2^2 (single scalar block).
ToySystem toy_quadric(double c);

// f = (rho2, rho1^2): nullity one, second-order rigid.
ToySystem toy_parabola_rigid();

// f = (rho2, rho1^4): second-order prestress stable along e1.
ToySystem toy_quartic_stable();

// f = rho1*rho2 (scalar): v^T Omega v = 0 with Omega v != 0 at v = e1.
ToySystem toy_hyperbolic();

VecX random_vector(std::mt19937_64& rng, int n, double scale = 1.0);
TrajectoryJet random_jet(std::mt19937_64& rng, int n, int order, double scale = 1.0);

} // namespace fixtures
