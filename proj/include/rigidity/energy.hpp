#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rigidity/jets.hpp"
#include "rigidity/surface.hpp"
#include "rigidity/tensor.hpp"

namespace rigidity {

// Quadratic per-block energy E = sum_i [ eps * w_i . f_i + 1/2 f_i^T K_i f_i ]
// around a configuration rho0. The residual function makes the model usable
// for synthetic constraint systems as well as surfaces.
struct EnergyModel {
    std::function<VecX(const VecX&)> residual_fn;
    std::vector<int> block_sizes;
    std::vector<MatX> stiffness; // K_i, positive definite
    VecX omega;                  // selfstress direction (full constraint space)
    double epsilon = 0.0;        // prestress scale; 0 = unstressed
    VecX rho0;

    double value(const VecX& rho) const;
    VecX gradient(const VecX& rho, double h = 1e-6) const; // finite differences
    MatX stiffness_full() const;                           // block-diagonal K
    double min_stiffness_eigenvalue() const;
};

constexpr double kKappaGuard = 10.0;

// Orthonormal basis of the left null space of R (selfstresses).
std::vector<VecX> selfstress_basis(const MatX& R, double tol_rank = -1.0);

struct StressData {
    MatX Omega;                  // omega . d2f, n_rho x n_rho
    SymmetricTensor OmegaII;     // omega . d4f (order 4)
    SymmetricTensor third_order; // omega . d3f (order 3)
};

StressData stress_data(const VecX& omega, const ConstraintJets& cj,
                       double tol_selfstress = 1e-8);

EnergyModel build_energy(const Surface& s, const FoldingState& st, const VecX& omega,
                         double epsilon, const std::vector<MatX>& stiffness = {});

// Synthetic-system variant.
EnergyModel build_energy_raw(std::function<VecX(const VecX&)> residual_fn,
                             std::vector<int> block_sizes, const VecX& rho0,
                             const MatX& R, const VecX& omega, double epsilon,
                             const std::vector<MatX>& stiffness = {});

struct GrowthFit {
    bool ok = false;
    double exponent = 0.0;
    double fit_residual = 0.0;
    int points_used = 0;
    std::string message;
};

std::vector<double> log_grid(double t_lo, double t_hi, int n);

// Least-squares slope of log(E - E0) against log r along the path, with
// r = |path(t) - rho0|.
GrowthFit growth_probe(const EnergyModel& energy,
                       const std::function<VecX(double)>& path,
                       const std::vector<double>& t_grid);

GrowthFit growth_probe_jet(const EnergyModel& energy, const TrajectoryJet& jet,
                           const std::vector<double>& t_grid);

} // namespace rigidity
