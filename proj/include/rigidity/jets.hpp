#pragma once

#include <vector>

#include "rigidity/constraint_derivatives.hpp"

namespace rigidity {

struct EnergyModel;

// Trajectory germ gamma(t) = rho0 + sum_i derivs[i-1] t^i / i!.
struct TrajectoryJet {
    std::vector<VecX> derivs; // rho', rho'', ...

    // Index (1-based) of the first nonzero derivative; 0 if all zero.
    int active_order(double tol = 0.0) const;
    VecX at(double t, const VecX& rho0) const;
};

// One term of the multivariate Faa di Bruno sum: multiplicities m_j with
// sum j*m_j = i and sum m_j = k.
struct Partition {
    std::vector<int> mult;             // m_1..m_i
    int order = 0;                     // i
    int tensor_order = 0;              // k
    unsigned long long multinomial = 0;    // i! / prod m_j!
    unsigned long long display_coeff = 0;  // i! / prod (m_j! (j!)^m_j)
};

std::vector<Partition> enumerate_partitions(int i);

// d^i f / d t^i along the jet, by the partition formula. When pad_free is
// true, derivatives beyond the stored jet are treated as zero; otherwise a
// short jet is an error.
VecX df_dt(const TrajectoryJet& jet, const ConstraintJets& cj, int i, bool pad_free = false);

// Same sum with the leading df/drho . rho^{(i)} term removed; needs jet
// entries only up to order i-1.
VecX df_dt_tail(const TrajectoryJet& jet, const ConstraintJets& cj, int i);

// Hand-expanded forms of orders 1..6 (cross-check path).
VecX df_dt_expanded(const TrajectoryJet& jet, const ConstraintJets& cj, int i);

// d^i E / d t^i at t = 0 via the partition formula applied to E(f(gamma(t))).
double dE_dt(const TrajectoryJet& jet, const ConstraintJets& cj, const EnergyModel& energy,
             int i, bool pad_free = false);

// Hand-expanded energy derivatives of orders 1..6 in terms of the
// rho-derivative tensors of E (cross-check path).
double dE_dt_expanded(const TrajectoryJet& jet, const ConstraintJets& cj,
                      const EnergyModel& energy, int i);

} // namespace rigidity
