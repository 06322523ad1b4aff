#pragma once

#include <map>

#include "rigidity/closure.hpp"
#include "rigidity/surface.hpp"
#include "rigidity/tensor.hpp"

namespace rigidity {

constexpr int kDefaultKMax = 6;

// Rigidity matrix and symmetric derivative tensors of the closure residual
// at a configuration, built from the crease geometry in global coordinates.
struct ConstraintJets {
    VecX rho0;
    MatX R; // (3 n_v + 6 n_c) x n_rho
    std::map<int, SymmetricTensor> D; // orders 2..kmax
    std::vector<int> block_sizes;     // 3 per vertex then 6 per cycle
    int kmax = 0;
    int n_rho = 0;

    const SymmetricTensor& tensor(int k) const;
};

MatX rigidity_matrix(const Surface& s, const FoldingState& st,
                     double tol_config = kDefaultTolConfig);

SymmetricTensor derivative_tensor(const Surface& s, const FoldingState& st, int k,
                                  double tol_config = kDefaultTolConfig);

ConstraintJets build_constraint_jets(const Surface& s, const FoldingState& st,
                                     int kmax = kDefaultKMax,
                                     double tol_config = kDefaultTolConfig);

// Central finite-difference estimate of d^k f / d rho^k (k <= 3).
SymmetricTensor fd_oracle(const Surface& s, const FoldingState& st, int k, double h);

} // namespace rigidity
