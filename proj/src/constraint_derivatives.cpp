#include "rigidity/constraint_derivatives.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "rigidity/errors.hpp"

namespace rigidity {

namespace {

struct LoopFrames {
    std::vector<Vec3> x_eff;   // sigma-adjusted crease directions, current state
    std::vector<Vec3> anchors; // cycles only
};

// Crease directions (and anchors) at the given state, propagated around the
// loop with its starting frame held at the reference pose. Only meaningful at
// configurations, where the loop closes.
LoopFrames loop_frames(const Surface& s, const Loop& loop, const FoldingState& st) {
    LoopFrames out;
    Mat4 M = loop.frame0_ref;
    for (const LoopStep& ls : loop.steps) {
        Mat4 T1 = Mat4::Identity();
        T1.topLeftCorner<3, 3>() = rot_z(ls.alpha);
        if (loop.is_cycle)
            T1.topRightCorner<3, 1>() =
                Vec3(ls.length * std::cos(ls.gamma), ls.length * std::sin(ls.gamma), 0.0);
        M = M * T1;
        out.x_eff.push_back(ls.sigma * M.topLeftCorner<3, 3>().col(0));
        if (loop.is_cycle) out.anchors.push_back(M.topRightCorner<3, 1>());
        Mat4 T2 = Mat4::Identity();
        T2.topLeftCorner<3, 3>() = rot_x(ls.sigma * st.rho(s.hinges[ls.hinge].angle_index));
        M = M * T2;
    }
    return out;
}

void require_configuration(const Surface& s, const FoldingState& st, double tol_config,
                           const char* who) {
    const ConfigCheck c = is_configuration(s, st, tol_config);
    if (!c.ok)
        throw NotAConfiguration(std::string(who) +
                                ": state is not a configuration (" + c.detail + ")");
}

// Enumerate non-decreasing multisets of size k over {0..n-1}, calling fn on each.
void for_each_multiset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k, 0);
    while (true) {
        fn(idx);
        int p = k - 1;
        while (p >= 0 && idx[p] == n - 1) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < k; ++q) idx[q] = idx[p];
    }
}

// Value of the order-k derivative of one loop's residual block at the
// position multiset `pos` (non-decreasing), from the ordered skew products.
VecX loop_derivative_entry(const Loop& loop, const LoopFrames& fr, const std::vector<int>& pos) {
    const int k = static_cast<int>(pos.size());
    Mat3 Rprod = skew(fr.x_eff[pos[0]]);
    for (int t = 1; t < k; ++t) Rprod = Rprod * skew(fr.x_eff[pos[t]]);
    if (!loop.is_cycle) {
        VecX v(3);
        v << Rprod(2, 1), Rprod(0, 2), Rprod(1, 0);
        return v;
    }
    // translation part: -x_{p1} x ( ... x (x_{pk} x O_{pk}))
    const int last = pos[k - 1];
    Vec3 tr = fr.x_eff[last].cross(fr.anchors[last]);
    for (int t = k - 2; t >= 0; --t) tr = fr.x_eff[pos[t]].cross(tr);
    VecX v(6);
    v << Rprod(2, 1), Rprod(0, 2), Rprod(1, 0), -tr.x(), -tr.y(), -tr.z();
    return v;
}

} // namespace

const SymmetricTensor& ConstraintJets::tensor(int k) const {
    auto it = D.find(k);
    if (it == D.end())
        throw std::out_of_range("ConstraintJets: derivative order exceeds stored k_max");
    return it->second;
}

MatX rigidity_matrix(const Surface& s, const FoldingState& st, double tol_config) {
    require_configuration(s, st, tol_config, "rigidity_matrix");
    MatX R = MatX::Zero(s.n_constraints(), s.n_angles);
    int row = 0;
    for (const Loop& loop : s.loops) {
        const LoopFrames fr = loop_frames(s, loop, st);
        for (size_t j = 0; j < loop.steps.size(); ++j) {
            const int col = s.hinges[loop.steps[j].hinge].angle_index;
            R.block<3, 1>(row, col) += fr.x_eff[j];
            if (loop.is_cycle)
                R.block<3, 1>(row + 3, col) += -fr.x_eff[j].cross(fr.anchors[j]);
        }
        row += loop.is_cycle ? 6 : 3;
    }
    return R;
}

SymmetricTensor derivative_tensor(const Surface& s, const FoldingState& st, int k,
                                  double tol_config) {
    if (k < 2) throw std::invalid_argument("derivative_tensor: order must be >= 2");
    require_configuration(s, st, tol_config, "derivative_tensor");
    SymmetricTensor T(k, s.n_angles, s.n_constraints());
    int row = 0;
    for (const Loop& loop : s.loops) {
        const LoopFrames fr = loop_frames(s, loop, st);
        const int deg = static_cast<int>(loop.steps.size());
        const int rows = loop.is_cycle ? 6 : 3;
        for_each_multiset(deg, k, [&](const std::vector<int>& pos) {
            const VecX val = loop_derivative_entry(loop, fr, pos);
            std::vector<int> key(k);
            for (int t = 0; t < k; ++t)
                key[t] = s.hinges[loop.steps[pos[t]].hinge].angle_index;
            VecX full = VecX::Zero(s.n_constraints());
            full.segment(row, rows) = val;
            T.add(key, full);
        });
        row += rows;
    }
    return T;
}

ConstraintJets build_constraint_jets(const Surface& s, const FoldingState& st, int kmax,
                                     double tol_config) {
    if (kmax < 2) throw std::invalid_argument("build_constraint_jets: kmax must be >= 2");
    require_configuration(s, st, tol_config, "build_constraint_jets");
    ConstraintJets cj;
    cj.rho0 = st.rho;
    cj.kmax = kmax;
    cj.n_rho = s.n_angles;
    cj.R = rigidity_matrix(s, st, tol_config);
    for (const Loop& loop : s.loops) cj.block_sizes.push_back(loop.is_cycle ? 6 : 3);
    for (int k = 2; k <= kmax; ++k) cj.D.emplace(k, derivative_tensor(s, st, k, tol_config));
    return cj;
}

SymmetricTensor fd_oracle(const Surface& s, const FoldingState& st, int k, double h) {
    if (k < 1 || k > 3) throw std::invalid_argument("fd_oracle: order must be in {1, 2, 3}");
    if (!(h > 0.0)) throw std::invalid_argument("fd_oracle: step must be > 0");
    const int n = s.n_angles;
    SymmetricTensor T(k, n, s.n_constraints());
    for_each_multiset(n, k, [&](const std::vector<int>& idx) {
        VecX acc = VecX::Zero(s.n_constraints());
        // 2^k stencil of +-h offsets; repeated indices combine into larger steps
        for (int mask = 0; mask < (1 << k); ++mask) {
            FoldingState p{st.rho};
            double sgn = 1.0;
            for (int t = 0; t < k; ++t) {
                const double sgn_t = (mask >> t) & 1 ? -1.0 : 1.0;
                p.rho(idx[t]) += sgn_t * h;
                sgn *= sgn_t;
            }
            acc += sgn * residual(s, p);
        }
        acc /= std::pow(2.0 * h, k);
        T.set(idx, acc);
    });
    return T;
}

} // namespace rigidity
