#include "rigidity/closure.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rigidity {

Mat3 vertex_transform(const std::vector<double>& sector_angles,
                      const std::vector<double>& folding_angles) {
    if (sector_angles.size() != folding_angles.size())
        throw std::invalid_argument("vertex_transform: angle lists differ in length");
    if (sector_angles.size() < 3)
        throw std::invalid_argument("vertex_transform: need at least 3 panels");
    Mat3 P = Mat3::Identity();
    for (size_t j = 0; j < sector_angles.size(); ++j)
        P = P * rot_z(sector_angles[j]) * rot_x(folding_angles[j]);
    return P;
}

Mat4 cycle_transform(const std::vector<double>& lengths,
                     const std::vector<double>& gammas,
                     const std::vector<double>& betas,
                     const std::vector<double>& folding_angles) {
    const size_t n = folding_angles.size();
    if (lengths.size() != n || gammas.size() != n || betas.size() != n)
        throw std::invalid_argument("cycle_transform: per-step lists differ in length");
    if (n < 1) throw std::invalid_argument("cycle_transform: need at least 1 step");
    Mat4 Q = Mat4::Identity();
    for (size_t j = 0; j < n; ++j) {
        Mat4 T1 = Mat4::Identity();
        T1.topLeftCorner<3, 3>() = rot_z(betas[j]);
        T1.topRightCorner<3, 1>() =
            Vec3(lengths[j] * std::cos(gammas[j]), lengths[j] * std::sin(gammas[j]), 0.0);
        Mat4 T2 = Mat4::Identity();
        T2.topLeftCorner<3, 3>() = rot_x(folding_angles[j]);
        Q = Q * T1 * T2;
    }
    return Q;
}

Mat4 loop_transform(const Surface& s, const Loop& loop, const FoldingState& st) {
    if (st.rho.size() != s.n_angles)
        throw std::invalid_argument("loop_transform: folding state length mismatch");
    const size_t n = loop.steps.size();
    std::vector<double> rho_eff(n);
    for (size_t j = 0; j < n; ++j) {
        const LoopStep& ls = loop.steps[j];
        rho_eff[j] = ls.sigma * st.rho(s.hinges[ls.hinge].angle_index);
    }
    Mat4 Q;
    if (loop.is_cycle) {
        std::vector<double> l(n), g(n), b(n);
        for (size_t j = 0; j < n; ++j) {
            l[j] = loop.steps[j].length;
            g[j] = loop.steps[j].gamma;
            b[j] = loop.steps[j].alpha;
        }
        Q = cycle_transform(l, g, b, rho_eff);
    } else {
        std::vector<double> a(n);
        for (size_t j = 0; j < n; ++j) a[j] = loop.steps[j].alpha;
        Q = make_pose(vertex_transform(a, rho_eff), Vec3::Zero());
    }
    return loop.frame0_ref * Q * pose_inverse(loop.frame0_ref);
}

VecX residual(const Surface& s, const FoldingState& st) {
    VecX f = VecX::Zero(s.n_constraints());
    int row = 0;
    for (const Loop& loop : s.loops) {
        const Mat4 Q = loop_transform(s, loop, st);
        f(row + 0) = Q(2, 1);
        f(row + 1) = Q(0, 2);
        f(row + 2) = Q(1, 0);
        if (loop.is_cycle) {
            f(row + 3) = Q(0, 3);
            f(row + 4) = Q(1, 3);
            f(row + 5) = Q(2, 3);
            row += 6;
        } else {
            row += 3;
        }
    }
    return f;
}

ConfigCheck is_configuration(const Surface& s, const FoldingState& st, double tol_config) {
    ConfigCheck out;
    out.ok = true;
    int li = 0;
    for (const Loop& loop : s.loops) {
        const Mat4 Q = loop_transform(s, loop, st);
        const double fmax = std::max({std::abs(Q(2, 1)), std::abs(Q(0, 2)), std::abs(Q(1, 0)),
                                      loop.is_cycle ? Q.topRightCorner<3, 1>().cwiseAbs().maxCoeff()
                                                    : 0.0});
        const double idmax = (Q - Mat4::Identity()).cwiseAbs().maxCoeff();
        out.max_residual = std::max(out.max_residual, fmax);
        out.max_identity_defect = std::max(out.max_identity_defect, idmax);
        if ((fmax >= tol_config || idmax >= tol_config) && out.ok) {
            out.ok = false;
            std::ostringstream os;
            if (loop.is_cycle)
                os << "cycle block " << li - static_cast<int>(s.interior_vertices.size());
            else
                os << "vertex block " << li << " (vertex " << loop.vertex << ")";
            os << ": residual " << fmax << ", identity defect " << idmax;
            out.detail = os.str();
        }
        ++li;
    }
    return out;
}

} // namespace rigidity
