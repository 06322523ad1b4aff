#include "rigidity/energy.hpp"

#include <cfloat>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rigidity/closure.hpp"
#include "rigidity/errors.hpp"

namespace rigidity {

double EnergyModel::value(const VecX& rho) const {
    const VecX f = residual_fn(rho);
    double e = 0.0;
    int row = 0;
    for (size_t i = 0; i < block_sizes.size(); ++i) {
        const int b = block_sizes[i];
        const VecX fi = f.segment(row, b);
        e += epsilon * omega.segment(row, b).dot(fi) + 0.5 * fi.dot(stiffness[i] * fi);
        row += b;
    }
    return e;
}

VecX EnergyModel::gradient(const VecX& rho, double h) const {
    VecX g(rho.size());
    for (int k = 0; k < rho.size(); ++k) {
        VecX p = rho, m = rho;
        p(k) += h;
        m(k) -= h;
        g(k) = (value(p) - value(m)) / (2.0 * h);
    }
    return g;
}

MatX EnergyModel::stiffness_full() const {
    int m = 0;
    for (int b : block_sizes) m += b;
    MatX K = MatX::Zero(m, m);
    int row = 0;
    for (size_t i = 0; i < block_sizes.size(); ++i) {
        K.block(row, row, block_sizes[i], block_sizes[i]) = stiffness[i];
        row += block_sizes[i];
    }
    return K;
}

double EnergyModel::min_stiffness_eigenvalue() const {
    double mn = DBL_MAX;
    for (const MatX& K : stiffness) {
        Eigen::SelfAdjointEigenSolver<MatX> es(K);
        mn = std::min(mn, es.eigenvalues().minCoeff());
    }
    return mn;
}

std::vector<VecX> selfstress_basis(const MatX& R, double tol_rank) {
    RankedSvd svd(R, tol_rank);
    const MatX B = svd.left_null_basis();
    std::vector<VecX> out;
    for (int c = 0; c < B.cols(); ++c) {
        VecX v = B.col(c);
        // deterministic sign: largest-magnitude entry positive
        int imax = 0;
        for (int i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
        if (v(imax) < 0) v = -v;
        out.push_back(v);
    }
    return out;
}

StressData stress_data(const VecX& omega, const ConstraintJets& cj, double tol_selfstress) {
    if (omega.size() != cj.R.rows())
        throw std::invalid_argument("stress_data: omega length does not match constraint count");
    const double eq = omega.size() ? (omega.transpose() * cj.R).cwiseAbs().maxCoeff() : 0.0;
    const double scale = std::max(1.0, omega.cwiseAbs().maxCoeff());
    if (eq > tol_selfstress * scale)
        throw std::invalid_argument("stress_data: omega is not a selfstress (omega^T R != 0)");
    if (cj.kmax < 4)
        throw std::out_of_range("stress_data: needs derivative tensors up to order 4");
    StressData sd{cj.tensor(2).contract_blocks(omega).as_matrix(),
                  cj.tensor(4).contract_blocks(omega),
                  cj.tensor(3).contract_blocks(omega)};
    return sd;
}

namespace {

EnergyModel finish_energy(EnergyModel e) {
    int m = 0;
    for (int b : e.block_sizes) m += b;
    if (e.stiffness.empty())
        for (int b : e.block_sizes) e.stiffness.push_back(MatX::Identity(b, b));
    if (static_cast<int>(e.stiffness.size()) != static_cast<int>(e.block_sizes.size()))
        throw std::invalid_argument("build_energy: one stiffness matrix per block required");
    for (size_t i = 0; i < e.stiffness.size(); ++i) {
        const MatX& K = e.stiffness[i];
        if (K.rows() != e.block_sizes[i] || K.cols() != e.block_sizes[i])
            throw std::invalid_argument("build_energy: stiffness block has wrong size");
        if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + K.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("build_energy: material stiffness not symmetric");
        Eigen::SelfAdjointEigenSolver<MatX> es(K);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("build_energy: material stiffness not positive definite");
    }
    if (e.omega.size() != m)
        throw std::invalid_argument("build_energy: omega length does not match constraint count");
    const double wnorm = e.omega.norm();
    if (e.epsilon * wnorm >= e.min_stiffness_eigenvalue() / kKappaGuard) {
        std::ostringstream os;
        os << "build_energy: prestress too large: eps*|omega| = " << e.epsilon * wnorm
           << " must stay below sigma_min(K)/" << kKappaGuard;
        throw std::invalid_argument(os.str());
    }
    return e;
}

} // namespace

EnergyModel build_energy(const Surface& s, const FoldingState& st, const VecX& omega,
                         double epsilon, const std::vector<MatX>& stiffness) {
    EnergyModel e;
    Surface copy = s;
    e.residual_fn = [copy](const VecX& rho) { return residual(copy, FoldingState{rho}); };
    for (const Loop& loop : s.loops) e.block_sizes.push_back(loop.is_cycle ? 6 : 3);
    e.stiffness = stiffness;
    e.omega = omega;
    e.epsilon = epsilon;
    e.rho0 = st.rho;
    e = finish_energy(std::move(e));
    // omega must be a selfstress of this configuration
    if (omega.cwiseAbs().maxCoeff() > 0.0) {
        const MatX R = rigidity_matrix(s, st);
        const double eq = (omega.transpose() * R).cwiseAbs().maxCoeff();
        if (eq > 1e-8 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("build_energy: omega is not a selfstress");
    }
    return e;
}

EnergyModel build_energy_raw(std::function<VecX(const VecX&)> residual_fn,
                             std::vector<int> block_sizes, const VecX& rho0, const MatX& R,
                             const VecX& omega, double epsilon,
                             const std::vector<MatX>& stiffness) {
    EnergyModel e;
    e.residual_fn = std::move(residual_fn);
    e.block_sizes = std::move(block_sizes);
    e.stiffness = stiffness;
    e.omega = omega;
    e.epsilon = epsilon;
    e.rho0 = rho0;
    e = finish_energy(std::move(e));
    if (omega.size() && omega.cwiseAbs().maxCoeff() > 0.0 && R.size()) {
        const double eq = (omega.transpose() * R).cwiseAbs().maxCoeff();
        if (eq > 1e-8 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("build_energy_raw: omega is not a selfstress");
    }
    return e;
}

std::vector<double> log_grid(double t_lo, double t_hi, int n) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2)
        throw std::invalid_argument("log_grid: need 0 < t_lo < t_hi and n >= 2");
    std::vector<double> g(n);
    const double l0 = std::log(t_lo), l1 = std::log(t_hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (n - 1));
    return g;
}

GrowthFit growth_probe(const EnergyModel& energy, const std::function<VecX(double)>& path,
                       const std::vector<double>& t_grid) {
    GrowthFit fit;
    const double e0 = energy.value(energy.rho0);
    const double floor = 1e2 * DBL_EPSILON * std::max(1.0, std::abs(e0));
    std::vector<double> lx, ly;
    int negatives = 0;
    for (double t : t_grid) {
        const VecX p = path(t);
        const double de = energy.value(p) - e0;
        const double r = (p - energy.rho0).norm();
        if (r <= 0.0) continue;
        if (de < 0.0) {
            ++negatives;
            continue;
        }
        if (de <= floor) continue;
        lx.push_back(std::log(r));
        ly.push_back(std::log(de));
    }
    if (lx.size() < 3) {
        fit.ok = false;
        fit.message = negatives == static_cast<int>(t_grid.size())
                          ? "energy decreases along the trajectory"
                          : "energy increment below the resolvable floor on the grid";
        return fit;
    }
    const LineFit lf = fit_line(lx, ly);
    fit.ok = true;
    fit.exponent = lf.slope;
    fit.fit_residual = lf.residual;
    fit.points_used = static_cast<int>(lx.size());
    if (negatives > 0) fit.message = "some grid points had decreasing energy";
    return fit;
}

GrowthFit growth_probe_jet(const EnergyModel& energy, const TrajectoryJet& jet,
                           const std::vector<double>& t_grid) {
    return growth_probe(
        energy, [&](double t) { return jet.at(t, energy.rho0); }, t_grid);
}

} // namespace rigidity
