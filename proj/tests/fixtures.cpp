#include "fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "rigidity/linalg.hpp"

#ifndef RIGIDITY_DATA_DIR
#define RIGIDITY_DATA_DIR "data"
#endif

namespace fixtures {

using rigidity::rot_axis;
using rigidity::rot_z;
using rigidity::SymmetricTensor;

std::string data_path(const std::string& name) {
    return std::string(RIGIDITY_DATA_DIR) + "/" + name;
}

Surface load(const std::string& name) { return rigidity::load_surface_file(data_path(name)); }

namespace {

double closure_gap(double alpha, double phi2, double phi3, std::vector<Vec3>* out = nullptr) {
    const Vec3 u1(1, 0, 0);
    const Vec3 n1(0, 0, 1);
    const Vec3 u2 = rot_z(alpha) * u1;
    const Mat3 R2 = rot_axis(u2, phi2);
    const Vec3 n2 = R2 * n1;
    const Vec3 u3 = R2 * rot_axis(n1, alpha) * u2;
    const Mat3 R3 = rot_axis(u3, phi3);
    const Vec3 u4 = R3 * rot_axis(n2, alpha) * u3;
    if (out) *out = {u1, u2, u3, u4};
    return u4.dot(u1) - std::cos(alpha);
}

} // namespace

ConeOracle cone_oracle(double phi2) {
    const double alpha = M_PI / 3.0;
    // bracket and bisect the closure gap over phi3
    double lo = 1e-9, hi = 0.9 * M_PI;
    double prev = closure_gap(alpha, phi2, lo), pprev = lo;
    bool bracketed = false;
    const int scan = 4000;
    for (int i = 1; i <= scan; ++i) {
        const double p = lo + (hi - lo) * static_cast<double>(i) / scan;
        const double f = closure_gap(alpha, phi2, p);
        if (prev * f <= 0) {
            lo = pprev;
            hi = p;
            bracketed = true;
            break;
        }
        prev = f;
        pprev = p;
    }
    if (!bracketed) throw std::runtime_error("cone_oracle: no closure bracket");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (closure_gap(alpha, phi2, lo) * closure_gap(alpha, phi2, mid) <= 0)
            hi = mid;
        else
            lo = mid;
    }
    ConeOracle out;
    out.phi2 = phi2;
    out.phi3 = 0.5 * (lo + hi);
    closure_gap(alpha, phi2, out.phi3, &out.creases);
    out.coordinates.push_back(Vec3::Zero());
    for (const Vec3& u : out.creases) out.coordinates.push_back(u);

    // folding angles straight from the construction: panel k spans creases
    // (u_{k+1}, u_{k+2}); crease with angle index k is edge (apex, k+1),
    // shared by panels (k-1, k), fold measured from panel k-1 to panel k
    // about the outward crease direction.
    std::vector<Vec3> normals;
    for (int k = 0; k < 4; ++k) {
        const Vec3& a = out.creases[static_cast<size_t>(k)];
        const Vec3& b = out.creases[static_cast<size_t>((k + 1) % 4)];
        normals.push_back(a.cross(b).normalized());
    }
    out.folding_angles = VecX::Zero(4);
    for (int k = 0; k < 4; ++k) {
        const Vec3& u = out.creases[static_cast<size_t>(k)];
        const Vec3& na = normals[static_cast<size_t>((k + 3) % 4)];
        const Vec3& nb = normals[static_cast<size_t>(k)];
        out.folding_angles(k) = std::atan2(na.cross(nb).dot(u), na.dot(nb));
    }
    return out;
}

namespace {

ConstraintJets make_cj(int n_rho, int m, const MatX& R, int kmax) {
    ConstraintJets cj;
    cj.n_rho = n_rho;
    cj.rho0 = VecX::Zero(n_rho);
    cj.R = R;
    cj.kmax = kmax;
    for (int k = 2; k <= kmax; ++k) cj.D.emplace(k, SymmetricTensor(k, n_rho, m));
    return cj;
}

} // namespace

ToySystem toy_quadric(double c) {
    ToySystem t;
    t.block_sizes = {1};
    MatX R = MatX::Zero(1, 2);
    t.cj = make_cj(2, 1, R, 4);
    VecX v(1);
    v << 2.0;
    t.cj.D.at(2).set({0, 0}, v);
    v << 2.0 * c;
    t.cj.D.at(2).set({1, 1}, v);
    t.residual = [c](const VecX& rho) {
        VecX f(1);
        f << rho(0) * rho(0) + c * rho(1) * rho(1);
        return f;
    };
    return t;
}

ToySystem toy_parabola_rigid() {
    ToySystem t;
    t.block_sizes = {1, 1};
    MatX R = MatX::Zero(2, 2);
    R(0, 1) = 1.0;
    t.cj = make_cj(2, 2, R, 4);
    VecX v = VecX::Zero(2);
    v(1) = 2.0;
    t.cj.D.at(2).set({0, 0}, v);
    t.residual = [](const VecX& rho) {
        VecX f(2);
        f << rho(1), rho(0) * rho(0);
        return f;
    };
    return t;
}

ToySystem toy_quartic_stable() {
    ToySystem t;
    t.block_sizes = {1, 1};
    MatX R = MatX::Zero(2, 2);
    R(0, 1) = 1.0;
    t.cj = make_cj(2, 2, R, 4);
    VecX v = VecX::Zero(2);
    v(1) = 24.0; // d^4(rho1^4)/drho1^4
    t.cj.D.at(4).set({0, 0, 0, 0}, v);
    t.residual = [](const VecX& rho) {
        VecX f(2);
        f << rho(1), std::pow(rho(0), 4);
        return f;
    };
    return t;
}

ToySystem toy_hyperbolic() {
    ToySystem t;
    t.block_sizes = {1};
    MatX R = MatX::Zero(1, 2);
    t.cj = make_cj(2, 1, R, 4);
    VecX v(1);
    v << 1.0; // d^2(rho1 rho2)/drho1 drho2
    t.cj.D.at(2).set({0, 1}, v);
    t.residual = [](const VecX& rho) {
        VecX f(1);
        f << rho(0) * rho(1);
        return f;
    };
    return t;
}

VecX random_vector(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    VecX v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    return v;
}

TrajectoryJet random_jet(std::mt19937_64& rng, int n, int order, double scale) {
    TrajectoryJet jet;
    for (int i = 0; i < order; ++i) jet.derivs.push_back(random_vector(rng, n, scale));
    return jet;
}

} // namespace fixtures
