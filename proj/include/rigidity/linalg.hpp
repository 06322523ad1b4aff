#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rigidity {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

Mat3 rot_z(double a);
Mat3 rot_x(double a);
Mat3 skew(const Vec3& v);
Mat3 rot_axis(const Vec3& axis, double a);

// Homogeneous transform with rotation R and translation t.
Mat4 make_pose(const Mat3& R, const Vec3& t);
Mat4 pose_inverse(const Mat4& T);

// Rotation about the line through p with unit direction u.
Mat4 rot_about_line(const Vec3& p, const Vec3& u, double a);

// SVD-backed numerical rank utilities. The default threshold is
// max(m, n) * sigma_max * 1e-12; pass tol >= 0 to override with an
// absolute singular-value threshold.
struct RankedSvd {
    Eigen::JacobiSVD<MatX> svd;
    double threshold = 0.0;
    int rank = 0;

    explicit RankedSvd(const MatX& A, double tol = -1.0);

    // Orthonormal basis of the right null space (columns).
    MatX null_basis() const;
    // Orthonormal basis of the left null space (columns).
    MatX left_null_basis() const;
    // Minimum-norm least-squares solution of A x = b.
    VecX solve(const VecX& b) const;
    // Distance of b from the column space of A.
    double column_space_residual(const VecX& b) const;
};

int numerical_rank(const MatX& A, double tol = -1.0);

// Principal angles (radians, ascending) between the column spaces of U and V.
std::vector<double> principal_angles(const MatX& U, const MatX& V);

// Least-squares slope of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of fit residuals
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace rigidity
