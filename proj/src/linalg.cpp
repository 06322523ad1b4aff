#include "rigidity/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace rigidity {

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 R;
    R << c, -s, 0,
         s,  c, 0,
         0,  0, 1;
    return R;
}

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 R;
    R << 1, 0,  0,
         0, c, -s,
         0, s,  c;
    return R;
}

Mat3 skew(const Vec3& v) {
    Mat3 S;
    S <<     0, -v.z(),  v.y(),
         v.z(),      0, -v.x(),
        -v.y(),  v.x(),      0;
    return S;
}

Mat3 rot_axis(const Vec3& axis, double a) {
    const Vec3 u = axis.normalized();
    const Mat3 K = skew(u);
    return Mat3::Identity() + std::sin(a) * K + (1.0 - std::cos(a)) * (K * K);
}

Mat4 make_pose(const Mat3& R, const Vec3& t) {
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = R;
    T.topRightCorner<3, 1>() = t;
    return T;
}

Mat4 pose_inverse(const Mat4& T) {
    const Mat3 R = T.topLeftCorner<3, 3>();
    const Vec3 t = T.topRightCorner<3, 1>();
    return make_pose(R.transpose(), -(R.transpose() * t));
}

Mat4 rot_about_line(const Vec3& p, const Vec3& u, double a) {
    const Mat3 R = rot_axis(u, a);
    return make_pose(R, p - R * p);
}

RankedSvd::RankedSvd(const MatX& A, double tol)
    : svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV) {
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    threshold = tol >= 0.0
                    ? tol
                    : static_cast<double>(std::max(A.rows(), A.cols())) * smax * 1e-12;
    rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > threshold) ++rank;
}

MatX RankedSvd::null_basis() const {
    const int n = static_cast<int>(svd.matrixV().rows());
    return svd.matrixV().rightCols(n - rank);
}

MatX RankedSvd::left_null_basis() const {
    const int m = static_cast<int>(svd.matrixU().rows());
    return svd.matrixU().rightCols(m - rank);
}

VecX RankedSvd::solve(const VecX& b) const {
    const VecX c = svd.matrixU().transpose() * b;
    VecX y = VecX::Zero(svd.matrixV().cols());
    for (int i = 0; i < rank; ++i) y(i) = c(i) / svd.singularValues()(i);
    return svd.matrixV() * y;
}

double RankedSvd::column_space_residual(const VecX& b) const {
    const VecX c = svd.matrixU().transpose() * b;
    double r2 = 0.0;
    for (int i = rank; i < c.size(); ++i) r2 += c(i) * c(i);
    return std::sqrt(r2);
}

int numerical_rank(const MatX& A, double tol) { return RankedSvd(A, tol).rank; }

std::vector<double> principal_angles(const MatX& U, const MatX& V) {
    Eigen::HouseholderQR<MatX> qu(U), qv(V);
    MatX Qu = qu.householderQ() * MatX::Identity(U.rows(), U.cols());
    MatX Qv = qv.householderQ() * MatX::Identity(V.rows(), V.cols());
    Eigen::JacobiSVD<MatX> s(Qu.transpose() * Qv);
    std::vector<double> angles;
    for (int i = static_cast<int>(s.singularValues().size()) - 1; i >= 0; --i) {
        double c = std::min(1.0, std::max(-1.0, s.singularValues()(i)));
        angles.push_back(std::acos(c));
    }
    return angles;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double r2 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        r2 += e * e;
    }
    f.residual = std::sqrt(r2 / n);
    return f;
}

} // namespace rigidity
