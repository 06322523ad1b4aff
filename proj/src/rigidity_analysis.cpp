#include "rigidity/rigidity_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rigidity {

namespace {

unsigned long long factorial_ull(int n) {
    unsigned long long f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<unsigned long long>(i);
    return f;
}

// Deterministic unit vectors on the sphere (Box-Muller over mt19937_64, so
// the stream is platform-independent).
class SphereSampler {
public:
    explicit SphereSampler(unsigned long long seed) : rng_(seed) {}

    VecX next(int dim) {
        VecX v(dim);
        for (int i = 0; i < dim; ++i) v(i) = gaussian();
        const double n = v.norm();
        return n > 0 ? VecX(v / n) : next(dim);
    }

private:
    double uniform() {
        return (static_cast<double>(rng_()) + 0.5) / 18446744073709551616.0;
    }
    double gaussian() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }
    std::mt19937_64 rng_;
    bool have_ = false;
    double spare_ = 0.0;
};

int resolve_threads(const AnalysisOptions& opts) {
    int t = opts.threads;
    if (t <= 0) t = 1;
    return t;
}

// Run fn(i) for i in [0, n); results are collected by index so the outcome
// does not depend on the thread count.
template <typename T, typename Fn>
std::vector<T> indexed_map(int n, int threads, Fn&& fn) {
    std::vector<T> out(static_cast<size_t>(n));
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::future<void>> futs;
    const int chunks = std::min(threads, n);
    for (int c = 0; c < chunks; ++c) {
        futs.push_back(std::async(std::launch::async, [&, c]() {
            for (int i = c; i < n; i += chunks) out[i] = fn(i);
        }));
    }
    for (auto& f : futs) f.get();
    return out;
}

MatX sign_normalized(MatX B) {
    for (int c = 0; c < B.cols(); ++c) {
        int imax = 0;
        for (int i = 1; i < B.rows(); ++i)
            if (std::abs(B(i, c)) > std::abs(B(imax, c))) imax = i;
        if (B(imax, c) < 0) B.col(c) = -B.col(c);
    }
    return B;
}

// Quadric coefficient matrices M_k = A^T (omega_k . d2f) A over the null basis.
std::vector<MatX> null_space_quadrics(const std::vector<VecX>& stresses,
                                      const SymmetricTensor& D2, const MatX& A) {
    std::vector<MatX> M;
    for (const VecX& w : stresses)
        M.push_back(A.transpose() * D2.contract_blocks(w).as_matrix() * A);
    return M;
}

double min_eig(const MatX& M, VecX* evec = nullptr) {
    Eigen::SelfAdjointEigenSolver<MatX> es(M);
    if (evec) *evec = es.eigenvectors().col(0);
    return es.eigenvalues()(0);
}

MatX combine(const std::vector<MatX>& M, const VecX& w) {
    MatX S = MatX::Zero(M[0].rows(), M[0].cols());
    for (size_t k = 0; k < M.size(); ++k) S += w(static_cast<int>(k)) * M[k];
    return S;
}

// Projected-gradient ascent of lambda_min(sum w_k M_k) over the unit sphere.
std::pair<double, VecX> ascend_lambda_min(const std::vector<MatX>& M, VecX w, int iters) {
    double best = min_eig(combine(M, w));
    double step = 0.25;
    for (int it = 0; it < iters && step > 1e-14; ++it) {
        VecX v;
        min_eig(combine(M, w), &v);
        VecX g(M.size());
        for (size_t k = 0; k < M.size(); ++k) g(static_cast<int>(k)) = v.dot(M[k] * v);
        g -= g.dot(w) * w;
        if (g.norm() < 1e-15) break;
        const VecX cand = (w + step * g).normalized();
        const double val = min_eig(combine(M, cand));
        if (val > best) {
            best = val;
            w = cand;
        } else {
            step *= 0.5;
        }
    }
    return {best, w};
}

} // namespace

bool RigidityReport::undecided() const {
    if (prestress && prestress->verdict == Feasibility::undecided) return true;
    if (saddle && saddle->verdict == SaddleVerdict::indeterminate) return true;
    if (second_order && second_order->verdict == SecondOrderVerdict::undecided) return true;
    if (second_order_prestress &&
        second_order_prestress->verdict == PrestressOrder2Verdict::undecided)
        return true;
    return false;
}

FirstOrderResult first_order_test(const ConstraintJets& cj, const AnalysisOptions& opts) {
    FirstOrderResult out;
    if (cj.R.rows() == 0) {
        out.rigid = cj.n_rho == 0;
        out.nullity = cj.n_rho;
        out.null_basis = MatX::Identity(cj.n_rho, cj.n_rho);
        return out;
    }
    RankedSvd svd(cj.R, opts.tol_rank);
    out.nullity = cj.n_rho - svd.rank;
    out.rigid = out.nullity == 0;
    out.null_basis = sign_normalized(svd.null_basis());
    return out;
}

bool second_order_extendable(const ConstraintJets& cj, const std::vector<VecX>& stresses,
                             const VecX& rho1, double tol) {
    const double n1 = rho1.norm();
    if (n1 == 0.0) return true; // vacuous
    if (cj.R.rows() > 0 && (cj.R * rho1).cwiseAbs().maxCoeff() > 1e-8 * n1)
        throw std::invalid_argument("second_order_extendable: rho' is not a first-order flex");
    const VecX u = rho1 / n1;
    for (const VecX& w : stresses) {
        const double q = w.dot(cj.tensor(2).contract({u, u}));
        if (std::abs(q) >= tol) return false;
    }
    return true;
}

SecondOrderSolve solve_second_order(const ConstraintJets& cj, const VecX& rho_j, int j,
                                    const AnalysisOptions& opts) {
    if (j < 1) throw std::invalid_argument("solve_second_order: j must be >= 1");
    const double coeff = static_cast<double>(factorial_ull(2 * j)) /
                         (2.0 * std::pow(static_cast<double>(factorial_ull(j)), 2));
    const VecX rhs = -coeff * cj.tensor(2).contract({rho_j, rho_j});
    RankedSvd svd(cj.R, opts.tol_rank);
    SecondOrderSolve out;
    out.particular = svd.solve(rhs);
    out.homogeneous = svd.null_basis();
    out.residual = cj.R.rows() ? (cj.R * out.particular - rhs).cwiseAbs().maxCoeff() : 0.0;
    const double scale = std::max(1.0, rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0);
    if (out.residual > 1e-6 * scale)
        throw std::runtime_error(
            "solve_second_order: right-hand side not in the column space "
            "(contradicts extendability; tolerance failure)");
    return out;
}

namespace {

// Real common zeros (as unit rays, up to sign) of a list of quadratic forms
// on R^d, d <= 3. Empty list of nonzero forms means the whole space.
struct QuadricSolve {
    bool whole_space = false;
    bool undecided = false;
    std::vector<VecX> rays;
};

bool vanishes_on_all(const std::vector<MatX>& M, const VecX& a, double tol) {
    for (const MatX& Mk : M)
        if (std::abs(a.dot(Mk * a)) > tol) return false;
    return true;
}

void push_unique_ray(std::vector<VecX>& rays, const VecX& a) {
    for (const VecX& r : rays)
        if (std::abs(r.dot(a)) > 1.0 - 1e-8) return;
    rays.push_back(a);
}

QuadricSolve solve_quadric_system(const std::vector<MatX>& M_all, const AnalysisOptions& opts,
                                  double scale) {
    QuadricSolve out;
    const double tol = std::max(1e-11, 1e-10 * scale);
    std::vector<MatX> M;
    for (const MatX& Mk : M_all)
        if (Mk.cwiseAbs().maxCoeff() > tol) M.push_back(Mk);
    if (M.empty()) {
        out.whole_space = true;
        return out;
    }
    const int d = static_cast<int>(M[0].rows());
    if (d == 1) {
        // forms are nonzero scalars; only a = 0 solves
        return out;
    }
    if (d == 2) {
        // roots of the first nonzero binary form, filtered on the rest
        const MatX& Q = M[0];
        const double p = Q(0, 0), q = Q(0, 1), r = Q(1, 1);
        std::vector<VecX> cands;
        auto add = [&](double a1, double a2) {
            VecX a(2);
            a << a1, a2;
            const double n = a.norm();
            if (n > 0) cands.push_back(a / n);
        };
        if (std::abs(p) <= tol) add(1, 0);
        if (std::abs(r) <= tol) add(0, 1);
        // roots with a1 != 0: p + 2 q t + r t^2 = 0 for a = (1, t)
        if (std::abs(r) > tol) {
            const double disc = q * q - p * r;
            if (disc >= 0.0) {
                const double sd = std::sqrt(disc);
                add(1, (-q + sd) / r);
                add(1, (-q - sd) / r);
            } else if (disc > -tol * std::max(1.0, q * q + std::abs(p * r))) {
                add(1, -q / r);
            }
        } else if (std::abs(q) > tol) {
            add(1, -p / (2 * q));
        }
        for (const VecX& a : cands)
            if (vanishes_on_all(M, a, tol)) push_unique_ray(out.rays, a);
        return out;
    }
    if (d == 3) {
        // damped Gauss-Newton multistart on the sphere with duplicate deflation
        SphereSampler sampler(opts.seed);
        std::vector<VecX> starts;
        for (int i = 0; i < opts.multistarts; ++i) starts.push_back(sampler.next(3));
        for (const MatX& Mk : M) {
            Eigen::SelfAdjointEigenSolver<MatX> es(Mk);
            for (int c = 0; c < 3; ++c) starts.push_back(es.eigenvectors().col(c));
        }
        const int nm = static_cast<int>(M.size());
        auto refine = [&](VecX a) -> std::pair<bool, VecX> {
            double lambda = 1e-8;
            for (int it = 0; it < 200; ++it) {
                VecX q(nm);
                MatX J(nm, 3);
                for (int k = 0; k < nm; ++k) {
                    q(k) = a.dot(M[k] * a);
                    J.row(k) = 2.0 * (M[k] * a).transpose();
                }
                if (q.cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, scale))
                    return {true, a};
                const MatX H = J.transpose() * J + lambda * MatX::Identity(3, 3);
                const VecX delta = H.ldlt().solve(-J.transpose() * q);
                VecX cand = a + delta;
                const double n = cand.norm();
                if (n < 1e-12) return {false, a};
                cand /= n;
                double qn = 0, qo = 0;
                for (int k = 0; k < nm; ++k) {
                    qn += std::pow(cand.dot(M[k] * cand), 2);
                    qo += std::pow(a.dot(M[k] * a), 2);
                }
                if (qn < qo) {
                    a = cand;
                    lambda = std::max(lambda * 0.5, 1e-12);
                } else {
                    lambda *= 10.0;
                    if (lambda > 1e8) break;
                }
            }
            VecX q(nm);
            for (int k = 0; k < nm; ++k) q(k) = a.dot(M[k] * a);
            return {q.cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, scale), a};
        };
        const auto results = indexed_map<std::pair<bool, VecX>>(
            static_cast<int>(starts.size()), resolve_threads(opts),
            [&](int i) { return refine(starts[static_cast<size_t>(i)]); });
        for (const auto& [okflag, a] : results)
            if (okflag && vanishes_on_all(M, a, tol)) push_unique_ray(out.rays, a);
        return out;
    }
    out.undecided = true;
    return out;
}

} // namespace

SecondOrderResult second_order_test(const ConstraintJets& cj, const std::vector<VecX>& stresses,
                                    const MatX& null_basis, const AnalysisOptions& opts) {
    SecondOrderResult out;
    const int d = static_cast<int>(null_basis.cols());
    if (d == 0) {
        out.verdict = SecondOrderVerdict::not_applicable;
        out.note = "first-order rigid";
        return out;
    }
    if (stresses.empty()) {
        out.verdict = SecondOrderVerdict::flexible;
        out.all_directions_extendable = true;
        out.note = "no selfstress: every first-order flex extends";
        return out;
    }
    const std::vector<MatX> M = null_space_quadrics(stresses, cj.tensor(2), null_basis);
    double scale = 0.0;
    for (const MatX& Mk : M) scale = std::max(scale, Mk.cwiseAbs().maxCoeff());
    const QuadricSolve qs = solve_quadric_system(M, opts, scale);
    if (qs.whole_space) {
        out.verdict = SecondOrderVerdict::flexible;
        out.all_directions_extendable = true;
        out.note = "stress quadrics vanish identically on the null space";
        return out;
    }
    if (qs.undecided) {
        out.verdict = SecondOrderVerdict::undecided;
        out.note = "undecided: variety dimension too high (nullity > 3 with nontrivial quadrics)";
        return out;
    }
    std::vector<VecX> rays = qs.rays;
    for (VecX& a : rays) { // deterministic sign: largest-magnitude entry positive
        int imax = 0;
        for (int i = 1; i < a.size(); ++i)
            if (std::abs(a(i)) > std::abs(a(imax))) imax = i;
        if (a(imax) < 0) a = -a;
    }
    std::sort(rays.begin(), rays.end(), [](const VecX& x, const VecX& y) {
        for (int i = 0; i < x.size(); ++i)
            if (x(i) != y(i)) return x(i) < y(i);
        return false;
    });
    for (const VecX& a : rays) {
        SecondOrderRay ray;
        ray.a = a;
        ray.rho1 = null_basis * a;
        double qmax = 0.0;
        for (const MatX& Mk : M) qmax = std::max(qmax, std::abs(a.dot(Mk * a)));
        ray.max_qform = qmax;
        const SecondOrderSolve sol = solve_second_order(cj, ray.rho1, 1, opts);
        ray.rho2 = sol.particular;
        ray.solve_residual = sol.residual;
        out.rays.push_back(std::move(ray));
    }
    out.verdict = out.rays.empty() ? SecondOrderVerdict::rigid : SecondOrderVerdict::flexible;
    if (out.rays.empty()) out.note = "no nonzero first-order flex extends";
    return out;
}

PrestressSearchResult prestress_stability_search(const std::vector<VecX>& stresses,
                                                 const SymmetricTensor& D2,
                                                 const MatX& null_basis,
                                                 const AnalysisOptions& opts) {
    PrestressSearchResult out;
    if (stresses.empty()) {
        out.verdict = Feasibility::no_selfstress;
        out.best_lambda_min = 0.0;
        return out;
    }
    const std::vector<MatX> M = null_space_quadrics(stresses, D2, null_basis);
    const int nw = static_cast<int>(stresses.size());
    std::vector<VecX> starts;
    if (nw == 1) {
        VecX p(1), m(1);
        p << 1.0;
        m << -1.0;
        starts = {p, m};
    } else {
        SphereSampler sampler(opts.seed);
        for (int i = 0; i < opts.multistarts; ++i) starts.push_back(sampler.next(nw));
        for (int k = 0; k < nw; ++k) {
            VecX e = VecX::Zero(nw);
            e(k) = 1.0;
            starts.push_back(e);
            starts.push_back(-e);
        }
    }
    const auto results = indexed_map<std::pair<double, VecX>>(
        static_cast<int>(starts.size()), resolve_threads(opts),
        [&](int i) { return ascend_lambda_min(M, starts[static_cast<size_t>(i)], 300); });
    out.best_lambda_min = results[0].first;
    out.best_w = results[0].second;
    for (const auto& [val, w] : results) {
        if (val > out.best_lambda_min) {
            out.best_lambda_min = val;
            out.best_w = w;
        }
    }
    if (out.best_lambda_min > opts.undecided_band) {
        out.verdict = Feasibility::feasible;
        out.stabilizing_w = out.best_w;
    } else if (out.best_lambda_min < -opts.undecided_band) {
        out.verdict = Feasibility::infeasible;
    } else {
        out.verdict = Feasibility::undecided;
    }
    return out;
}

SaddleResult saddle_test(const std::vector<VecX>& stresses, const SymmetricTensor& D2,
                         const MatX& null_basis, const PrestressSearchResult& search,
                         const AnalysisOptions& opts) {
    SaddleResult out;
    if (stresses.empty()) {
        out.verdict = SaddleVerdict::no_selfstress;
        out.note = "no nonzero selfstress exists";
        return out;
    }
    const int nw = static_cast<int>(stresses.size());
    std::vector<MatX> Omega; // full stress matrices per basis stress
    for (const VecX& w : stresses) Omega.push_back(D2.contract_blocks(w).as_matrix());
    std::vector<MatX> M = null_space_quadrics(stresses, D2, null_basis);

    double scale = 0.0;
    for (const MatX& Om : Omega) scale = std::max(scale, Om.cwiseAbs().maxCoeff());
    const double band = opts.undecided_band * std::max(1.0, scale);

    std::vector<VecX> candidates;
    if (search.best_w.size()) candidates.push_back(search.best_w);
    for (int k = 0; k < nw; ++k) {
        VecX e = VecX::Zero(nw);
        e(k) = 1.0;
        candidates.push_back(e);
        candidates.push_back(-e);
    }
    SphereSampler sampler(opts.seed + 1);
    const int grid = std::max(4 * opts.multistarts, 64);
    for (int i = 0; i < grid; ++i) candidates.push_back(sampler.next(nw));

    bool any_inconclusive = false;
    for (const VecX& w : candidates) {
        ++out.candidates_checked;
        MatX Mw = combine(M, w);
        MatX Ow = combine(Omega, w);
        Eigen::SelfAdjointEigenSolver<MatX> es(Mw);
        bool violated = false, inconclusive = false, modulo_positive = true;
        for (int c = 0; c < es.eigenvalues().size(); ++c) {
            const double lam = es.eigenvalues()(c);
            const VecX v = null_basis * es.eigenvectors().col(c);
            if (lam < -band) {
                violated = true;
                modulo_positive = false;
                break;
            }
            if (lam <= band) {
                const double kick = (Ow * v).cwiseAbs().maxCoeff();
                if (kick > 10.0 * band) {
                    violated = true; // v^T Omega v = 0 but Omega v != 0
                    modulo_positive = false;
                    break;
                }
                if (kick > band) {
                    inconclusive = true;
                    modulo_positive = false;
                }
            }
        }
        if (!violated && !inconclusive && modulo_positive) {
            out.verdict = SaddleVerdict::not_saddle;
            out.counterexample_w = w;
            out.note = "found a stress that is positive modulo its kernel on the null space";
            return out;
        }
        if (inconclusive) any_inconclusive = true;
    }
    out.verdict = any_inconclusive ? SaddleVerdict::indeterminate : SaddleVerdict::saddle;
    if (out.verdict == SaddleVerdict::saddle)
        out.note = "every tested stress admits an energy-decreasing direction";
    else
        out.note = "scores within the tolerance band; no verdict";
    return out;
}

SecondOrderPrestressResult second_order_prestress_test(const ConstraintJets& cj,
                                                       const std::vector<VecX>& stresses,
                                                       const SecondOrderResult& flexes,
                                                       const AnalysisOptions& opts) {
    SecondOrderPrestressResult out;
    if (flexes.verdict == SecondOrderVerdict::undecided) {
        out.verdict = PrestressOrder2Verdict::undecided;
        out.note = "flex space undecided upstream";
        return out;
    }
    if (stresses.empty()) {
        out.verdict = PrestressOrder2Verdict::not_shown;
        out.note = "no selfstress available";
        return out;
    }
    const int nw = static_cast<int>(stresses.size());

    // restrict to stresses annihilating the third-order tensor (exact linear solve)
    const SymmetricTensor& D3 = cj.tensor(3);
    std::vector<SymmetricTensor> thirds;
    for (const VecX& w : stresses) thirds.push_back(D3.contract_blocks(w));
    std::vector<SymmetricTensor::Key> keys;
    for (const auto& t : thirds)
        for (const auto& [key, val] : t.entries())
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    MatX L = MatX::Zero(static_cast<int>(keys.size()), nw);
    for (int k = 0; k < nw; ++k)
        for (size_t r = 0; r < keys.size(); ++r) L(static_cast<int>(r), k) = thirds[k].get(keys[r])(0);
    MatX W0;
    if (L.rows() == 0) {
        W0 = MatX::Identity(nw, nw);
    } else {
        RankedSvd svd(L, opts.tol_rank);
        W0 = svd.null_basis();
    }
    if (W0.cols() == 0) {
        out.verdict = PrestressOrder2Verdict::not_shown;
        out.note = "no stress annihilates the third-order term";
        return out;
    }

    RankedSvd rsvd(cj.R, opts.tol_rank);
    const MatX A = rsvd.null_basis();

    // candidate flexes: rays from the second-order test
    struct Flex12 {
        VecX rho1, rho2;
    };
    std::vector<Flex12> flex_list;
    for (const SecondOrderRay& r : flexes.rays) flex_list.push_back({r.rho1, r.rho2});
    if (flexes.all_directions_extendable) {
        for (int c = 0; c < A.cols(); ++c) {
            const VecX rho1 = A.col(c);
            flex_list.push_back({rho1, solve_second_order(cj, rho1, 1, opts).particular});
        }
    }
    if (flex_list.empty()) {
        out.verdict = PrestressOrder2Verdict::not_shown;
        out.note = "no (1,2) flex to stabilize";
        return out;
    }

    auto evaluate = [&](const VecX& w_reduced) -> std::pair<bool, double> {
        VecX w = W0 * w_reduced;
        if (w.norm() == 0) return {false, 0.0};
        w /= w.norm();
        VecX omega = VecX::Zero(cj.R.rows());
        for (int k = 0; k < nw; ++k) omega += w(k) * stresses[static_cast<size_t>(k)];
        const MatX Om = cj.tensor(2).contract_blocks(omega).as_matrix();
        const MatX Mn = A.transpose() * Om * A;
        // [1] null(R) must be Omega-positive modulo Null(Omega)
        const double scale = std::max(1.0, Om.cwiseAbs().maxCoeff());
        const double band = opts.undecided_band * scale;
        Eigen::SelfAdjointEigenSolver<MatX> es(Mn);
        for (int c = 0; c < es.eigenvalues().size(); ++c) {
            const double lam = es.eigenvalues()(c);
            if (lam < -band) return {false, 0.0};
            if (lam <= band) {
                const VecX v = A * es.eigenvectors().col(c);
                if ((Om * v).cwiseAbs().maxCoeff() > 10.0 * band) return {false, 0.0};
            }
        }
        // [3] quartic positive over the (1,2) flexes (minimized over the
        // homogeneous second-order offsets)
        const SymmetricTensor OmII = cj.tensor(4).contract_blocks(omega);
        double worst = 0.0;
        bool first = true;
        for (const Flex12& fl : flex_list) {
            const VecX b = A.transpose() * (Om * fl.rho2);
            Eigen::SelfAdjointEigenSolver<MatX> esm(Mn);
            // minimize 3 (rho2 + A y)^T Om (rho2 + A y): PSD quadratic in y
            VecX y = VecX::Zero(Mn.rows());
            {
                // pseudo-solve Mn y = -b on the positive eigenspace
                const MatX U = esm.eigenvectors();
                const VecX lam = esm.eigenvalues();
                VecX rhs = U.transpose() * (-b);
                VecX yy = VecX::Zero(rhs.size());
                for (int c = 0; c < rhs.size(); ++c) {
                    if (lam(c) > band)
                        yy(c) = rhs(c) / lam(c);
                    else if (std::abs(rhs(c)) > band)
                        return {false, 0.0}; // unbounded below along a kernel direction
                }
                y = U * yy;
            }
            const VecX r2 = fl.rho2 + A * y;
            const double quad = 3.0 * r2.dot(Om * r2) +
                                OmII.contract({fl.rho1, fl.rho1, fl.rho1, fl.rho1})(0);
            if (first || quad < worst) {
                worst = quad;
                first = false;
            }
        }
        return {worst > opts.undecided_band, worst};
    };

    std::vector<VecX> starts;
    if (W0.cols() == 1) {
        VecX p(1), m(1);
        p << 1.0;
        m << -1.0;
        starts = {p, m};
    } else {
        SphereSampler sampler(opts.seed + 2);
        for (int i = 0; i < opts.multistarts; ++i) starts.push_back(sampler.next(static_cast<int>(W0.cols())));
        for (int c = 0; c < W0.cols(); ++c) {
            VecX e = VecX::Zero(W0.cols());
            e(c) = 1.0;
            starts.push_back(e);
            starts.push_back(-e);
        }
    }
    double best = 0.0;
    bool found = false;
    VecX best_w;
    for (const VecX& srt : starts) {
        const auto [okf, val] = evaluate(srt);
        if (okf && (!found || val > best)) {
            found = true;
            best = val;
            best_w = W0 * srt;
        }
    }
    if (found) {
        out.verdict = PrestressOrder2Verdict::stable;
        best_w /= best_w.norm();
        out.omega = VecX::Zero(cj.R.rows());
        for (int k = 0; k < nw; ++k) out.omega += best_w(k) * stresses[static_cast<size_t>(k)];
        out.min_quartic = best;
        out.note = "stabilizing stress found for order-4 growth";
    } else {
        out.verdict = PrestressOrder2Verdict::not_shown;
        out.note = "no tested stress satisfies the order-4 criteria";
    }
    return out;
}

RecursionResult nullity_one_order(const ConstraintJets& cj, int kmax,
                                  const AnalysisOptions& opts) {
    RecursionResult out;
    out.kmax = kmax;
    RankedSvd svd(cj.R, opts.tol_rank);
    const int nullity = cj.n_rho - svd.rank;
    if (nullity != 1)
        throw std::invalid_argument("nullity_one_order: rigidity matrix nullity must be exactly 1");
    VecX v1 = sign_normalized(svd.null_basis()).col(0);
    out.jet.derivs = {v1};
    for (int i = 1; i + 1 <= kmax; ++i) {
        const VecX b = -df_dt_tail(out.jet, cj, i + 1);
        const double res = svd.column_space_residual(b);
        out.step_residuals.push_back(res);
        // augmented rank with the same threshold policy
        MatX aug(cj.R.rows(), cj.n_rho + 1);
        aug.leftCols(cj.n_rho) = cj.R;
        aug.rightCols(1) = b;
        const int aug_rank = numerical_rank(aug, opts.tol_rank);
        out.aug_ranks.push_back(aug_rank);
        if (aug_rank > svd.rank) {
            out.decided = true;
            out.order = i + 1;
            out.jet.derivs.resize(static_cast<size_t>(i)); // certified (1, i) flex
            return out;
        }
        out.jet.derivs.push_back(svd.solve(b));
    }
    out.flexible_to_kmax = true;
    return out;
}

TrajectoryJet transform_1k_flex(const TrajectoryJet& jet, const std::vector<double>& c) {
    const int k = static_cast<int>(jet.derivs.size());
    if (k < 1) throw std::invalid_argument("transform_1k_flex: empty jet");
    if (k > 6)
        throw std::invalid_argument("transform_1k_flex: coefficient ledger expanded to order 6");
    if (static_cast<int>(c.size()) < k - 1)
        throw std::invalid_argument("transform_1k_flex: need k-1 constants");
    const VecX& r1 = jet.derivs[0];
    TrajectoryJet out;
    out.derivs.push_back(r1);
    auto cc = [&](int i) { return c[static_cast<size_t>(i - 1)]; };
    if (k >= 2) out.derivs.push_back(jet.derivs[1] - cc(1) * r1);
    if (k >= 3)
        out.derivs.push_back(jet.derivs[2] - 3.0 * cc(1) * out.derivs[1] - cc(2) * r1);
    if (k >= 4)
        out.derivs.push_back(jet.derivs[3] - 6.0 * cc(1) * out.derivs[2] -
                             (3.0 * cc(1) * cc(1) + 4.0 * cc(2)) * out.derivs[1] - cc(3) * r1);
    if (k >= 5)
        out.derivs.push_back(jet.derivs[4] - 10.0 * cc(1) * out.derivs[3] -
                             (15.0 * cc(1) * cc(1) + 10.0 * cc(2)) * out.derivs[2] -
                             (10.0 * cc(1) * cc(2) + 5.0 * cc(3)) * out.derivs[1] - cc(4) * r1);
    if (k >= 6)
        out.derivs.push_back(jet.derivs[5] - 15.0 * cc(1) * out.derivs[4] -
                             (45.0 * cc(1) * cc(1) + 20.0 * cc(2)) * out.derivs[3] -
                             (15.0 * std::pow(cc(1), 3) + 60.0 * cc(1) * cc(2) + 15.0 * cc(3)) *
                                 out.derivs[2] -
                             (10.0 * cc(2) * cc(2) + 15.0 * cc(1) * cc(3) + 6.0 * cc(4)) *
                                 out.derivs[1] -
                             cc(5) * r1);
    return out;
}

TrajectoryJet canonicalize_1k_flex(const TrajectoryJet& jet) {
    const int k = static_cast<int>(jet.derivs.size());
    if (k < 1) throw std::invalid_argument("canonicalize_1k_flex: empty jet");
    const double n1 = jet.derivs[0].norm();
    if (n1 == 0) throw std::invalid_argument("canonicalize_1k_flex: jet is not 1-active");
    // reparametrize t -> t/n1 so |rho'| = 1
    TrajectoryJet scaled;
    double p = 1.0;
    for (int i = 0; i < k; ++i) {
        p /= n1;
        scaled.derivs.push_back(jet.derivs[static_cast<size_t>(i)] * p);
    }
    const VecX r1 = scaled.derivs[0];
    // peel off the projections; each c_i is chosen so phi^{(i+1)} _|_ rho'
    std::vector<double> c;
    TrajectoryJet cur = scaled;
    for (int i = 1; i < k; ++i) {
        std::vector<double> cpad = c;
        cpad.push_back(0.0);
        while (cpad.size() < static_cast<size_t>(k - 1)) cpad.push_back(0.0);
        const TrajectoryJet probe = transform_1k_flex(scaled, cpad);
        c.push_back(probe.derivs[static_cast<size_t>(i)].dot(r1));
    }
    while (c.size() < static_cast<size_t>(std::max(0, k - 1))) c.push_back(0.0);
    return transform_1k_flex(scaled, c);
}

std::vector<double> validate_certificate(const FlexCertificate& cert, const ConstraintJets& cj) {
    std::vector<double> norms;
    for (int i = cert.j; i <= cert.k; ++i) {
        const VecX v = df_dt(cert.jet, cj, i, true);
        norms.push_back(v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
    }
    return norms;
}

RigidityReport classify(const Surface& s, const FoldingState& st, const AnalysisOptions& opts) {
    RigidityReport rep;
    rep.options = opts;
    const ConstraintJets cj = build_constraint_jets(s, st, opts.kmax, opts.tol_config);
    rep.n_rho = cj.n_rho;
    rep.n_constraints = static_cast<int>(cj.R.rows());
    rep.first_order = first_order_test(cj, opts);
    rep.selfstresses = selfstress_basis(cj.R, opts.tol_rank);
    if (rep.first_order.rigid) return rep;

    const MatX& A = rep.first_order.null_basis;
    rep.prestress = prestress_stability_search(rep.selfstresses, cj.tensor(2), A, opts);
    if (rep.prestress->verdict == Feasibility::feasible) {
        SaddleResult sr;
        sr.verdict = SaddleVerdict::not_saddle;
        sr.note = "prestress stable";
        rep.saddle = sr;
    } else {
        rep.saddle = saddle_test(rep.selfstresses, cj.tensor(2), A, *rep.prestress, opts);
    }

    rep.second_order = second_order_test(cj, rep.selfstresses, A, opts);

    if (rep.prestress->verdict == Feasibility::feasible) {
        SecondOrderPrestressResult sop;
        sop.verdict = PrestressOrder2Verdict::skipped;
        sop.note = "skipped: prestress stable";
        rep.second_order_prestress = sop;
    } else if (rep.saddle->verdict == SaddleVerdict::saddle) {
        SecondOrderPrestressResult sop;
        sop.verdict = PrestressOrder2Verdict::skipped;
        sop.note = "skipped: saddle";
        rep.second_order_prestress = sop;
    } else if (rep.second_order->verdict == SecondOrderVerdict::flexible ||
               rep.second_order->verdict == SecondOrderVerdict::undecided) {
        rep.second_order_prestress =
            second_order_prestress_test(cj, rep.selfstresses, *rep.second_order, opts);
    } else {
        SecondOrderPrestressResult sop;
        sop.verdict = PrestressOrder2Verdict::skipped;
        sop.note = "skipped: second-order rigid";
        rep.second_order_prestress = sop;
    }

    if (rep.first_order.nullity == 1) rep.recursion = nullity_one_order(cj, opts.kmax, opts);

    // certificates, re-validated through the jet machinery
    for (int c = 0; c < A.cols(); ++c) {
        FlexCertificate cert;
        cert.kind = "first_order";
        cert.j = 1;
        cert.k = 1;
        cert.jet.derivs = {A.col(c)};
        cert.residual_norms = validate_certificate(cert, cj);
        rep.certificates.push_back(std::move(cert));
    }
    if (rep.second_order) {
        for (const SecondOrderRay& r : rep.second_order->rays) {
            FlexCertificate cert;
            cert.kind = "second_order";
            cert.j = 1;
            cert.k = 2;
            cert.jet.derivs = {r.rho1, r.rho2};
            cert.residual_norms = validate_certificate(cert, cj);
            rep.certificates.push_back(std::move(cert));
        }
    }
    if (rep.recursion && rep.recursion->jet.derivs.size() >= 1) {
        FlexCertificate cert;
        cert.kind = "recursion";
        cert.j = 1;
        cert.k = static_cast<int>(rep.recursion->jet.derivs.size());
        cert.jet = rep.recursion->jet;
        cert.residual_norms = validate_certificate(cert, cj);
        rep.certificates.push_back(std::move(cert));
    }
    return rep;
}

} // namespace rigidity
