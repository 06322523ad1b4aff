#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rigidity/energy.hpp"
#include "rigidity/jets.hpp"

namespace rigidity {

struct AnalysisOptions {
    int kmax = kDefaultKMax;
    double tol_rank = -1.0;   // absolute SVD threshold; < 0 selects the automatic rule
    double tol_config = kDefaultTolConfig;
    double tol_flex = 1e-9;   // residual tolerance for flex certificates
    double undecided_band = 1e-8;
    int multistarts = 64;
    unsigned long long seed = 2025;
    int threads = 1; // multistart evaluation; results are thread-count invariant
};

struct FirstOrderResult {
    bool rigid = false;
    int nullity = 0;
    MatX null_basis; // n_rho x nullity, orthonormal
};

enum class Feasibility { feasible, infeasible, undecided, no_selfstress };

struct PrestressSearchResult {
    Feasibility verdict = Feasibility::no_selfstress;
    double best_lambda_min = 0.0;
    VecX best_w;        // coordinates in the selfstress basis
    VecX stabilizing_w; // set when feasible
};

enum class SaddleVerdict { saddle, not_saddle, indeterminate, no_selfstress };

struct SaddleResult {
    SaddleVerdict verdict = SaddleVerdict::no_selfstress;
    int candidates_checked = 0;
    VecX counterexample_w; // modulo-positive candidate when not_saddle
    std::string note;
};

enum class SecondOrderVerdict { rigid, flexible, undecided, not_applicable };

struct SecondOrderRay {
    VecX a;    // coordinates in the null basis, unit
    VecX rho1; // A * a
    VecX rho2; // minimum-norm extension
    double max_qform = 0.0;       // worst quadric value at the ray
    double solve_residual = 0.0;  // |R rho2 + d2f (rho1 x rho1)|_inf
};

struct SecondOrderResult {
    SecondOrderVerdict verdict = SecondOrderVerdict::not_applicable;
    bool all_directions_extendable = false;
    std::vector<SecondOrderRay> rays;
    std::string note;
};

struct SecondOrderSolve {
    VecX particular;
    MatX homogeneous;        // null basis of R
    double residual = 0.0;   // |R x - rhs|_inf
};

enum class PrestressOrder2Verdict { stable, not_shown, skipped, undecided };

struct SecondOrderPrestressResult {
    PrestressOrder2Verdict verdict = PrestressOrder2Verdict::skipped;
    VecX omega;              // stabilizing stress (full constraint space) when stable
    double min_quartic = 0.0;
    std::string note;
};

struct RecursionResult {
    bool decided = false;          // an order was certified rigid
    int order = 0;                 // rigidity order when decided
    bool flexible_to_kmax = false;
    int kmax = 0;
    std::vector<int> aug_ranks;        // rank of [R | b_i] per step
    std::vector<double> step_residuals; // column-space residual of b_i
    TrajectoryJet jet;                 // canonical certificate (v1, v2, ...)
};

struct FlexCertificate {
    std::string kind; // "first_order" | "second_order" | "recursion"
    int j = 1;        // active order
    int k = 1;        // constraint derivatives vanish for j..k
    TrajectoryJet jet;
    std::vector<double> residual_norms; // |d^i f/dt^i|_inf for i = j..k
};

struct RigidityReport {
    AnalysisOptions options;
    int n_rho = 0;
    int n_constraints = 0;
    FirstOrderResult first_order;
    std::vector<VecX> selfstresses;
    std::optional<PrestressSearchResult> prestress;
    std::optional<SaddleResult> saddle;
    std::optional<SecondOrderResult> second_order;
    std::optional<SecondOrderPrestressResult> second_order_prestress;
    std::optional<RecursionResult> recursion;
    std::vector<FlexCertificate> certificates;

    bool undecided() const;
};

FirstOrderResult first_order_test(const ConstraintJets& cj, const AnalysisOptions& opts = {});

bool second_order_extendable(const ConstraintJets& cj, const std::vector<VecX>& stresses,
                             const VecX& rho1, double tol = 1e-9);

// Solve df/drho . rho^(2j) + (2j)!/(2 (j!)^2) d2f/drho^2 . (rho^(j) x rho^(j)) = 0
// for the minimum-norm rho^(2j).
SecondOrderSolve solve_second_order(const ConstraintJets& cj, const VecX& rho_j, int j,
                                    const AnalysisOptions& opts = {});

SecondOrderResult second_order_test(const ConstraintJets& cj, const std::vector<VecX>& stresses,
                                    const MatX& null_basis, const AnalysisOptions& opts = {});

PrestressSearchResult prestress_stability_search(const std::vector<VecX>& stresses,
                                                 const SymmetricTensor& D2,
                                                 const MatX& null_basis,
                                                 const AnalysisOptions& opts = {});

SaddleResult saddle_test(const std::vector<VecX>& stresses, const SymmetricTensor& D2,
                         const MatX& null_basis, const PrestressSearchResult& search,
                         const AnalysisOptions& opts = {});

SecondOrderPrestressResult second_order_prestress_test(const ConstraintJets& cj,
                                                       const std::vector<VecX>& stresses,
                                                       const SecondOrderResult& flexes,
                                                       const AnalysisOptions& opts = {});

RecursionResult nullity_one_order(const ConstraintJets& cj, int kmax,
                                  const AnalysisOptions& opts = {});

// Eq-ledger transform of a (1,k) flex by free constants c1..c5; preserves the
// flex property. Supports k <= 6.
TrajectoryJet transform_1k_flex(const TrajectoryJet& jet, const std::vector<double>& c);

// Reparametrize so |rho'| = 1 and project the higher derivatives onto the
// orthogonal complement of rho' (the unique canonical representative).
TrajectoryJet canonicalize_1k_flex(const TrajectoryJet& jet);

RigidityReport classify(const Surface& s, const FoldingState& st,
                        const AnalysisOptions& opts = {});

// Library-level verification that a certificate annihilates df/dt for the
// orders it claims.
std::vector<double> validate_certificate(const FlexCertificate& cert, const ConstraintJets& cj);

} // namespace rigidity
