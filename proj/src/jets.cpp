#include "rigidity/jets.hpp"

#include <cmath>
#include <stdexcept>

#include "rigidity/energy.hpp"

namespace rigidity {

namespace {

unsigned long long factorial(int n) {
    unsigned long long f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<unsigned long long>(i);
    return f;
}

const VecX& jet_deriv(const TrajectoryJet& jet, int j, bool pad_free, int dim,
                      const VecX& zero) {
    if (j <= static_cast<int>(jet.derivs.size())) {
        const VecX& v = jet.derivs[j - 1];
        if (v.size() != dim) throw std::invalid_argument("jet derivative has wrong length");
        return v;
    }
    if (!pad_free)
        throw std::invalid_argument("jet is shorter than the requested order; "
                                    "mark trailing entries free to pad with zeros");
    return zero;
}

} // namespace

int TrajectoryJet::active_order(double tol) const {
    for (size_t i = 0; i < derivs.size(); ++i)
        if (derivs[i].cwiseAbs().maxCoeff() > tol) return static_cast<int>(i) + 1;
    return 0;
}

VecX TrajectoryJet::at(double t, const VecX& rho0) const {
    VecX out = rho0;
    double tf = 1.0;
    for (size_t i = 0; i < derivs.size(); ++i) {
        tf *= t / static_cast<double>(i + 1);
        out += tf * derivs[i];
    }
    return out;
}

std::vector<Partition> enumerate_partitions(int i) {
    if (i < 1) throw std::invalid_argument("enumerate_partitions: order must be >= 1");
    std::vector<Partition> out;
    std::vector<int> mult(i, 0);
    // choose m_j for j = i down to 1 with remaining weight tracked
    std::function<void(int, int)> rec = [&](int j, int remaining) {
        if (j == 0) {
            if (remaining != 0) return;
            Partition p;
            p.mult = mult;
            p.order = i;
            p.tensor_order = 0;
            unsigned long long denom_multinomial = 1, denom_display = 1;
            for (int q = 1; q <= i; ++q) {
                const int m = mult[q - 1];
                p.tensor_order += m;
                denom_multinomial *= factorial(m);
                denom_display *= factorial(m);
                for (int r = 0; r < m; ++r) denom_display *= factorial(q);
            }
            p.multinomial = factorial(i) / denom_multinomial;
            p.display_coeff = factorial(i) / denom_display;
            out.push_back(std::move(p));
            return;
        }
        for (int m = 0; m * j <= remaining; ++m) {
            mult[j - 1] = m;
            rec(j - 1, remaining - m * j);
        }
        mult[j - 1] = 0;
    };
    rec(i, i);
    return out;
}

VecX df_dt(const TrajectoryJet& jet, const ConstraintJets& cj, int i, bool pad_free) {
    if (i < 1) throw std::invalid_argument("df_dt: order must be >= 1");
    const VecX zero = VecX::Zero(cj.n_rho);
    VecX out = VecX::Zero(cj.R.rows());
    for (const Partition& p : enumerate_partitions(i)) {
        if (p.tensor_order > 1 && p.tensor_order > cj.kmax)
            throw std::out_of_range("df_dt: requested order needs derivative tensors beyond k_max");
        std::vector<VecX> vs;
        for (int j = 1; j <= i; ++j)
            for (int r = 0; r < p.mult[j - 1]; ++r)
                vs.push_back(jet_deriv(jet, j, pad_free, cj.n_rho, zero));
        const double coeff = static_cast<double>(p.display_coeff);
        if (p.tensor_order == 1)
            out += coeff * (cj.R * vs[0]);
        else
            out += coeff * cj.tensor(p.tensor_order).contract(vs);
    }
    return out;
}

VecX df_dt_tail(const TrajectoryJet& jet, const ConstraintJets& cj, int i) {
    if (i < 1) throw std::invalid_argument("df_dt_tail: order must be >= 1");
    const VecX zero = VecX::Zero(cj.n_rho);
    VecX out = VecX::Zero(cj.R.rows());
    for (const Partition& p : enumerate_partitions(i)) {
        if (p.tensor_order == 1 && p.mult[i - 1] == 1) continue; // leading R term
        if (p.tensor_order > cj.kmax)
            throw std::out_of_range("df_dt_tail: requested order needs tensors beyond k_max");
        std::vector<VecX> vs;
        for (int j = 1; j <= i; ++j)
            for (int r = 0; r < p.mult[j - 1]; ++r)
                vs.push_back(jet_deriv(jet, j, false, cj.n_rho, zero));
        out += static_cast<double>(p.display_coeff) * cj.tensor(p.tensor_order).contract(vs);
    }
    return out;
}

VecX df_dt_expanded(const TrajectoryJet& jet, const ConstraintJets& cj, int i) {
    if (i < 1 || i > 6)
        throw std::invalid_argument("df_dt_expanded: only orders 1..6 are written out");
    const VecX zero = VecX::Zero(cj.n_rho);
    auto d = [&](int j) -> const VecX& { return jet_deriv(jet, j, false, cj.n_rho, zero); };
    auto D = [&](int k) -> const SymmetricTensor& { return cj.tensor(k); };
    auto C = [&](int k, const std::vector<VecX>& vs) { return D(k).contract(vs); };
    const MatX& R = cj.R;
    switch (i) {
    case 1:
        return R * d(1);
    case 2:
        return R * d(2) + C(2, {d(1), d(1)});
    case 3:
        return R * d(3) + 3.0 * C(2, {d(2), d(1)}) + C(3, {d(1), d(1), d(1)});
    case 4:
        return R * d(4) + 4.0 * C(2, {d(3), d(1)}) + 3.0 * C(2, {d(2), d(2)}) +
               6.0 * C(3, {d(2), d(1), d(1)}) + C(4, {d(1), d(1), d(1), d(1)});
    case 5:
        return R * d(5) + 5.0 * C(2, {d(4), d(1)}) + 10.0 * C(2, {d(3), d(2)}) +
               10.0 * C(3, {d(3), d(1), d(1)}) + 15.0 * C(3, {d(2), d(2), d(1)}) +
               10.0 * C(4, {d(2), d(1), d(1), d(1)}) + C(5, {d(1), d(1), d(1), d(1), d(1)});
    default:
        return R * d(6) + 6.0 * C(2, {d(5), d(1)}) + 15.0 * C(2, {d(4), d(2)}) +
               10.0 * C(2, {d(3), d(3)}) + 15.0 * C(3, {d(4), d(1), d(1)}) +
               60.0 * C(3, {d(3), d(2), d(1)}) + 15.0 * C(3, {d(2), d(2), d(2)}) +
               20.0 * C(4, {d(3), d(1), d(1), d(1)}) + 45.0 * C(4, {d(2), d(2), d(1), d(1)}) +
               15.0 * C(5, {d(2), d(1), d(1), d(1), d(1)}) +
               C(6, {d(1), d(1), d(1), d(1), d(1), d(1)});
    }
}

double dE_dt(const TrajectoryJet& jet, const ConstraintJets& cj, const EnergyModel& energy,
             int i, bool pad_free) {
    if (i < 1) throw std::invalid_argument("dE_dt: order must be >= 1");
    // F^(r) = d^r f / d t^r for r = 1..i
    std::vector<VecX> F(i + 1);
    for (int r = 1; r <= i; ++r) F[r] = df_dt(jet, cj, r, pad_free);
    const MatX K = energy.stiffness_full();
    const VecX w = energy.epsilon * energy.omega;
    // partition formula for E(F(t)) with dE/df = eps*omega, d2E/df2 = K,
    // higher outer derivatives zero for the quadratic energy
    double out = 0.0;
    for (const Partition& p : enumerate_partitions(i)) {
        if (p.tensor_order > 2) continue;
        std::vector<int> blocks;
        for (int j = 1; j <= i; ++j)
            for (int r = 0; r < p.mult[j - 1]; ++r) blocks.push_back(j);
        const double coeff = static_cast<double>(p.display_coeff);
        if (p.tensor_order == 1)
            out += coeff * w.dot(F[blocks[0]]);
        else
            out += coeff * F[blocks[0]].dot(K * F[blocks[1]]);
    }
    return out;
}

namespace {

// Symmetrized coefficient tensors of the expanded energy derivatives:
//   W_k = eps*omega . d^k f + [material terms],
// evaluated against k argument vectors. The material terms average the
// K-pairings of lower-order constraint tensors over all slot splits.
struct ExpandedEnergyForms {
    const ConstraintJets& cj;
    const MatX K;
    const VecX w; // eps * omega

    ExpandedEnergyForms(const ConstraintJets& c, const EnergyModel& e)
        : cj(c), K(e.stiffness_full()), w(e.epsilon * e.omega) {}

    VecX d_apply(int k, const std::vector<VecX>& args) const {
        if (k == 1) return cj.R * args[0];
        return cj.tensor(k).contract(args);
    }

    // sum over splits of `args` into an a-subset and its complement of
    //   (D_a . args_S)^T K (D_b . args_Sc),
    // divided by the number of splits (the display coefficients are applied
    // by the caller). For a == b each unordered split is visited once.
    double pairing(int a, int b, const std::vector<VecX>& args) const {
        const int k = a + b;
        std::vector<int> pick(k, 0);
        std::fill(pick.begin(), pick.begin() + a, 1);
        std::sort(pick.begin(), pick.end());
        double total = 0.0;
        int count = 0;
        do {
            std::vector<VecX> left, right;
            for (int t = 0; t < k; ++t) (pick[t] ? left : right).push_back(args[t]);
            total += d_apply(a, left).dot(K * d_apply(b, right));
            ++count;
        } while (std::next_permutation(pick.begin(), pick.end()));
        if (a == b) {
            total /= 2.0;
            count /= 2;
        }
        return total / static_cast<double>(count);
    }

    double W(int k, const std::vector<VecX>& args) const {
        double out;
        switch (k) {
        case 1:
            out = w.dot(cj.R * args[0]);
            break;
        case 2:
            out = w.dot(cj.tensor(2).contract(args)) + pairing(1, 1, args);
            break;
        case 3:
            out = w.dot(cj.tensor(3).contract(args)) + 3.0 * pairing(2, 1, args);
            break;
        case 4:
            out = w.dot(cj.tensor(4).contract(args)) + 4.0 * pairing(3, 1, args) +
                  3.0 * pairing(2, 2, args);
            break;
        case 5:
            out = w.dot(cj.tensor(5).contract(args)) + 5.0 * pairing(4, 1, args) +
                  10.0 * pairing(3, 2, args);
            break;
        case 6:
            out = w.dot(cj.tensor(6).contract(args)) + 6.0 * pairing(5, 1, args) +
                  15.0 * pairing(4, 2, args) + 10.0 * pairing(3, 3, args);
            break;
        default:
            throw std::invalid_argument("expanded energy form: order out of range");
        }
        return out;
    }
};

} // namespace

double dE_dt_expanded(const TrajectoryJet& jet, const ConstraintJets& cj,
                      const EnergyModel& energy, int i) {
    if (i < 1 || i > 6)
        throw std::invalid_argument("dE_dt_expanded: only orders 1..6 are written out");
    const VecX zero = VecX::Zero(cj.n_rho);
    auto d = [&](int j) -> const VecX& { return jet_deriv(jet, j, false, cj.n_rho, zero); };
    ExpandedEnergyForms W(cj, energy);
    switch (i) {
    case 1:
        return W.W(1, {d(1)});
    case 2:
        return W.W(1, {d(2)}) + W.W(2, {d(1), d(1)});
    case 3:
        return W.W(1, {d(3)}) + 3.0 * W.W(2, {d(2), d(1)}) + W.W(3, {d(1), d(1), d(1)});
    case 4:
        return W.W(1, {d(4)}) + 4.0 * W.W(2, {d(3), d(1)}) + 3.0 * W.W(2, {d(2), d(2)}) +
               6.0 * W.W(3, {d(2), d(1), d(1)}) + W.W(4, {d(1), d(1), d(1), d(1)});
    case 5:
        return W.W(1, {d(5)}) + 5.0 * W.W(2, {d(4), d(1)}) + 10.0 * W.W(2, {d(3), d(2)}) +
               10.0 * W.W(3, {d(3), d(1), d(1)}) + 15.0 * W.W(3, {d(2), d(2), d(1)}) +
               10.0 * W.W(4, {d(2), d(1), d(1), d(1)}) +
               W.W(5, {d(1), d(1), d(1), d(1), d(1)});
    default:
        return W.W(1, {d(6)}) + 6.0 * W.W(2, {d(5), d(1)}) + 15.0 * W.W(2, {d(4), d(2)}) +
               10.0 * W.W(2, {d(3), d(3)}) + 15.0 * W.W(3, {d(4), d(1), d(1)}) +
               60.0 * W.W(3, {d(3), d(2), d(1)}) + 15.0 * W.W(3, {d(2), d(2), d(2)}) +
               20.0 * W.W(4, {d(3), d(1), d(1), d(1)}) +
               45.0 * W.W(4, {d(2), d(2), d(1), d(1)}) +
               15.0 * W.W(5, {d(2), d(1), d(1), d(1), d(1)}) +
               W.W(6, {d(1), d(1), d(1), d(1), d(1), d(1)});
    }
}

} // namespace rigidity
