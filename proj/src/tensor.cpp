#include "rigidity/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rigidity {

SymmetricTensor::SymmetricTensor(int order, int dim, int value_rows)
    : order_(order), dim_(dim), value_rows_(value_rows) {
    if (order < 1 || dim < 1 || value_rows < 1)
        throw std::invalid_argument("SymmetricTensor: order, dim and value_rows must be positive");
}

void SymmetricTensor::check_key(const Key& idx) const {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("SymmetricTensor: multi-index length does not match order");
    for (int j : idx)
        if (j < 0 || j >= dim_)
            throw std::out_of_range("SymmetricTensor: index out of range");
}

bool SymmetricTensor::contains(Key idx) const {
    check_key(idx);
    std::sort(idx.begin(), idx.end());
    return entries_.count(idx) > 0;
}

VecX SymmetricTensor::get(Key idx) const {
    check_key(idx);
    std::sort(idx.begin(), idx.end());
    auto it = entries_.find(idx);
    if (it == entries_.end()) return VecX::Zero(value_rows_);
    return it->second;
}

void SymmetricTensor::set(Key idx, const VecX& value) {
    check_key(idx);
    if (value.size() != value_rows_)
        throw std::invalid_argument("SymmetricTensor: value size does not match value_rows");
    std::sort(idx.begin(), idx.end());
    entries_[idx] = value;
}

void SymmetricTensor::add(Key idx, const VecX& value) {
    check_key(idx);
    if (value.size() != value_rows_)
        throw std::invalid_argument("SymmetricTensor: value size does not match value_rows");
    std::sort(idx.begin(), idx.end());
    auto it = entries_.find(idx);
    if (it == entries_.end())
        entries_[idx] = value;
    else
        it->second += value;
}

VecX SymmetricTensor::contract(const std::vector<VecX>& vs) const {
    if (static_cast<int>(vs.size()) != order_)
        throw std::invalid_argument("contract: expected one vector per slot");
    for (const auto& v : vs)
        if (v.size() != dim_)
            throw std::invalid_argument("contract: vector length does not match tensor dim");

    VecX out = VecX::Zero(value_rows_);
    Key perm;
    for (const auto& [idx, val] : entries_) {
        perm = idx; // sorted, so next_permutation enumerates distinct arrangements
        double weight = 0.0;
        do {
            double w = 1.0;
            for (int t = 0; t < order_; ++t) w *= vs[t](perm[t]);
            weight += w;
        } while (std::next_permutation(perm.begin(), perm.end()));
        out += weight * val;
    }
    return out;
}

SymmetricTensor SymmetricTensor::partial_contract(const std::vector<VecX>& vs) const {
    const int m = static_cast<int>(vs.size());
    if (m < 1 || m >= order_)
        throw std::invalid_argument("partial_contract: need 1 <= m < order vectors");
    for (const auto& v : vs)
        if (v.size() != dim_)
            throw std::invalid_argument("partial_contract: vector length does not match tensor dim");

    SymmetricTensor out(order_ - m, dim_, value_rows_);
    // For each stored sorted multi-index, split its multiset into the kept
    // part (beta) and the contracted part (delta); sum the products of the
    // contraction vectors over all distinct assignments of delta's entries
    // to the m slots.
    Key delta(m), beta(order_ - m);
    std::vector<int> pick(order_, 0); // 1 = contracted slot
    for (const auto& [idx, val] : entries_) {
        std::fill(pick.begin(), pick.end(), 0);
        std::fill(pick.begin(), pick.begin() + m, 1);
        std::sort(pick.begin(), pick.end());
        // enumerate subsets of positions of size m; dedupe splits that pick
        // the same multiset (possible with repeated indices)
        std::map<Key, Key> seen; // delta -> beta (first occurrence)
        do {
            int di = 0, bi = 0;
            for (int t = 0; t < order_; ++t)
                (pick[t] ? delta[di++] : beta[bi++]) = idx[t];
            // delta, beta stay sorted because idx is sorted and we picked a
            // subsequence
            if (seen.count(delta)) continue;
            seen.emplace(delta, beta);
        } while (std::next_permutation(pick.begin(), pick.end()));

        for (auto& [d, b] : seen) {
            Key perm = d;
            double weight = 0.0;
            do {
                double w = 1.0;
                for (int t = 0; t < m; ++t) w *= vs[t](perm[t]);
                weight += w;
            } while (std::next_permutation(perm.begin(), perm.end()));
            if (weight != 0.0) out.add(b, weight * val);
        }
    }
    return out;
}

SymmetricTensor SymmetricTensor::contract_blocks(const VecX& weights) const {
    if (weights.size() != value_rows_)
        throw std::invalid_argument("contract_blocks: weight length does not match value_rows");
    SymmetricTensor out(order_, dim_, 1);
    for (const auto& [idx, val] : entries_) {
        VecX s(1);
        s(0) = weights.dot(val);
        out.set(idx, s);
    }
    return out;
}

MatX SymmetricTensor::as_matrix() const {
    if (order_ != 2 || value_rows_ != 1)
        throw std::logic_error("as_matrix: requires order 2 and scalar values");
    MatX M = MatX::Zero(dim_, dim_);
    for (const auto& [idx, val] : entries_) {
        M(idx[0], idx[1]) = val(0);
        M(idx[1], idx[0]) = val(0);
    }
    return M;
}

double SymmetricTensor::scalar_entry(Key idx) const {
    if (value_rows_ != 1) throw std::logic_error("scalar_entry: requires scalar values");
    return get(std::move(idx))(0);
}

SymmetricTensor& SymmetricTensor::operator*=(double s) {
    for (auto& [idx, val] : entries_) val *= s;
    return *this;
}

SymmetricTensor& SymmetricTensor::operator+=(const SymmetricTensor& other) {
    if (other.order_ != order_ || other.dim_ != dim_ || other.value_rows_ != value_rows_)
        throw std::invalid_argument("operator+=: tensor shapes differ");
    for (const auto& [idx, val] : other.entries_) add(idx, val);
    return *this;
}

double SymmetricTensor::max_abs() const {
    double m = 0.0;
    for (const auto& [idx, val] : entries_)
        m = std::max(m, val.cwiseAbs().maxCoeff());
    return m;
}

} // namespace rigidity
