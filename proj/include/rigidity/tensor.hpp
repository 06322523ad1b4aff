#pragma once

#include <map>
#include <vector>

#include "rigidity/linalg.hpp"

namespace rigidity {

// Symmetric order-k tensor over folding-angle indices. Each entry is a
// vector of `value_rows` components (one per constraint row; 1 for scalar
// tensors such as stress matrices). Entries are stored once per
// non-decreasing multi-index; reads at any permutation resolve to the
// sorted key. Absent entries are zero.
class SymmetricTensor {
public:
    using Key = std::vector<int>;

    SymmetricTensor() = default;
    SymmetricTensor(int order, int dim, int value_rows);

    int order() const { return order_; }
    int dim() const { return dim_; }
    int value_rows() const { return value_rows_; }

    bool contains(Key idx) const;
    VecX get(Key idx) const;
    void set(Key idx, const VecX& value);
    void add(Key idx, const VecX& value);

    const std::map<Key, VecX>& entries() const { return entries_; }
    std::size_t nonzeros() const { return entries_.size(); }

    // Full contraction with `order` vectors (each of length dim):
    //   out_r = sum over all index tuples T[j1..jk]_r * v1[j1] ... vk[jk].
    VecX contract(const std::vector<VecX>& vs) const;

    // Contraction over the last m = vs.size() < order slots; the result is
    // symmetric in the remaining slots.
    SymmetricTensor partial_contract(const std::vector<VecX>& vs) const;

    // Contraction over the value dimension with a weight vector (e.g. a
    // selfstress), producing a scalar-valued tensor of the same order.
    SymmetricTensor contract_blocks(const VecX& weights) const;

    // Dense views for small tensors.
    MatX as_matrix() const;          // order == 2, value_rows == 1
    double scalar_entry(Key idx) const; // value_rows == 1

    SymmetricTensor& operator*=(double s);
    SymmetricTensor& operator+=(const SymmetricTensor& other);

    double max_abs() const;

private:
    void check_key(const Key& idx) const;

    int order_ = 0;
    int dim_ = 0;
    int value_rows_ = 0;
    std::map<Key, VecX> entries_;
};

} // namespace rigidity
