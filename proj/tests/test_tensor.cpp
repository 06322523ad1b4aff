#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "rigidity/tensor.hpp"

using namespace rigidity;

namespace {

// Dense brute-force contraction over all n^k index tuples.
VecX brute_force_contract(const SymmetricTensor& T, const std::vector<VecX>& vs) {
    const int k = T.order(), n = T.dim();
    VecX out = VecX::Zero(T.value_rows());
    std::vector<int> idx(k, 0);
    while (true) {
        double w = 1.0;
        for (int t = 0; t < k; ++t) w *= vs[static_cast<size_t>(t)](idx[static_cast<size_t>(t)]);
        out += w * T.get(idx);
        int p = k - 1;
        while (p >= 0 && idx[static_cast<size_t>(p)] == n - 1) {
            idx[static_cast<size_t>(p)] = 0;
            --p;
        }
        if (p < 0) break;
        ++idx[static_cast<size_t>(p)];
    }
    return out;
}

SymmetricTensor random_tensor(std::mt19937_64& rng, int order, int dim, int rows) {
    SymmetricTensor T(order, dim, rows);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<int> idx(order, 0);
    while (true) {
        VecX v(rows);
        for (int r = 0; r < rows; ++r) v(r) = dist(rng);
        T.set(idx, v);
        int p = order - 1;
        while (p >= 0 && idx[static_cast<size_t>(p)] == dim - 1) --p;
        if (p < 0) break;
        ++idx[static_cast<size_t>(p)];
        for (int q = p + 1; q < order; ++q) idx[static_cast<size_t>(q)] = idx[static_cast<size_t>(p)];
    }
    return T;
}

} // namespace

TEST_CASE("symmetry round-trip: write sorted, read any permutation") {
    SymmetricTensor T(3, 4, 2);
    VecX v(2);
    v << 1.5, -2.0;
    T.set({3, 1, 2}, v);
    CHECK(T.get({1, 2, 3}) == v);
    CHECK(T.get({2, 3, 1}) == v);
    CHECK(T.get({3, 2, 1}) == v);
    CHECK(T.get({1, 3, 2}) == v);
    CHECK(T.get({0, 0, 0}).isZero());
}

TEST_CASE("order-1 contraction is a matrix-vector product") {
    std::mt19937_64 rng(7);
    MatX R = MatX::Random(3, 5);
    SymmetricTensor T(1, 5, 3);
    for (int c = 0; c < 5; ++c) T.set({c}, R.col(c));
    const VecX v = fixtures::random_vector(rng, 5);
    CHECK(((T.contract({v}) - R * v).cwiseAbs().maxCoeff()) < 1e-14);
}

TEST_CASE("contraction equals brute force on small random tensors") {
    std::mt19937_64 rng(11);
    for (int order = 1; order <= 4; ++order) {
        for (int dim : {2, 3, 4}) {
            SymmetricTensor T = random_tensor(rng, order, dim, 2);
            std::vector<VecX> vs;
            for (int t = 0; t < order; ++t) vs.push_back(fixtures::random_vector(rng, dim));
            const VecX a = T.contract(vs);
            const VecX b = brute_force_contract(T, vs);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("random symmetric order-3 tensor vs brute-force triple loop") {
    std::mt19937_64 rng(13);
    SymmetricTensor T = random_tensor(rng, 3, 3, 1);
    std::vector<VecX> vs;
    for (int t = 0; t < 3; ++t) vs.push_back(fixtures::random_vector(rng, 3));
    CHECK((T.contract(vs) - brute_force_contract(T, vs)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial contraction: twice by one vector equals once by two") {
    std::mt19937_64 rng(17);
    SymmetricTensor T = random_tensor(rng, 4, 3, 2);
    const VecX u = fixtures::random_vector(rng, 3);
    const VecX v = fixtures::random_vector(rng, 3);
    const SymmetricTensor once = T.partial_contract({u, v});
    const SymmetricTensor twice = T.partial_contract({u}).partial_contract({v});
    REQUIRE(once.order() == 2);
    REQUIRE(twice.order() == 2);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
            CHECK((once.get({i, j}) - twice.get({i, j})).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial then full contraction agrees with one full contraction") {
    std::mt19937_64 rng(19);
    SymmetricTensor T = random_tensor(rng, 3, 4, 3);
    std::vector<VecX> vs;
    for (int t = 0; t < 3; ++t) vs.push_back(fixtures::random_vector(rng, 4));
    const VecX direct = T.contract(vs);
    const VecX staged = T.partial_contract({vs[1], vs[2]}).contract({vs[0]});
    CHECK((direct - staged).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("block contraction with zero weights gives the zero tensor") {
    std::mt19937_64 rng(23);
    SymmetricTensor T = random_tensor(rng, 2, 3, 4);
    const SymmetricTensor Z = T.contract_blocks(VecX::Zero(4));
    CHECK(Z.max_abs() == 0.0);
}

TEST_CASE("gradient of the diagonal contraction is k times the partial contraction") {
    std::mt19937_64 rng(29);
    const int k = 3, n = 4;
    SymmetricTensor T = random_tensor(rng, k, n, 1);
    const VecX v = fixtures::random_vector(rng, n);
    // analytic gradient of g(v) = T . (v,...,v)
    const SymmetricTensor partial = T.partial_contract({v, v});
    VecX grad(n);
    for (int i = 0; i < n; ++i) grad(i) = k * partial.get({i})(0);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
        VecX p = v, m = v;
        p(i) += h;
        m(i) -= h;
        const double fp = T.contract({p, p, p})(0);
        const double fm = T.contract({m, m, m})(0);
        const double fd = (fp - fm) / (2 * h);
        CHECK(std::abs(grad(i) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    SymmetricTensor T(2, 3, 1);
    VecX bad(2);
    bad << 1, 2;
    CHECK_THROWS(T.contract({bad, bad}));
    CHECK_THROWS(T.contract({VecX::Zero(3)}));
    VecX v1(1);
    v1 << 1.0;
    CHECK_THROWS(T.set({0, 0, 0}, v1));
    CHECK_THROWS(T.set({0, 5}, v1));
}
