#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lsm/ensembles.hpp"
#include "lsm/locc.hpp"
#include "lsm/qcore.hpp"

namespace lsm::testing {

inline std::vector<cplx> gaussian_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& z : v) {
        const double re = g(rng);
        z = cplx(re, g(rng));
    }
    return v;
}

inline PureState random_state(std::vector<int> dims, std::mt19937_64& rng) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return PureState::normalized(gaussian_vector(n, rng), std::move(dims));
}

// Haar-distributed via QR of a Ginibre matrix with the phase fix on R's diagonal.
inline Matrix random_unitary(int d, std::mt19937_64& rng) {
    const auto v = gaussian_vector(static_cast<std::size_t>(d) * d, rng);
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = v[static_cast<std::size_t>(i) * d + j];
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
    return q;
}

inline PureState column_state(const Matrix& m, int col) {
    std::vector<cplx> a(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) a[static_cast<std::size_t>(i)] = m(i, col);
    return PureState::normalized(std::move(a), {static_cast<int>(m.rows())});
}

/// A locally distinguishable product set on C^2 (x) C^2 together with the
/// adaptive one-round LSD that separates it: Alice measures in a random
/// basis, Bob in a basis chosen by her outcome.
struct ProductSetCase {
    StateSet set;
    NodePtr lsd;
};

inline ProductSetCase random_product_set(int K, std::mt19937_64& rng) {
    const Matrix ua = random_unitary(2, rng);
    const Matrix vb[2] = {random_unitary(2, rng), random_unitary(2, rng)};
    std::vector<int> combos{0, 1, 2, 3};
    std::shuffle(combos.begin(), combos.end(), rng);
    combos.resize(static_cast<std::size_t>(K));

    std::vector<PureState> states;
    for (int c : combos) states.push_back(tensor({column_state(ua, c / 2), column_state(vb[c / 2], c % 2)}));
    StateSet set = StateSet::make("rand-product", std::move(states), PartyLayout::bipartite_pairs(1));

    std::map<int, NodePtr> alice;
    for (int a = 0; a < 2; ++a) {
        std::map<int, NodePtr> bob;
        for (int b = 0; b < 2; ++b) {
            const auto it = std::find(combos.begin(), combos.end(), 2 * a + b);
            bob[b] = it == combos.end() ? abort_node("not in set")
                                        : conclude_node({{0, static_cast<int>(it - combos.begin())}});
        }
        alice[a] = measure_node("lsd.B" + std::to_string(a), Party::Bob, {1}, Basis(vb[a]), std::move(bob));
    }
    return {std::move(set), measure_node("lsd.A", Party::Alice, {0}, Basis(ua), std::move(alice))};
}

}  // namespace lsm::testing
