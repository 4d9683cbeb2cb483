#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lsm/layout.hpp"
#include "lsm/qcore.hpp"

namespace lsm {

/// A known set of states sharing one factor structure and one party layout.
struct StateSet {
    std::string name;
    std::vector<PureState> states;
    PartyLayout layout;  // layout of a single member, slot 0
    bool pairwise_orthogonal = false;

    /// Checks dims/layout agreement and, when `require_orthogonal`, that
    /// |<i|j>| <= kTauNorm for all i != j.
    static StateSet make(std::string name, std::vector<PureState> states, PartyLayout layout,
                         bool require_orthogonal = true);

    int size() const { return static_cast<int>(states.size()); }
    const std::vector<int>& dims() const { return states.front().dims(); }
    int factors_per_state() const { return layout.num_factors(); }
};

/// chi_1..chi_4: two Bell pairs per state, first part (A1 B1) then second
/// part (A2 B2).
StateSet x4_set();
/// phi+, phi-, psi+, psi- in that order.
StateSet bell_basis();
/// phi+, phi-, psi+.
StateSet b3_set();
/// |00>, |01>, |10>, |11> with Alice holding the first qubit.
StateSet product_basis4();

/// All ordered m-tuples of distinct indices from 0..K-1, lexicographic.
std::vector<std::vector<int>> ordered_assignments(int K, int m);

/// Tensor products of every ordered m-tuple of distinct members.
StateSet permutation_ensemble(const StateSet& s, int m);

/// Sufficient condition for unmarkability of K maximally entangled states in
/// C^d (x) C^d: K! > d^K. False means the bound is silent, not "markable".
bool unmarkable_by_counting(int K, int d);

struct RateReport {
    int n;
    int d;
    int k;
    double lsd_rate;  // log2(n) / k bits per qudit
    double lsm_rate;  // log2(n!) / n bits per qudit
};
RateReport rate_compare(int n, int d, int k);

/// One concrete m-LSM input: the hidden assignment and the composite state,
/// optionally preceded by supplied resource states.
struct MarkingInstance {
    int m;
    std::vector<int> hidden_assignment;
    PureState composite;
    PartyLayout layout;
};

MarkingInstance make_instance(const StateSet& s, const std::vector<int>& assignment,
                              const std::vector<PureState>& resources = {},
                              const PartyLayout& resource_layout = {});
MarkingInstance random_instance(const StateSet& s, int m, std::mt19937_64& rng);
MarkingInstance random_instance(const StateSet& s, int m, std::uint64_t seed);

/// Counting fact for 2-LSM of B3: the ensemble of ordered pairs has more
/// maximally entangled states than the local dimension, which is the
/// premise of the known indistinguishability bound.
struct CountingFact {
    int ensemble_size;
    int local_dim;
    bool all_maximally_entangled;
    bool bound_applies;  // ensemble_size > local_dim
};
CountingFact b3_two_lsm_fact();

/// Bell label of every part of a member laid out as Bell pairs, or nothing
/// if some part is not a Bell state.
std::optional<std::vector<BellKind>> bell_labels(const PureState& s, const PartyLayout& layout);

/// True if the state is a product across every party.
bool is_party_product(const PureState& s, const PartyLayout& layout);

}  // namespace lsm
