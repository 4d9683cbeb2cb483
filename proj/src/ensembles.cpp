#include "lsm/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lsm/errors.hpp"

namespace lsm {

StateSet StateSet::make(std::string name, std::vector<PureState> states, PartyLayout layout, bool require_orthogonal) {
    if (states.empty()) throw InvalidArgument("state set is empty");
    layout.validate();
    for (const auto& s : states) {
        if (s.dims() != states.front().dims()) throw InvalidArgument("state set members have different dims");
        if (s.num_factors() != layout.num_factors()) throw InvalidArgument("layout does not match member factors");
    }
    bool ortho = true;
    for (std::size_t i = 0; i < states.size() && ortho; ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
            if (std::abs(inner(states[i], states[j])) > kTauNorm) {
                ortho = false;
                break;
            }
    if (require_orthogonal && !ortho) throw InvalidArgument("state set '" + name + "' is not pairwise orthogonal");
    return StateSet{std::move(name), std::move(states), std::move(layout), ortho};
}

StateSet x4_set() {
    using B = BellKind;
    const std::pair<B, B> parts[] = {
        {B::PhiPlus, B::PhiPlus}, {B::PhiMinus, B::PhiMinus}, {B::PsiPlus, B::PhiMinus}, {B::PsiMinus, B::PhiMinus}};
    std::vector<PureState> st;
    for (const auto& [a, b] : parts) st.push_back(tensor({bell_state(a), bell_state(b)}));
    return StateSet::make("X4", std::move(st), PartyLayout::bipartite_pairs(2));
}

StateSet bell_basis() {
    std::vector<PureState> st;
    for (auto k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus})
        st.push_back(bell_state(k));
    return StateSet::make("B4", std::move(st), PartyLayout::bipartite_pairs(1));
}

StateSet b3_set() {
    std::vector<PureState> st;
    for (auto k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus}) st.push_back(bell_state(k));
    return StateSet::make("B3", std::move(st), PartyLayout::bipartite_pairs(1));
}

StateSet product_basis4() {
    std::vector<PureState> st;
    for (std::size_t i = 0; i < 4; ++i) st.push_back(PureState::basis({2, 2}, i));
    return StateSet::make("product4", std::move(st), PartyLayout::bipartite_pairs(1));
}

std::vector<std::vector<int>> ordered_assignments(int K, int m) {
    if (m < 1 || m > K) throw InvalidArgument("need 1 <= m <= K");
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::vector<bool> used(K, false);
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(cur.size()) == m) {
            out.push_back(cur);
            return;
        }
        for (int i = 0; i < K; ++i) {
            if (used[i]) continue;
            used[i] = true;
            cur.push_back(i);
            self(self);
            cur.pop_back();
            used[i] = false;
        }
    };
    rec(rec);
    return out;
}

StateSet permutation_ensemble(const StateSet& s, int m) {
    if (m < 1 || m > s.size()) throw InvalidArgument("permutation_ensemble: m out of range");
    std::vector<PureState> out;
    for (const auto& a : ordered_assignments(s.size(), m)) {
        std::vector<PureState> parts;
        for (int i : a) parts.push_back(s.states[i]);
        out.push_back(tensor(parts));
    }
    std::vector<PartyLayout> ls;
    for (int k = 0; k < m; ++k) ls.push_back(s.layout.with_slot(k));
    return StateSet::make(s.name + "^P" + std::to_string(m), std::move(out), PartyLayout::concat(ls),
                          s.pairwise_orthogonal);
}

bool unmarkable_by_counting(int K, int d) {
    if (K < 1 || d < 2) throw InvalidArgument("unmarkable_by_counting needs K >= 1, d >= 2");
    // Exact integer comparison while it fits; the log form decides beyond.
    unsigned __int128 fact = 1, pow = 1;
    constexpr unsigned __int128 limit = static_cast<unsigned __int128>(1) << 120;
    for (int i = 1; i <= K; ++i) {
        fact *= static_cast<unsigned>(i);
        pow *= static_cast<unsigned>(d);
        if (fact > limit || pow > limit) {
            return std::lgamma(K + 1.0) > K * std::log(static_cast<double>(d));
        }
    }
    return fact > pow;
}

RateReport rate_compare(int n, int d, int k) {
    if (n < 1 || k < 1) throw InvalidArgument("rate_compare needs n, k >= 1");
    double log_fact = 0.0;
    for (int i = 2; i <= n; ++i) log_fact += std::log2(static_cast<double>(i));
    return RateReport{n, d, k, std::log2(static_cast<double>(n)) / k, log_fact / n};
}

MarkingInstance make_instance(const StateSet& s, const std::vector<int>& assignment,
                              const std::vector<PureState>& resources, const PartyLayout& resource_layout) {
    const int m = static_cast<int>(assignment.size());
    if (m < 1 || m > s.size()) throw InvalidArgument("instance size out of range");
    std::set<int> seen;
    for (int i : assignment)
        if (i < 0 || i >= s.size() || !seen.insert(i).second) throw InvalidArgument("assignment indices must be distinct");
    std::vector<PureState> parts(resources);
    for (int i : assignment) parts.push_back(s.states[i]);
    std::vector<PartyLayout> ls{resource_layout};
    for (int k = 0; k < m; ++k) ls.push_back(s.layout.with_slot(k));
    PartyLayout layout = PartyLayout::concat(ls);
    PureState comp = tensor(parts);
    if (comp.num_factors() != layout.num_factors()) throw InvalidArgument("resource layout does not match resources");
    return MarkingInstance{m, assignment, std::move(comp), std::move(layout)};
}

MarkingInstance random_instance(const StateSet& s, int m, std::mt19937_64& rng) {
    if (m < 1 || m > s.size()) throw InvalidArgument("random_instance: m out of range");
    std::vector<int> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates with explicit draws so the sequence only depends
    // on the engine, not on the standard library's shuffle.
    for (int i = 0; i < m; ++i) {
        const auto span = static_cast<std::uint64_t>(s.size() - i);
        const int j = i + static_cast<int>(rng() % span);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return make_instance(s, idx);
}

MarkingInstance random_instance(const StateSet& s, int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_instance(s, m, rng);
}

CountingFact b3_two_lsm_fact() {
    const StateSet ens = permutation_ensemble(b3_set(), 2);
    const auto alice = ens.layout.factors_of(Party::Alice);
    int local = 1;
    for (int f : alice) local *= ens.dims()[f];
    bool maxent = true;
    const Bipartition cut(alice, ens.layout.num_factors());
    for (const auto& st : ens.states)
        maxent = maxent && std::abs(entanglement_entropy(st, cut) - std::log2(static_cast<double>(local))) <= kTauNorm;
    return CountingFact{ens.size(), local, maxent, ens.size() > local};
}

std::optional<std::vector<BellKind>> bell_labels(const PureState& s, const PartyLayout& layout) {
    std::vector<BellKind> out;
    const int parts = layout.num_factors() / 2;
    for (int r = 0; r < parts; ++r) {
        const auto slot = layout.factor_slot.empty() ? 0 : layout.factor_slot.front();
        const auto a = layout.find(slot, r, Party::Alice);
        const auto b = layout.find(slot, r, Party::Bob);
        if (!a || !b || s.dims()[*a] != 2 || s.dims()[*b] != 2) return std::nullopt;
        const int pair[] = {*a, *b};
        const auto st = factor_state(s, pair);
        if (!st) return std::nullopt;
        std::optional<BellKind> found;
        for (auto k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus})
            if (fidelity(*st, bell_state(k)) >= 1.0 - kTauNorm) found = k;
        if (!found) return std::nullopt;
        out.push_back(*found);
    }
    if (2 * parts != layout.num_factors()) return std::nullopt;
    return out;
}

bool is_party_product(const PureState& s, const PartyLayout& layout) {
    for (Party p : {Party::Alice, Party::Bob, Party::Charlie}) {
        const auto fs = layout.factors_of(p);
        if (fs.empty() || static_cast<int>(fs.size()) == s.num_factors()) continue;
        if (!factor_state(s, fs)) return false;
    }
    return true;
}

}  // namespace lsm
