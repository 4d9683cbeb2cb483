#include "lsm/marking.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lsm/errors.hpp"

namespace lsm {

CatalyticBudget CatalyticBudget::from_pairs(std::vector<PureState> pairs) {
    CatalyticBudget b;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        if (pairs[r].num_factors() != 2) throw InvalidArgument("catalytic resources must be bipartite pairs");
        for (Party p : {Party::Alice, Party::Bob}) {
            b.resource_layout.factor_party.push_back(p);
            b.resource_layout.factor_slot.push_back(kResourceSlot);
            b.resource_layout.factor_role.push_back(static_cast<int>(r));
        }
        b.supplied_ebits += entanglement_entropy(pairs[r], Bipartition({0}, 2));
    }
    b.resources = std::move(pairs);
    return b;
}

// --- verification -----------------------------------------------------------------

namespace {

double member_ebits(const PureState& s, const PartyLayout& layout) {
    std::vector<int> live(s.num_factors());
    for (int i = 0; i < s.num_factors(); ++i) live[i] = i;
    return cross_party_entropy(s, layout, live);
}

AssignmentResult verify_one(const ProtocolNode& p, const StateSet& s, const std::vector<int>& a,
                            const std::optional<CatalyticBudget>& budget, const std::vector<double>& ebits) {
    const auto inst = budget ? make_instance(s, a, budget->resources, budget->resource_layout) : make_instance(s, a);
    const BranchTree tree = execute(p, inst.composite, inst.layout);
    Assignment expected;
    for (int k = 0; k < static_cast<int>(a.size()); ++k) expected[k] = a[k];

    AssignmentResult r{a, 0.0, false, 0.0, 0.0, {}};
    for (int i : a) r.instance_ebits += ebits[i];
    for (const auto& leaf : tree.leaves) {
        const double res = cross_party_entropy(leaf.final_state, inst.layout, leaf.live_factors);
        const bool ok = leaf.verdict && *leaf.verdict == expected;
        if (ok) r.success_probability += leaf.probability;
        if (!ok && leaf.probability > kPruneProbability) r.mislabeled = true;
        r.average_residual += leaf.probability * res;
        r.leaves.push_back({leaf.probability, res, leaf.verdict, leaf.transcript, ok});
    }
    return r;
}

}  // namespace

MarkingReport verify_marking(const ProtocolNode& p, const StateSet& s, int m, const std::optional<CatalyticBudget>& budget,
                             const VerifyOptions& opts) {
    if (m < 1 || m > s.size()) throw InvalidArgument("verify_marking: m out of range");
    const auto assigns = opts.assignments ? *opts.assignments : ordered_assignments(s.size(), m);
    for (const auto& a : assigns)
        if (static_cast<int>(a.size()) != m) throw InvalidArgument("assignment has wrong length");

    std::vector<double> ebits;
    for (const auto& st : s.states) ebits.push_back(member_ebits(st, s.layout));

    std::vector<AssignmentResult> results(assigns.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < assigns.size(); i = next++) {
            try {
                results[i] = verify_one(p, s, assigns[i], budget, ebits);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    const int nthreads = std::clamp(opts.threads, 1, static_cast<int>(std::max<std::size_t>(assigns.size(), 1)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }
    if (err) std::rethrow_exception(err);

    MarkingReport rep;
    rep.verdict.perfect = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& r : results) {
        if (r.success_probability < 1.0 - kTauNorm || r.mislabeled) rep.verdict.perfect = false;
        rep.ledger.average_residual += r.average_residual;
        rep.ledger.max_instance_ebits = std::max(rep.ledger.max_instance_ebits, r.instance_ebits);
        for (const auto& l : r.leaves) {
            if (l.probability <= kPruneProbability) continue;
            lo = std::min(lo, l.residual_ebits);
            hi = std::max(hi, l.residual_ebits);
        }
    }
    if (!results.empty()) rep.ledger.average_residual /= static_cast<double>(results.size());
    rep.ledger.min_residual = std::isfinite(lo) ? lo : 0.0;
    rep.ledger.max_residual = hi;
    if (budget) {
        rep.ledger.supplied = budget->supplied_ebits;
        // Returned entanglement is what every branch is guaranteed to hold.
        rep.ledger.returned = rep.ledger.min_residual;
        rep.ledger.surplus = std::max(0.0, rep.ledger.average_residual - rep.ledger.min_residual);
    }
    rep.verdict.results = std::move(results);
    return rep;
}

// --- shared builders --------------------------------------------------------------

namespace {

int slot_factor(const StateSet& s, int slot, int role, Party party, int offset) {
    const int base = s.layout.factor_slot.front();
    const auto local = s.layout.find(base, role, party);
    if (!local) throw InvalidArgument("state set has no factor for that party and part");
    return offset + slot * s.factors_per_state() + *local;
}

std::map<int, NodePtr> bell_children(std::map<BellKind, NodePtr> by_label, const std::string& id) {
    std::map<int, NodePtr> out;
    for (auto k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus}) {
        auto it = by_label.find(k);
        out[static_cast<int>(k)] = it != by_label.end() ? it->second : abort_node("impossible Bell outcome", id + "/x");
    }
    return out;
}

}  // namespace

NodePtr bell_tensor_pair_step(std::string id, const StateSet& s, int a, int b, int slot, int factor_offset,
                              NodePtr if_a, NodePtr if_b, Party first) {
    if (a == b) throw InvalidArgument("pair step needs two different candidates");
    if (a < 0 || b < 0 || a >= s.size() || b >= s.size()) throw InvalidArgument("candidate index out of range");
    const auto la = bell_labels(s.states[a], s.layout);
    const auto lb = bell_labels(s.states[b], s.layout);
    if (!la || !lb) throw UnsupportedPair("candidates are not tensor products of Bell pairs");
    std::size_t part = 0;
    while (part < la->size() && (*la)[part] == (*lb)[part]) ++part;
    if (part == la->size()) throw UnsupportedPair("candidates carry identical Bell labels");
    const auto disc = bell_pair_discriminator((*la)[part], (*lb)[part]);
    const int role = static_cast<int>(part);
    FactorRef fa{Party::Alice, slot_factor(s, slot, role, Party::Alice, factor_offset)};
    FactorRef fb{Party::Bob, slot_factor(s, slot, role, Party::Bob, factor_offset)};
    if (first == Party::Bob) std::swap(fa, fb);
    NodePtr on_c = disc.on_correlated == (*la)[part] ? if_a : if_b;
    NodePtr on_ac = disc.on_correlated == (*la)[part] ? if_b : if_a;
    return correlated_pauli_step(std::move(id), fa, fb, disc.pauli, std::move(on_c), std::move(on_ac));
}

NodePtr product_basis_lsd() {
    std::map<int, NodePtr> alice;
    for (int a = 0; a < 2; ++a) {
        std::map<int, NodePtr> bob;
        for (int b = 0; b < 2; ++b) bob[b] = conclude_node({{0, 2 * a + b}});
        alice[a] = measure_node("lsd.B", Party::Bob, {1}, Basis::pauli_z(), std::move(bob));
    }
    return measure_node("lsd.A", Party::Alice, {0}, Basis::pauli_z(), std::move(alice));
}

NodePtr single_bit_lsd() {
    return measure_node("lsd", Party::Alice, {0}, Basis::pauli_z(), {{0, conclude_node({{0, 0}})}, {1, conclude_node({{0, 1}})}});
}

NodePtr naive_z_protocol(const StateSet& s, int m) {
    // Z parity on the first part of slot 0 picks a group; everything else is
    // guessed in index order.
    std::vector<int> corr, anti;
    for (int i = 0; i < s.size(); ++i) {
        const auto l = bell_labels(s.states[i], s.layout);
        if (!l) throw UnsupportedPair("naive protocol needs a Bell-tensor set");
        (bell_correlated(l->front(), Pauli::Z) ? corr : anti).push_back(i);
    }
    auto guess = [&](const std::vector<int>& group) {
        if (group.empty()) return abort_node("empty group");
        Assignment g{{0, group.front()}};
        int slot = 1;
        for (int i = 0; i < s.size() && slot < m; ++i)
            if (i != group.front()) g[slot++] = i;
        return conclude_node(std::move(g));
    };
    return correlated_pauli_step("naive.Z", {Party::Alice, slot_factor(s, 0, 0, Party::Alice, 0)},
                                 {Party::Bob, slot_factor(s, 0, 0, Party::Bob, 0)}, Pauli::Z, guess(corr), guess(anti));
}

// --- X4 ---------------------------------------------------------------------------

NodePtr build_x4_protocol() {
    const StateSet x4 = x4_set();
    using B = BellKind;
    using P = Party;
    auto f = [&](int slot, int part, P p) { return slot_factor(x4, slot, part, p, 0); };
    // 1-based state labels as in the flowcharts.
    auto done = [](int p, int q, int r, int s) { return conclude_node({{0, p - 1}, {1, q - 1}, {2, r - 1}, {3, s - 1}}); };
    auto parity = [&](std::string id, int slot, int part, Pauli pauli, NodePtr c, NodePtr ac) {
        return correlated_pauli_step(std::move(id), {P::Alice, f(slot, part, P::Alice)}, {P::Bob, f(slot, part, P::Bob)},
                                     pauli, std::move(c), std::move(ac));
    };
    // Walgate step on the first part of `slot`, which holds label a or b
    // (1-based); `make(x, y)` builds the conclusion for slot = x, other = y.
    auto wp = [&](std::string id, int slot, int a, int b, const std::function<NodePtr(int, int)>& make) {
        return bell_tensor_pair_step(std::move(id), x4, a - 1, b - 1, slot, 0, make(a, b), make(b, a));
    };
    // Bob teleports his half of the first part of `slot` to Alice through the
    // second part of `res_slot`; Alice then Bell-measures the first part.
    auto tp_bm = [&](const std::string& id, int slot, int res_slot, std::map<B, NodePtr> by_label) {
        NodePtr bm = measure_node(id + ".BM", P::Alice, {f(slot, 0, P::Alice), f(res_slot, 1, P::Alice)}, Basis::bell(),
                                  bell_children(std::move(by_label), id));
        return teleport_node(id + ".TP", P::Bob, P::Alice, f(slot, 0, P::Bob),
                             {f(res_slot, 1, P::Bob), f(res_slot, 1, P::Alice)}, std::move(bm));
    };

    // Correlated Step-1, p = 1: teleport slot 2 through its own second part.
    NodePtr case1 = tp_bm("step3.I", 1, 1,
                          {{B::PhiMinus, wp("step4.I.q2", 2, 3, 4, [&](int r, int s) { return done(1, 2, r, s); })},
                           {B::PsiPlus, wp("step4.I.q3", 2, 2, 4, [&](int r, int s) { return done(1, 3, r, s); })},
                           {B::PsiMinus, wp("step4.I.q4", 2, 2, 3, [&](int r, int s) { return done(1, 4, r, s); })}});

    // p = 2: Z parity on slot 2 separates q = 1 from q in {3, 4}.
    NodePtr case2_r1 = wp("step4.II.r1", 3, 3, 4, [&](int s, int q) { return done(2, q, 1, s); });
    NodePtr case2_anti = tp_bm("step4.II", 2, 1,
                               {{B::PsiMinus, done(2, 3, 4, 1)}, {B::PsiPlus, done(2, 4, 3, 1)}, {B::PhiPlus, case2_r1}});
    NodePtr case2 = parity("step3.II", 1, 0, Pauli::Z,
                           wp("step4.II.q1", 2, 3, 4, [&](int r, int s) { return done(2, 1, r, s); }), case2_anti);

    NodePtr fig1 = parity("step2", 0, 1, Pauli::X, case1, case2);

    // Anti-correlated Step-1, p in {3, 4}: slot 1's second part is phi- and
    // serves as the first teleport resource; p is inferred once the psi
    // member among q, r, s is found.
    NodePtr q_psi_plus = wp("fig2.q3", 2, 1, 2, [&](int r, int s) { return done(4, 3, r, s); });
    NodePtr q_psi_minus = wp("fig2.q4", 2, 1, 2, [&](int r, int s) { return done(3, 4, r, s); });
    auto psi_last = [&](int q, int r) {
        return wp("fig2.s", 3, 3, 4, [q, r, &done](int s, int other) { return done(other, q, r, s); });
    };
    NodePtr q_phi_plus = tp_bm("fig2.q1", 2, 1,
                               {{B::PhiMinus, psi_last(1, 2)}, {B::PsiPlus, done(4, 1, 3, 2)}, {B::PsiMinus, done(3, 1, 4, 2)}});
    NodePtr q_phi_minus = tp_bm("fig2.q2", 2, 1,
                                {{B::PhiPlus, psi_last(2, 1)}, {B::PsiPlus, done(4, 2, 3, 1)}, {B::PsiMinus, done(3, 2, 4, 1)}});
    NodePtr fig2 = tp_bm("fig2.step2", 1, 0,
                         {{B::PhiPlus, q_phi_plus}, {B::PhiMinus, q_phi_minus}, {B::PsiPlus, q_psi_plus}, {B::PsiMinus, q_psi_minus}});

    return parity("step1", 0, 0, Pauli::Z, fig1, fig2);
}

// --- catalytic protocols --------------------------------------------------------------

std::pair<NodePtr, CatalyticBudget> catalytic_b4_protocol() {
    const StateSet b4 = bell_basis();
    auto budget = CatalyticBudget::from_pairs({bell_state(BellKind::PhiPlus), bell_state(BellKind::PhiPlus)});
    const int off = budget.num_factors();
    auto f = [&](int slot, Party p) { return slot_factor(b4, slot, 0, p, off); };
    // Alice teleports her half of `slot` to Bob through resource pair `res`;
    // Bob reads the label with a Bell measurement.
    auto tp_bm = [&](const std::string& id, int slot, int res, const std::function<NodePtr(int)>& next) {
        std::map<int, NodePtr> kids;
        for (int k = 0; k < 4; ++k) kids[k] = next(k);
        NodePtr bm = measure_node(id + ".BM", Party::Bob, {2 * res + 1, f(slot, Party::Bob)}, Basis::bell(), std::move(kids));
        return teleport_node(id + ".TP", Party::Alice, Party::Bob, f(slot, Party::Alice), {2 * res, 2 * res + 1}, std::move(bm));
    };
    NodePtr front = tp_bm("slot0", 0, 0, [&](int p) {
        return tp_bm("slot1", 1, 1, [&, p](int q) {
            return q == p ? abort_node("repeated label") : conclude_node({{0, p}, {1, q}});
        });
    });
    return {extend_last_two(front, b4, 4, off), std::move(budget)};
}

std::pair<NodePtr, CatalyticBudget> catalytic_b3_protocol() {
    const StateSet b3 = b3_set();
    auto budget = CatalyticBudget::from_pairs({bell_state(BellKind::PhiPlus)});
    const int off = budget.num_factors();
    std::map<int, NodePtr> kids;
    for (int k = 0; k < 4; ++k)
        kids[k] = k < b3.size() ? conclude_node({{0, k}}) : abort_node("label outside B3");
    NodePtr bm = measure_node("slot0.BM", Party::Bob, {1, slot_factor(b3, 0, 0, Party::Bob, off)}, Basis::bell(),
                              std::move(kids));
    NodePtr front = teleport_node("slot0.TP", Party::Alice, Party::Bob, slot_factor(b3, 0, 0, Party::Alice, off), {0, 1},
                                  std::move(bm));
    // Teleport sends Alice -> Bob; the pair step then starts with Bob so the
    // answer flows back Bob -> Alice.
    return {extend_last_two(front, b3, 3, off, Party::Bob), std::move(budget)};
}

}  // namespace lsm
