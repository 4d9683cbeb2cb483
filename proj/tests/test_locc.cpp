#include <gtest/gtest.h>

#include "lsm/ensembles.hpp"
#include "lsm/errors.hpp"
#include "lsm/locc.hpp"
#include "lsm/marking.hpp"
#include "support.hpp"

using namespace lsm;
using lsm::testing::random_state;
using lsm::testing::random_unitary;

namespace {

constexpr double kTol = 1e-9;
const PartyLayout kPair = PartyLayout::bipartite_pairs(1);

FactorRef alice(int f) { return {Party::Alice, f}; }
FactorRef bob(int f) { return {Party::Bob, f}; }

// Classifier on one Bell pair that concludes 0 on C and 1 on AC.
NodePtr classify(Pauli p) {
    return correlated_pauli_step("cls", alice(0), bob(1), p, conclude_node({{0, 0}}), conclude_node({{0, 1}}));
}

int single_class(const BranchTree& t) {
    std::optional<int> cls;
    double total = 0.0;
    for (const auto& l : t.leaves) {
        const int c = l.verdict->at(0);
        if (cls) EXPECT_EQ(*cls, c);
        cls = c;
        total += l.probability;
    }
    EXPECT_NEAR(total, 1.0, kTol);
    return cls.value_or(-1);
}

}  // namespace

TEST(Execute, SingleConclude) {
    const auto t = execute(*conclude_node({{0, 2}}), bell_state(BellKind::PsiPlus), kPair);
    ASSERT_EQ(t.leaves.size(), 1u);
    EXPECT_NEAR(t.leaves[0].probability, 1.0, kTol);
    EXPECT_EQ(*t.leaves[0].verdict, (Assignment{{0, 2}}));
    EXPECT_TRUE(t.leaves[0].transcript.empty());
}

TEST(Execute, AbortLeafHasNoVerdict) {
    const auto t = execute(*abort_node("nope"), bell_state(BellKind::PsiPlus), kPair);
    ASSERT_EQ(t.leaves.size(), 1u);
    EXPECT_FALSE(t.leaves[0].verdict.has_value());
}

TEST(Execute, ConsumedFactorThrows) {
    const auto inner = measure_node("m2", Party::Alice, {0}, Basis::pauli_z(),
                                    {{0, conclude_node({{0, 0}})}, {1, conclude_node({{0, 0}})}});
    const auto outer = measure_node("m1", Party::Alice, {0}, Basis::pauli_z(), {{0, inner}, {1, inner}});
    EXPECT_THROW(execute(*outer, bell_state(BellKind::PhiPlus), kPair), InvalidArgument);
}

TEST(Execute, MissingChildThrows) {
    const auto m = measure_node("m", Party::Alice, {0}, Basis::pauli_z(), {{0, conclude_node({{0, 0}})}});
    EXPECT_THROW(execute(*m, bell_state(BellKind::PhiPlus), kPair), InvalidArgument);
    // A missing child for a zero-probability outcome is fine.
    EXPECT_NO_THROW(execute(*m, PureState::basis({2, 2}, 0), kPair));
}

TEST(Execute, LayoutMismatchThrows) {
    EXPECT_THROW(execute(*conclude_node({}), bell_state(BellKind::PhiPlus), PartyLayout::bipartite_pairs(2)),
                 InvalidArgument);
}

TEST(Locality, JointMeasurementAcrossPartiesRejected) {
    const auto m = measure_node("bad", Party::Alice, {0, 1}, Basis::bell(), {});
    EXPECT_THROW(execute(*m, bell_state(BellKind::PhiPlus), kPair), LocalityViolation);
    const auto u = unitary_node("bad", Party::Bob, {0}, UnitaryOp::identity(2), conclude_node({}));
    EXPECT_THROW(validate_locality(*u, kPair), LocalityViolation);
}

TEST(Locality, RandomNonlocalNodesRejected) {
    std::mt19937_64 rng(21);
    const auto layout = PartyLayout::bipartite_pairs(3);
    std::uniform_int_distribution<int> pick(0, 5);
    int rejected = 0;
    for (int t = 0; t < 200; ++t) {
        const int f1 = pick(rng);
        int f2 = pick(rng);
        while (f2 == f1) f2 = pick(rng);
        const Party p = (t % 2) ? Party::Alice : Party::Bob;
        const bool local = layout.factor_party[f1] == p && layout.factor_party[f2] == p;
        const auto leaf = conclude_node({});
        std::map<int, NodePtr> kids;
        for (int k = 0; k < 4; ++k) kids[k] = leaf;
        // Put the offending node below a harmless one so the check is not root-only.
        const auto bad = measure_node("n", p, {f1, f2}, Basis(random_unitary(4, rng)), kids);
        const auto root = unitary_node("u", Party::Alice, {0}, UnitaryOp::identity(2), bad);
        if (local) {
            EXPECT_NO_THROW(validate_locality(*root, layout));
        } else {
            EXPECT_THROW(validate_locality(*root, layout), LocalityViolation);
            ++rejected;
        }
    }
    EXPECT_GT(rejected, 100);
}

TEST(Locality, TeleportEndpointsChecked) {
    const auto layout = PartyLayout::bipartite_pairs(2);
    // Resource ends swapped: factor 1 is Bob's, factor 2 is Alice's.
    const auto t = teleport_node("tp", Party::Alice, Party::Bob, 0, {1, 2}, conclude_node({}));
    EXPECT_THROW(validate_locality(*t, layout), LocalityViolation);
    const auto ok = teleport_node("tp", Party::Alice, Party::Bob, 0, {2, 3}, conclude_node({}));
    EXPECT_NO_THROW(validate_locality(*ok, layout));
}

TEST(CorrelatedStep, Examples) {
    EXPECT_EQ(single_class(execute(*classify(Pauli::Z), bell_state(BellKind::PhiPlus), kPair)), 0);
    EXPECT_EQ(single_class(execute(*classify(Pauli::Z), bell_state(BellKind::PsiPlus), kPair)), 1);
    EXPECT_EQ(single_class(execute(*classify(Pauli::X), bell_state(BellKind::PhiMinus), kPair)), 1);
}

TEST(CorrelatedStep, SamePartyThrows) {
    EXPECT_THROW(correlated_pauli_step("x", alice(0), alice(2), Pauli::Z, conclude_node({}), conclude_node({})),
                 InvalidArgument);
}

TEST(CorrelatedStep, DeterministicOnEveryBellState) {
    for (auto k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus})
        for (auto p : {Pauli::X, Pauli::Z}) {
            const int cls = single_class(execute(*classify(p), bell_state(k), kPair));
            EXPECT_EQ(cls == 0, bell_correlated(k, p));
        }
}

TEST(CorrelatedStep, TranscriptRecordsClassification) {
    const auto t = execute(*classify(Pauli::Z), bell_state(BellKind::PhiMinus), kPair);
    for (const auto& l : t.leaves) {
        ASSERT_EQ(l.transcript.size(), 3u);
        EXPECT_EQ(l.transcript[0].party, Party::Alice);
        EXPECT_EQ(l.transcript[1].party, Party::Bob);
        EXPECT_EQ(l.transcript[2].kind, ActionKind::Classify);
        EXPECT_EQ(l.transcript[2].outcome, 0);
    }
}

TEST(Discriminator, Examples) {
    using B = BellKind;
    auto d = bell_pair_discriminator(B::PhiPlus, B::PhiMinus);
    EXPECT_EQ(d.pauli, Pauli::X);
    EXPECT_EQ(d.on_correlated, B::PhiPlus);
    EXPECT_EQ(d.on_anticorrelated, B::PhiMinus);
    d = bell_pair_discriminator(B::PsiMinus, B::PsiPlus);
    EXPECT_EQ(d.pauli, Pauli::X);
    EXPECT_EQ(d.on_correlated, B::PsiPlus);
    EXPECT_EQ(d.on_anticorrelated, B::PsiMinus);
    d = bell_pair_discriminator(B::PhiPlus, B::PsiPlus);
    EXPECT_EQ(d.pauli, Pauli::Z);
    EXPECT_EQ(d.on_correlated, B::PhiPlus);
    EXPECT_EQ(d.on_anticorrelated, B::PsiPlus);
    d = bell_pair_discriminator(B::PhiMinus, B::PsiPlus);  // differ in both tags
    EXPECT_EQ(d.pauli, Pauli::Z);
    EXPECT_THROW(bell_pair_discriminator(B::PsiMinus, B::PsiMinus), InvalidArgument);
}

TEST(Discriminator, SeparatesEveryPair) {
    const BellKind ks[] = {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus};
    for (auto a : ks)
        for (auto b : ks) {
            if (a == b) continue;
            const auto d = bell_pair_discriminator(a, b);
            EXPECT_NE(bell_correlated(a, d.pauli), bell_correlated(b, d.pauli));
            EXPECT_TRUE(bell_correlated(d.on_correlated, d.pauli));
        }
}

// --- teleportation --------------------------------------------------------------------

namespace {

// Layout: factor 0 = Alice's source qubit, then the (Alice, Bob) resource pair.
const PartyLayout kTele = PartyLayout::concat({PartyLayout::single_party(1, Party::Alice, 0),
                                               PartyLayout::bipartite_pairs(1, kResourceSlot)});

void expect_teleports(const PureState& src, const PureState& resource) {
    const auto tp = teleport_node("tp", Party::Alice, Party::Bob, 0, {1, 2}, conclude_node({}));
    const auto t = execute(*tp, tensor({src, resource}), kTele);
    ASSERT_EQ(t.leaves.size(), 4u);
    for (const auto& l : t.leaves) {
        EXPECT_NEAR(l.probability, 0.25, kTol);
        ASSERT_EQ(l.live_factors, (std::vector<int>{2}));
        EXPECT_GE(fidelity(l.final_state, src), 1.0 - kTauNorm);
    }
}

}  // namespace

TEST(Teleport, ZeroState) { expect_teleports(PureState::basis({2}, 0), bell_state(BellKind::PhiPlus)); }

TEST(Teleport, IdentityOverRandomSources) {
    std::mt19937_64 rng(22);
    for (int t = 0; t < 100; ++t) expect_teleports(random_state({2}, rng), bell_state(BellKind::PhiPlus));
}

TEST(Teleport, AnyMaximallyEntangledResource) {
    std::mt19937_64 rng(23);
    for (auto k : {BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus})
        expect_teleports(random_state({2}, rng), bell_state(k));
    for (int t = 0; t < 20; ++t) {
        const int b[] = {1};
        const auto twisted = apply_local_unitary(bell_state(BellKind::PhiPlus), b, UnitaryOp(random_unitary(2, rng)));
        expect_teleports(random_state({2}, rng), twisted);
    }
}

TEST(Teleport, HalfOfPhiPlus) {
    // Alice holds one half of |phi+> (factors 0 with Charlie's 1) and sends it to Bob.
    const auto layout = PartyLayout::concat({PartyLayout{{Party::Alice, Party::Charlie}, {0, 0}, {0, 0}},
                                             PartyLayout::bipartite_pairs(1, kResourceSlot)});
    const auto tp = teleport_node("tp", Party::Alice, Party::Bob, 0, {2, 3}, conclude_node({}));
    const auto t = execute(*tp, tensor({bell_state(BellKind::PhiPlus), bell_state(BellKind::PhiPlus)}), layout);
    ASSERT_EQ(t.leaves.size(), 4u);
    for (const auto& l : t.leaves) {
        EXPECT_EQ(l.live_factors, (std::vector<int>{1, 3}));
        EXPECT_NEAR(fidelity(l.final_state, bell_state(BellKind::PhiPlus)), 1.0, kTol);
    }
}

TEST(Teleport, RejectsWeakResource) {
    const PureState weak({std::sqrt(0.9), 0.0, 0.0, std::sqrt(0.1)}, {2, 2});
    EXPECT_THROW(resource_twist(weak), ResourceInvalid);
    const auto tp = teleport_node("tp", Party::Alice, Party::Bob, 0, {1, 2}, conclude_node({}));
    EXPECT_THROW(execute(*tp, tensor({PureState::basis({2}, 0), weak}), kTele), ResourceInvalid);
    EXPECT_THROW(execute(*tp, tensor({PureState::basis({2}, 0), PureState::basis({2, 2}, 0)}), kTele), ResourceInvalid);
}

TEST(Teleport, ExpansionShape) {
    const Teleport t{Party::Alice, Party::Bob, 0, 1, 2, conclude_node({})};
    const auto n = teleport_expand(t, "tp");
    const auto& m = std::get<LocalMeasure>(n->body);
    EXPECT_EQ(m.party, Party::Alice);
    EXPECT_EQ(m.factors, (std::vector<int>{0, 1}));
    EXPECT_EQ(m.children.size(), 4u);
    // Corrections are Paulis up to phase for a |phi+> resource.
    for (const auto& [k, c] : m.children) {
        const auto& u = std::get<LocalUnitary>(c->body);
        EXPECT_EQ(u.party, Party::Bob);
        bool pauli = false;
        for (char p : {'I', 'X', 'Y', 'Z'}) {
            const cplx ov = (pauli_matrix(p).adjoint() * u.u.matrix()).trace() / 2.0;
            pauli = pauli || std::abs(std::abs(ov) - 1.0) < kTol;
        }
        EXPECT_TRUE(pauli) << "outcome " << k;
    }
}

TEST(Teleport, AppendixCaseOneStep) {
    // Alice's half of the first part of chi_q moves to Bob through the
    // second part |phi->; the resource is destroyed and Bob holds the first part.
    const StateSet x4 = x4_set();
    for (int q = 1; q < 4; ++q) {
        const auto tp = teleport_node("tp", Party::Alice, Party::Bob, 0, {2, 3}, conclude_node({}));
        const auto t = execute(*tp, x4.states[q], x4.layout);
        for (const auto& l : t.leaves) {
            EXPECT_EQ(l.live_factors, (std::vector<int>{1, 3}));
            const auto want = bell_state(q == 1 ? BellKind::PhiMinus : q == 2 ? BellKind::PsiPlus : BellKind::PsiMinus);
            EXPECT_NEAR(fidelity(l.final_state, want), 1.0, kTol);
            EXPECT_NEAR(cross_party_entropy(l.final_state, x4.layout, l.live_factors), 0.0, kTol);
        }
    }
}

// --- probability conservation and transcripts -----------------------------------------

TEST(Properties, ProbabilityConservationOnRandomTrees) {
    std::mt19937_64 rng(24);
    const auto layout = PartyLayout::bipartite_pairs(2);
    std::function<NodePtr(int, std::vector<int>)> grow = [&](int depth, std::vector<int> live) -> NodePtr {
        if (depth == 0 || live.empty()) return conclude_node({});
        const int f = live[rng() % live.size()];
        std::vector<int> rest;
        for (int x : live)
            if (x != f) rest.push_back(x);
        std::map<int, NodePtr> kids;
        for (int k = 0; k < 2; ++k) kids[k] = grow(depth - 1, rest);
        const auto m = measure_node("m" + std::to_string(depth), layout.factor_party[f], {f},
                                    Basis(random_unitary(2, rng)), kids);
        return unitary_node("u" + std::to_string(depth), layout.factor_party[f], {f},
                            UnitaryOp(random_unitary(2, rng)), m);
    };
    for (int t = 0; t < 30; ++t) {
        const auto root = grow(4, {0, 1, 2, 3});
        const auto tree = execute(*root, random_state({2, 2, 2, 2}, rng), layout);
        EXPECT_NEAR(tree.total_probability(), 1.0, kTauNorm);
        for (const auto& l : tree.leaves) {
            EXPECT_GT(l.probability, 0.0);
            EXPECT_LE(l.probability, 1.0 + kTauNorm);
        }
    }
}

TEST(Prepare, ReplacesConsumedAndLiveFactors) {
    const auto layout = PartyLayout::bipartite_pairs(1);
    const auto plus = PureState::normalized({1.0, 1.0}, {2});
    // Live factor: reset first, then re-prepared.
    const auto p = prepare_node("prep", Party::Alice, {0}, plus, conclude_node({}));
    const auto t = execute(*p, bell_state(BellKind::PhiPlus), layout);
    ASSERT_EQ(t.leaves.size(), 2u);
    for (const auto& l : t.leaves) {
        EXPECT_EQ(l.live_factors, (std::vector<int>{1, 0}));
        const int f1[] = {1};
        const auto a = factor_state(l.final_state, f1);
        ASSERT_TRUE(a.has_value());
        EXPECT_NEAR(fidelity(*a, plus), 1.0, kTol);
    }
    EXPECT_NEAR(t.total_probability(), 1.0, kTol);
}

TEST(Prepare, WrongDimsThrow) {
    const auto p = prepare_node("prep", Party::Alice, {0}, PureState::basis({4}, 0), conclude_node({}));
    EXPECT_THROW(execute(*p, bell_state(BellKind::PhiPlus), kPair), InvalidArgument);
}

TEST(Transcript, CcDirections) {
    using E = TranscriptEntry;
    const std::vector<E> t{{"a", Party::Alice, ActionKind::Measure, 0},
                           {"b", Party::Bob, ActionKind::Measure, 1},
                           {"c", Party::Bob, ActionKind::Classify, 0},
                           {"d", Party::Bob, ActionKind::Unitary, -1},
                           {"e", Party::Alice, ActionKind::Measure, 0}};
    const auto d = cc_directions(t);
    EXPECT_EQ(d.size(), 2u);
    EXPECT_TRUE(d.contains({Party::Alice, Party::Bob}));
    EXPECT_TRUE(d.contains({Party::Bob, Party::Alice}));
    EXPECT_TRUE(cc_directions({}).empty());
}

TEST(OneWay, StaticCheck) {
    const auto lsd = product_basis_lsd();
    EXPECT_TRUE(respects_one_way(*lsd, Party::Alice));
    EXPECT_FALSE(respects_one_way(*lsd, Party::Bob));
    const auto back = measure_node("a2", Party::Alice, {0}, Basis::pauli_z(), {{0, conclude_node({})}, {1, conclude_node({})}});
    const auto bob_first = measure_node("b", Party::Bob, {1}, Basis::pauli_z(), {{0, back}, {1, back}});
    EXPECT_FALSE(respects_one_way(*bob_first, Party::Alice));
    EXPECT_TRUE(respects_one_way(*bob_first, Party::Bob));
    // A -> B -> A needs communication both ways.
    const auto tail = measure_node("b", Party::Bob, {3}, Basis::pauli_z(), {{0, back}, {1, back}});
    const auto two_way = measure_node("a1", Party::Alice, {2}, Basis::pauli_z(), {{0, tail}, {1, tail}});
    EXPECT_FALSE(respects_one_way(*two_way, Party::Alice));
    EXPECT_FALSE(respects_one_way(*two_way, Party::Bob));
}

TEST(Builders, ConcludeMustBeInjective) {
    EXPECT_THROW(conclude_node({{0, 1}, {1, 1}}), InvalidArgument);
    EXPECT_NO_THROW(conclude_node({{0, 1}, {1, 0}}));
}
