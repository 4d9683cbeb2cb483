#include <gtest/gtest.h>

#include "lsm/errors.hpp"
#include "lsm/marking.hpp"
#include "support.hpp"

using namespace lsm;

namespace {

StateSet single_bit_set() {
    return StateSet::make("bit", {PureState::basis({2}, 0), PureState::basis({2}, 1)}, PartyLayout::single_party(1));
}

// Verdict distribution of a protocol on one assignment, keyed by conclusion.
std::map<std::optional<Assignment>, double> verdicts(const ProtocolNode& p, const StateSet& s, const std::vector<int>& a) {
    const auto inst = make_instance(s, a);
    std::map<std::optional<Assignment>, double> out;
    for (const auto& l : execute(p, inst.composite, inst.layout).leaves) out[l.verdict] += l.probability;
    return out;
}

std::vector<std::vector<int>> consistent(const std::vector<int>& prefix, const std::vector<int>& rest) {
    auto a = prefix, b = prefix;
    a.insert(a.end(), rest.begin(), rest.end());
    b.insert(b.end(), rest.rbegin(), rest.rend());
    return {a, b};
}

}  // namespace

TEST(Relocate, ShiftsFactorsAndSlots) {
    const auto p = relocate(product_basis_lsd(), 2, 2);
    const auto& a = std::get<LocalMeasure>(p->body);
    EXPECT_EQ(a.factors, (std::vector<int>{4}));
    const auto& b = std::get<LocalMeasure>(a.children.at(1)->body);
    EXPECT_EQ(b.factors, (std::vector<int>{5}));
    EXPECT_EQ(std::get<Conclude>(b.children.at(0)->body).assignment, (Assignment{{2, 2}}));
    EXPECT_EQ(relocate(p, 0, 2), p);
}

TEST(Graft, ReplacesConclusions) {
    const auto g = graft(single_bit_lsd(), [](const Assignment& a) { return conclude_node({{0, 1 - a.at(0)}}); });
    const auto& m = std::get<LocalMeasure>(g->body);
    EXPECT_EQ(std::get<Conclude>(m.children.at(0)->body).assignment, (Assignment{{0, 1}}));
}

TEST(LsmFromLsd, ProductBasisK4) {
    const auto s = product_basis4();
    const auto p = lsm_from_lsd(product_basis_lsd(), s, 4);
    const auto r = verify_marking(*p, s, 4);
    EXPECT_EQ(r.verdict.results.size(), 24u);
    EXPECT_TRUE(r.verdict.perfect);
}

TEST(LsmFromLsd, KOneReturnsInput) {
    const auto lsd = product_basis_lsd();
    EXPECT_EQ(lsm_from_lsd(lsd, product_basis4(), 1), lsd);
}

TEST(LsmFromLsd, SingleBit) {
    const auto s = single_bit_set();
    const auto p = lsm_from_lsd(single_bit_lsd(), s, 2);
    const auto r = verify_marking(*p, s, 2);
    EXPECT_EQ(r.verdict.results.size(), 2u);
    EXPECT_TRUE(r.verdict.perfect);
}

TEST(LsmFromLsd, PartialMarking) {
    const auto s = product_basis4();
    EXPECT_TRUE(verify_marking(*lsm_from_lsd(product_basis_lsd(), s, 2), s, 2).verdict.perfect);
    EXPECT_TRUE(verify_marking(*lsm_from_lsd(product_basis_lsd(), s, 3), s, 3).verdict.perfect);
}

TEST(LsmFromLsd, ImperfectLsdRejected) {
    EXPECT_THROW(lsm_from_lsd(naive_z_protocol(bell_basis(), 1), bell_basis(), 4), CompositionInvalid);
    EXPECT_THROW(lsm_from_lsd(product_basis_lsd(), product_basis4(), 5), InvalidArgument);
}

TEST(LsmFromLsd, RandomProductSets) {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 24; ++t) {
        const int K = 2 + t % 3;
        const auto c = lsm::testing::random_product_set(K, rng);
        ASSERT_TRUE(verify_marking(*c.lsd, c.set, 1).verdict.perfect);
        const auto p = lsm_from_lsd(c.lsd, c.set, K);
        EXPECT_TRUE(verify_marking(*p, c.set, K).verdict.perfect) << "trial " << t;
    }
}

TEST(ComposeMToNm, NOneReturnsInput) {
    const auto lsd = product_basis_lsd();
    EXPECT_EQ(compose_m_to_nm(lsd, product_basis4(), 1, 1), lsd);
}

TEST(ComposeMToNm, ProductBasisTwoBlocksOfTwo) {
    const auto s = product_basis4();
    const auto p2 = lsm_from_lsd(product_basis_lsd(), s, 2);
    const auto p4 = compose_m_to_nm(p2, s, 2, 2);
    EXPECT_TRUE(verify_marking(*p4, s, 4).verdict.perfect);
}

TEST(ComposeMToNm, AgreesWithLsmFromLsd) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 6; ++t) {
        const int K = 2 + t % 3;
        const auto c = lsm::testing::random_product_set(K, rng);
        const auto a = lsm_from_lsd(c.lsd, c.set, K);
        const auto b = compose_m_to_nm(c.lsd, c.set, 1, K);
        for (const auto& asg : ordered_assignments(K, K)) {
            const auto va = verdicts(*a, c.set, asg);
            const auto vb = verdicts(*b, c.set, asg);
            ASSERT_EQ(va.size(), vb.size());
            for (const auto& [v, p] : va) EXPECT_NEAR(vb.at(v), p, 1e-9);
        }
    }
}

TEST(ComposeMToNm, Errors) {
    const auto s = product_basis4();
    EXPECT_THROW(compose_m_to_nm(product_basis_lsd(), s, 1, 5), InvalidArgument);
    EXPECT_THROW(compose_m_to_nm(lsm_from_lsd(product_basis_lsd(), s, 2), s, 2, 3), InvalidArgument);
    EXPECT_THROW(compose_m_to_nm(naive_z_protocol(bell_basis(), 1), bell_basis(), 1, 2), CompositionInvalid);
}

TEST(ProductExtend, TwoToThree) {
    const auto s = product_basis4();
    const auto p3 = product_extend(lsm_from_lsd(product_basis_lsd(), s, 2), s, 2);
    EXPECT_TRUE(verify_marking(*p3, s, 3).verdict.perfect);
}

TEST(ProductExtend, ChainOneToFour) {
    const auto s = product_basis4();
    NodePtr p = product_basis_lsd();
    for (int m = 1; m < 4; ++m) {
        p = product_extend(p, s, m);
        EXPECT_TRUE(verify_marking(*p, s, m + 1).verdict.perfect) << "m+1 = " << m + 1;
    }
}

TEST(ProductExtend, RandomProductBases) {
    std::mt19937_64 rng(33);
    for (int t = 0; t < 3; ++t) {
        const auto c = lsm::testing::random_product_set(4, rng);
        const auto p3 = product_extend(lsm_from_lsd(c.lsd, c.set, 2), c.set, 2);
        EXPECT_TRUE(verify_marking(*p3, c.set, 3).verdict.perfect);
    }
}

TEST(ProductExtend, RejectsEntangledMember) {
    auto s = product_basis4();
    s.states[3] = bell_state(BellKind::PhiPlus);
    s = StateSet::make("mixed", s.states, s.layout, false);
    EXPECT_THROW(product_extend(product_basis_lsd(), s, 1), NotProductSet);
    EXPECT_THROW(product_extend(product_basis_lsd(), product_basis4(), 4), InvalidArgument);
}

TEST(ExtendLastTwo, B4WithOracleFrontEnd) {
    const auto s = bell_basis();
    for (const auto& front : ordered_assignments(4, 2)) {
        std::vector<int> rest;
        for (int i = 0; i < 4; ++i)
            if (i != front[0] && i != front[1]) rest.push_back(i);
        const auto p = extend_last_two(conclude_node({{0, front[0]}, {1, front[1]}}), s, 4);
        VerifyOptions opts;
        opts.assignments = consistent(front, rest);
        EXPECT_TRUE(verify_marking(*p, s, 4, std::nullopt, opts).verdict.perfect);
    }
}

TEST(ExtendLastTwo, X4WithOracleFrontEnd) {
    const auto s = x4_set();
    for (const auto& front : ordered_assignments(4, 2)) {
        std::vector<int> rest;
        for (int i = 0; i < 4; ++i)
            if (i != front[0] && i != front[1]) rest.push_back(i);
        const auto p = extend_last_two(conclude_node({{0, front[0]}, {1, front[1]}}), s, 4);
        VerifyOptions opts;
        opts.assignments = consistent(front, rest);
        const auto r = verify_marking(*p, s, 4, std::nullopt, opts);
        EXPECT_TRUE(r.verdict.perfect);
        // Only one pair is measured on slot 2; the rest survives.
        for (const auto& a : r.verdict.results)
            for (const auto& l : a.leaves) EXPECT_GE(l.residual_ebits, 5.0 - 1e-9);
    }
}

TEST(ExtendLastTwo, Errors) {
    EXPECT_THROW(extend_last_two(conclude_node({{0, 0}}), bell_basis(), 3), InvalidArgument);
    // Front end identifies too few slots.
    EXPECT_THROW(extend_last_two(conclude_node({{0, 0}}), bell_basis(), 4), InvalidArgument);
    EXPECT_THROW(extend_last_two(conclude_node({{0, 0}, {1, 1}}), product_basis4(), 4), UnsupportedPair);
}
