#include <algorithm>
#include <set>
#include <unordered_map>

#include "lsm/errors.hpp"
#include "lsm/marking.hpp"

namespace lsm {

namespace {

NodePtr make(std::string id, auto body) {
    return std::make_shared<const ProtocolNode>(ProtocolNode{std::move(id), std::move(body)});
}

// Structural rewrite of a protocol DAG. Shared subtrees stay shared.
class Rewriter {
public:
    Rewriter(std::function<int(int)> factor, std::function<NodePtr(const Assignment&)> leaf, std::string id_suffix)
        : factor_(std::move(factor)), leaf_(std::move(leaf)), suffix_(std::move(id_suffix)) {}

    NodePtr operator()(const NodePtr& n) {
        if (!n) return n;
        if (auto it = memo_.find(n.get()); it != memo_.end()) return it->second;
        NodePtr out = rewrite(*n);
        memo_.emplace(n.get(), out);
        return out;
    }

private:
    std::vector<int> map_all(const std::vector<int>& fs) {
        std::vector<int> out;
        for (int f : fs) out.push_back(factor_(f));
        return out;
    }

    NodePtr rewrite(const ProtocolNode& n) {
        const std::string id = n.id + suffix_;
        return std::visit(
            [&](const auto& b) -> NodePtr {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, LocalMeasure>) {
                    std::map<int, NodePtr> kids;
                    for (const auto& [k, c] : b.children) kids[k] = (*this)(c);
                    return make(id, LocalMeasure{b.party, map_all(b.factors), b.basis, std::move(kids)});
                } else if constexpr (std::is_same_v<T, LocalUnitary>) {
                    return make(id, LocalUnitary{b.party, map_all(b.factors), b.u, (*this)(b.child)});
                } else if constexpr (std::is_same_v<T, Teleport>) {
                    return make(id, Teleport{b.sender, b.receiver, factor_(b.source), factor_(b.resource_sender),
                                             factor_(b.resource_receiver), (*this)(b.child)});
                } else if constexpr (std::is_same_v<T, CorrelatedMeasure>) {
                    return make(id, CorrelatedMeasure{{b.first.party, factor_(b.first.factor)},
                                                      {b.second.party, factor_(b.second.factor)},
                                                      b.pauli,
                                                      (*this)(b.correlated),
                                                      (*this)(b.anticorrelated)});
                } else if constexpr (std::is_same_v<T, LocalPrepare>) {
                    return make(id, LocalPrepare{b.party, map_all(b.factors), b.state, (*this)(b.child)});
                } else if constexpr (std::is_same_v<T, Conclude>) {
                    return leaf_(b.assignment);
                } else {
                    return make(id, b);
                }
            },
            n.body);
    }

    std::function<int(int)> factor_;
    std::function<NodePtr(const Assignment&)> leaf_;
    std::string suffix_;
    std::unordered_map<const ProtocolNode*, NodePtr> memo_;
};

void require_perfect(const NodePtr& p, const StateSet& s, int m, const char* what) {
    if (!p) throw InvalidArgument(std::string(what) + ": null protocol");
    if (!verify_marking(*p, s, m).verdict.perfect)
        throw CompositionInvalid(std::string(what) + ": input protocol is not a perfect " + std::to_string(m) + "-LSM of " +
                                 s.name);
}

std::set<int> used_indices(const Assignment& a) {
    std::set<int> out;
    for (const auto& [slot, i] : a) out.insert(i);
    return out;
}

}  // namespace

NodePtr relocate(const NodePtr& p, int slot_shift, int factors_per_slot) {
    if (slot_shift == 0) return p;
    const int df = slot_shift * factors_per_slot;
    Rewriter rw([df](int f) { return f + df; },
                [slot_shift](const Assignment& a) {
                    Assignment out;
                    for (const auto& [slot, i] : a) out[slot + slot_shift] = i;
                    return conclude_node(std::move(out));
                },
                "@" + std::to_string(slot_shift));
    return rw(p);
}

NodePtr graft(const NodePtr& p, const std::function<NodePtr(const Assignment&)>& leaf) {
    Rewriter rw([](int f) { return f; }, leaf, "");
    return rw(p);
}

NodePtr lsm_from_lsd(const NodePtr& lsd, const StateSet& s, int K) {
    if (K < 1 || K > s.size()) throw InvalidArgument("lsm_from_lsd: K out of range");
    require_perfect(lsd, s, 1, "lsm_from_lsd");
    if (K == 1) return lsd;
    const int fps = s.factors_per_state();
    // Slot K-1 is inferred when exactly one candidate remains.
    const int measured = K == s.size() ? K - 1 : K;
    std::function<NodePtr(int, const Assignment&)> stage = [&](int k, const Assignment& known) -> NodePtr {
        if (k == measured) {
            Assignment out = known;
            if (measured < K) {
                const auto used = used_indices(known);
                for (int i = 0; i < s.size(); ++i)
                    if (!used.contains(i)) out[K - 1] = i;
            }
            return conclude_node(std::move(out));
        }
        return graft(relocate(lsd, k, fps), [&, k](const Assignment& a) {
            const int i = a.at(k);
            if (used_indices(known).contains(i)) return abort_node("index already identified");
            Assignment next = known;
            next[k] = i;
            return stage(k + 1, next);
        });
    };
    return stage(0, {});
}

NodePtr compose_m_to_nm(const NodePtr& p_m, const StateSet& s, int m, int n) {
    if (m < 1 || n < 1) throw InvalidArgument("compose_m_to_nm: m and n must be positive");
    if (static_cast<long>(n) * m > s.size()) throw InvalidArgument("compose_m_to_nm: n*m exceeds the set size");
    require_perfect(p_m, s, m, "compose_m_to_nm");
    if (n == 1) return p_m;
    const int fps = s.factors_per_state();
    std::function<NodePtr(int, const Assignment&)> block = [&](int b, const Assignment& known) -> NodePtr {
        if (b == n) return conclude_node(known);
        return graft(relocate(p_m, b * m, fps), [&, b](const Assignment& a) {
            Assignment next = known;
            const auto used = used_indices(known);
            for (const auto& [slot, i] : a) {
                if (used.contains(i)) return abort_node("block repeats an identified index");
                next[slot] = i;
            }
            return block(b + 1, next);
        });
    };
    return block(0, {});
}

NodePtr product_extend(const NodePtr& p_m, const StateSet& s, int m) {
    if (m < 1 || m + 1 > s.size()) throw InvalidArgument("product_extend: need 1 <= m < |s|");
    for (const auto& st : s.states)
        if (!is_party_product(st, s.layout)) throw NotProductSet("product_extend: '" + s.name + "' has an entangled member");
    require_perfect(p_m, s, m, "product_extend");
    const int fps = s.factors_per_state();
    const int base = s.layout.factor_slot.front();
    const NodePtr second = relocate(p_m, 1, fps);

    return graft(p_m, [&](const Assignment& first) -> NodePtr {
        // Second run over slots 1..m; slots 1..m-1 must agree with the first.
        NodePtr tail = graft(second, [&first, m](const Assignment& a) {
            Assignment out = first;
            for (int k = 1; k < m; ++k)
                if (a.at(k) != first.at(k)) return abort_node("runs disagree on a shared slot");
            out[m] = a.at(m);
            if (used_indices(out).size() != out.size()) return abort_node("index already identified");
            return conclude_node(std::move(out));
        });
        // Re-prepare slots 1..m-1 from their identified members, one party at a time.
        for (int k = m - 1; k >= 1; --k) {
            const PureState& member = s.states[first.at(k)];
            for (Party p : {Party::Charlie, Party::Bob, Party::Alice}) {
                std::vector<int> local;
                for (int f = 0; f < fps; ++f)
                    if (s.layout.factor_party[f] == p && s.layout.factor_slot[f] == base) local.push_back(f);
                if (local.empty()) continue;
                auto st = factor_state(member, local);
                if (!st) throw NotProductSet("product_extend: member is not a product across parties");
                std::vector<int> global;
                for (int f : local) global.push_back(k * fps + f);
                tail = prepare_node("prep.s" + std::to_string(k) + "." + to_string(p), p, std::move(global), *st, tail);
            }
        }
        return tail;
    });
}

NodePtr extend_last_two(const NodePtr& p, const StateSet& s, int K, int factor_offset, Party first) {
    if (K != s.size()) throw InvalidArgument("extend_last_two: K must equal the set size");
    if (K < 2) throw InvalidArgument("extend_last_two: need at least two members");
    return graft(p, [&](const Assignment& a) -> NodePtr {
        const auto used = used_indices(a);
        std::vector<int> rest;
        for (int i = 0; i < K; ++i)
            if (!used.contains(i)) rest.push_back(i);
        if (rest.size() != 2) throw InvalidArgument("extend_last_two: front end must identify K-2 slots");
        auto leaf = [&](int x, int y) {
            Assignment out = a;
            out[K - 2] = x;
            out[K - 1] = y;
            return conclude_node(std::move(out));
        };
        return bell_tensor_pair_step("pair", s, rest[0], rest[1], K - 2, factor_offset, leaf(rest[0], rest[1]),
                                     leaf(rest[1], rest[0]), first);
    });
}

}  // namespace lsm
