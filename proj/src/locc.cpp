#include "lsm/locc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "lsm/errors.hpp"

namespace lsm {

namespace {

NodePtr make(std::string id, auto body) {
    return std::make_shared<const ProtocolNode>(ProtocolNode{std::move(id), std::move(body)});
}

}  // namespace

NodePtr measure_node(std::string id, Party party, std::vector<int> factors, Basis basis,
                     std::map<int, NodePtr> children) {
    return make(std::move(id), LocalMeasure{party, std::move(factors), std::move(basis), std::move(children)});
}

NodePtr unitary_node(std::string id, Party party, std::vector<int> factors, UnitaryOp u, NodePtr child) {
    return make(std::move(id), LocalUnitary{party, std::move(factors), std::move(u), std::move(child)});
}

NodePtr teleport_node(std::string id, Party sender, Party receiver, int source, std::pair<int, int> resource,
                      NodePtr child) {
    return make(std::move(id), Teleport{sender, receiver, source, resource.first, resource.second, std::move(child)});
}

NodePtr prepare_node(std::string id, Party party, std::vector<int> factors, PureState state, NodePtr child) {
    return make(std::move(id), LocalPrepare{party, std::move(factors), std::move(state), std::move(child)});
}

NodePtr conclude_node(Assignment assignment, std::string id) {
    std::set<int> used;
    for (const auto& [slot, idx] : assignment)
        if (!used.insert(idx).second) throw InvalidArgument("conclusion assigns one state to two slots");
    return make(std::move(id), Conclude{std::move(assignment)});
}

NodePtr abort_node(std::string reason, std::string id) { return make(std::move(id), Abort{std::move(reason)}); }

NodePtr correlated_pauli_step(std::string id, FactorRef first, FactorRef second, Pauli pauli, NodePtr on_correlated,
                              NodePtr on_anticorrelated) {
    if (first.party == second.party)
        throw InvalidArgument("correlated Pauli step needs factors on two different parties");
    return make(std::move(id),
                CorrelatedMeasure{first, second, pauli, std::move(on_correlated), std::move(on_anticorrelated)});
}

bool bell_correlated(BellKind k, Pauli p) {
    if (p == Pauli::Z) return k == BellKind::PhiPlus || k == BellKind::PhiMinus;
    return k == BellKind::PhiPlus || k == BellKind::PsiPlus;
}

BellDiscriminator bell_pair_discriminator(BellKind a, BellKind b) {
    if (a == b) throw InvalidArgument("discriminator needs two different Bell states");
    const Pauli p = bell_correlated(a, Pauli::Z) != bell_correlated(b, Pauli::Z) ? Pauli::Z : Pauli::X;
    if (bell_correlated(a, p)) return {p, a, b};
    return {p, b, a};
}

UnitaryOp resource_twist(const PureState& pair) {
    if (pair.dims() != std::vector<int>{2, 2}) throw ResourceInvalid("teleport resource must be a qubit pair");
    Matrix r(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = pair[2 * i + j];
    const Matrix v = std::sqrt(2.0) * r.transpose();
    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // Fidelity with the closest maximally entangled state: (l1 + l2)^2 / 2,
    // where l_i = s_i / sqrt 2 are the Schmidt coefficients.
    const auto& s = svd.singularValues();
    const double fid = 0.25 * (s[0] + s[1]) * (s[0] + s[1]);
    if (fid < 1.0 - kTauNorm) throw ResourceInvalid("teleport resource is not maximally entangled");
    return UnitaryOp(svd.matrixU() * svd.matrixV().adjoint());
}

NodePtr teleport_expand(const Teleport& t, const std::string& id, const UnitaryOp& resource_twist) {
    const Basis bell = Basis::bell();
    std::map<int, NodePtr> children;
    for (int k = 0; k < 4; ++k) {
        // Receiver holds M_k|src> with M_k = sqrt2 * B_k^dagger, B_k the
        // 2x2 coefficient matrix of Bell vector k over (source, resource_sender).
        Matrix b(2, 2);
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) b(s, a) = bell.vectors()(2 * s + a, k);
        const Matrix m = std::sqrt(2.0) * b.adjoint();
        UnitaryOp fix(m.adjoint() * resource_twist.matrix().adjoint());
        children[k] = unitary_node(id + "/fix" + std::to_string(k), t.receiver, {t.resource_receiver}, std::move(fix),
                                   t.child);
    }
    return measure_node(id + "/bm", t.sender, {t.source, t.resource_sender}, bell, std::move(children));
}

// --- validation -------------------------------------------------------------

namespace {

void require_owned(const PartyLayout& layout, Party p, int f, const std::string& id) {
    if (f < 0 || f >= layout.num_factors()) throw InvalidArgument("node '" + id + "' uses factor out of range");
    if (layout.factor_party[f] != p)
        throw LocalityViolation("node '" + id + "' acts on factor " + std::to_string(f) + " held by " +
                                to_string(layout.factor_party[f]) + ", not " + to_string(p));
}

void require_owned_all(const PartyLayout& layout, Party p, const std::vector<int>& fs, const std::string& id) {
    if (fs.empty()) throw InvalidArgument("node '" + id + "' lists no factors");
    for (int f : fs) require_owned(layout, p, f, id);
}

void validate_rec(const ProtocolNode& n, const PartyLayout& layout, std::unordered_set<const ProtocolNode*>& seen) {
    if (!seen.insert(&n).second) return;
    auto next = [&](const NodePtr& c) {
        if (!c) throw InvalidArgument("node '" + n.id + "' has a missing child");
        validate_rec(*c, layout, seen);
    };
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LocalMeasure>) {
                require_owned_all(layout, b.party, b.factors, n.id);
                for (const auto& [k, c] : b.children) next(c);
            } else if constexpr (std::is_same_v<T, LocalUnitary>) {
                require_owned_all(layout, b.party, b.factors, n.id);
                next(b.child);
            } else if constexpr (std::is_same_v<T, Teleport>) {
                if (b.sender == b.receiver) throw InvalidArgument("teleport '" + n.id + "' to the same party");
                if (b.source == b.resource_sender) throw InvalidArgument("teleport '" + n.id + "' reuses its source");
                require_owned(layout, b.sender, b.source, n.id);
                require_owned(layout, b.sender, b.resource_sender, n.id);
                require_owned(layout, b.receiver, b.resource_receiver, n.id);
                next(b.child);
            } else if constexpr (std::is_same_v<T, CorrelatedMeasure>) {
                if (b.first.party == b.second.party)
                    throw InvalidArgument("correlated step '" + n.id + "' on a single party");
                require_owned(layout, b.first.party, b.first.factor, n.id);
                require_owned(layout, b.second.party, b.second.factor, n.id);
                next(b.correlated);
                next(b.anticorrelated);
            } else if constexpr (std::is_same_v<T, LocalPrepare>) {
                require_owned_all(layout, b.party, b.factors, n.id);
                next(b.child);
            }
        },
        n.body);
}

// --- engine -----------------------------------------------------------------

struct Branch {
    PureState state;
    std::vector<int> live;
    double probability;
    std::vector<TranscriptEntry> transcript;
};

class Engine {
  public:
    Engine(const PartyLayout& layout, std::vector<int> input_dims)
        : layout_(layout), input_dims_(std::move(input_dims)) {}

    std::vector<BranchOutcome> leaves;

    void run(const ProtocolNode& n, Branch br) {
        std::visit([&](const auto& b) { step(n, b, std::move(br)); }, n.body);
    }

  private:
    const PartyLayout& layout_;
    std::vector<int> input_dims_;

    std::vector<int> positions(const Branch& br, const std::vector<int>& factors, const std::string& id) const {
        std::vector<int> pos;
        for (int f : factors) {
            auto it = std::find(br.live.begin(), br.live.end(), f);
            if (it == br.live.end())
                throw InvalidArgument("node '" + id + "' acts on consumed factor " + std::to_string(f));
            pos.push_back(static_cast<int>(it - br.live.begin()));
        }
        return pos;
    }

    static std::vector<int> without(const std::vector<int>& live, const std::vector<int>& gone) {
        std::vector<int> out;
        for (int f : live)
            if (std::find(gone.begin(), gone.end(), f) == gone.end()) out.push_back(f);
        return out;
    }

    // Measures `factors`, removes them, and hands every surviving outcome to `k`.
    template <class K>
    void measure(const Branch& br, const std::vector<int>& factors, const Basis& basis, Party party,
                 const std::string& id, K&& k) {
        const auto pos = positions(br, factors, id);
        const auto live = without(br.live, factors);
        for (auto& o : measure_and_discard(br.state, pos, basis)) {
            Branch nb{std::move(o.post), live, br.probability * o.probability, br.transcript};
            nb.transcript.push_back({id, party, ActionKind::Measure, o.index});
            k(o.index, std::move(nb));
        }
    }

    void step(const ProtocolNode& n, const LocalMeasure& m, Branch br) {
        measure(br, m.factors, m.basis, m.party, n.id, [&](int k, Branch nb) {
            auto it = m.children.find(k);
            if (it == m.children.end() || !it->second)
                throw InvalidArgument("node '" + n.id + "' has no branch for outcome " + std::to_string(k));
            run(*it->second, std::move(nb));
        });
    }

    void step(const ProtocolNode& n, const LocalUnitary& u, Branch br) {
        const auto pos = positions(br, u.factors, n.id);
        br.state = apply_local_unitary(br.state, pos, u.u);
        br.transcript.push_back({n.id, u.party, ActionKind::Unitary, -1});
        run(*u.child, std::move(br));
    }

    void step(const ProtocolNode& n, const Teleport& t, Branch br) {
        const auto pos = positions(br, {t.resource_sender, t.resource_receiver}, n.id);
        const auto pair = factor_state(br.state, pos);
        if (!pair) throw ResourceInvalid("teleport '" + n.id + "' resource pair is not in a pure state");
        const NodePtr expanded = teleport_expand(t, n.id, resource_twist(*pair));
        run(*expanded, std::move(br));
    }

    void step(const ProtocolNode& n, const CorrelatedMeasure& c, Branch br) {
        const Basis basis = c.pauli == Pauli::X ? Basis::pauli_x() : Basis::pauli_z();
        measure(br, {c.first.factor}, basis, c.first.party, n.id, [&](int a, Branch b1) {
            measure(b1, {c.second.factor}, basis, c.second.party, n.id, [&](int b, Branch b2) {
                const bool same = a == b;
                b2.transcript.push_back({n.id, c.second.party, ActionKind::Classify, same ? 0 : 1});
                run(same ? *c.correlated : *c.anticorrelated, std::move(b2));
            });
        });
    }

    void step(const ProtocolNode& n, const LocalPrepare& p, Branch br) {
        std::vector<int> fdims;
        for (int f : p.factors) {
            if (f < 0 || f >= static_cast<int>(input_dims_.size()))
                throw InvalidArgument("prepare '" + n.id + "' factor out of range");
            fdims.push_back(input_dims_[f]);
        }
        if (fdims != p.state.dims()) throw InvalidArgument("prepare '" + n.id + "' state does not fit its factors");
        std::vector<int> still_live;
        for (int f : p.factors)
            if (std::find(br.live.begin(), br.live.end(), f) != br.live.end()) still_live.push_back(f);
        auto finish = [&](Branch b) {
            if (b.live.empty()) {
                const cplx phase = b.state[0];
                std::vector<cplx> a(p.state.amps());
                for (auto& x : a) x *= phase;
                b.state = PureState(std::move(a), p.state.dims());
            } else {
                b.state = tensor({b.state, p.state});
            }
            b.live.insert(b.live.end(), p.factors.begin(), p.factors.end());
            b.transcript.push_back({n.id, p.party, ActionKind::Prepare, -1});
            run(*p.child, std::move(b));
        };
        if (still_live.empty()) {
            finish(std::move(br));
            return;
        }
        std::size_t joint = 1;
        for (int f : still_live) joint *= input_dims_[f];
        measure(br, still_live, Basis::computational(static_cast<int>(joint)), p.party, n.id + "/reset",
                [&](int, Branch nb) { finish(std::move(nb)); });
    }

    void step(const ProtocolNode&, const Conclude& c, Branch br) {
        leaves.push_back({br.probability, std::move(br.transcript), std::move(br.state), std::move(br.live), c.assignment});
    }

    void step(const ProtocolNode&, const Abort&, Branch br) {
        leaves.push_back({br.probability, std::move(br.transcript), std::move(br.state), std::move(br.live), std::nullopt});
    }
};

}  // namespace

void validate_locality(const ProtocolNode& root, const PartyLayout& layout) {
    layout.validate();
    std::unordered_set<const ProtocolNode*> seen;
    validate_rec(root, layout, seen);
}

BranchTree execute(const ProtocolNode& root, const PureState& input, const PartyLayout& layout) {
    if (layout.num_factors() != input.num_factors()) throw InvalidArgument("layout does not match input state");
    validate_locality(root, layout);
    std::vector<int> live(input.num_factors());
    for (int i = 0; i < input.num_factors(); ++i) live[i] = i;
    Engine eng(layout, input.dims());
    eng.run(root, Branch{input, std::move(live), 1.0, {}});
    return BranchTree{input.dims(), layout, std::move(eng.leaves)};
}

double BranchTree::total_probability() const {
    double s = 0.0;
    for (const auto& l : leaves) s += l.probability;
    return s;
}

std::set<std::pair<Party, Party>> cc_directions(const std::vector<TranscriptEntry>& transcript) {
    std::set<std::pair<Party, Party>> out;
    const TranscriptEntry* prev = nullptr;
    for (const auto& e : transcript) {
        if (e.kind == ActionKind::Classify) continue;
        if (prev && prev->party != e.party) out.insert({prev->party, e.party});
        prev = &e;
    }
    return out;
}

namespace {

// `others_started`: some party other than `first` already acted on this path.
bool one_way_rec(const ProtocolNode& n, Party first, bool others_started) {
    auto acts = [&](Party p) {
        if (p != first) return true;
        return !others_started;
    };
    auto after = [&](Party p) { return others_started || p != first; };
    return std::visit(
        [&](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LocalMeasure>) {
                if (!acts(b.party)) return false;
                for (const auto& [k, c] : b.children)
                    if (!one_way_rec(*c, first, after(b.party))) return false;
                return true;
            } else if constexpr (std::is_same_v<T, LocalUnitary> || std::is_same_v<T, LocalPrepare>) {
                return acts(b.party) && one_way_rec(*b.child, first, after(b.party));
            } else if constexpr (std::is_same_v<T, Teleport>) {
                // Sender measures, receiver corrects.
                if (!acts(b.sender)) return false;
                const bool s = after(b.sender) || after(b.receiver);
                if (b.receiver == first && s) return false;
                return one_way_rec(*b.child, first, s);
            } else if constexpr (std::is_same_v<T, CorrelatedMeasure>) {
                if (!acts(b.first.party)) return false;
                const bool s1 = after(b.first.party);
                if (b.second.party == first && s1) return false;
                const bool s2 = s1 || b.second.party != first;
                return one_way_rec(*b.correlated, first, s2) && one_way_rec(*b.anticorrelated, first, s2);
            } else {
                return true;
            }
        },
        n.body);
}

}  // namespace

bool respects_one_way(const ProtocolNode& root, Party first) { return one_way_rec(root, first, false); }

std::size_t node_count(const ProtocolNode& root) {
    return std::visit(
        [](const auto& b) -> std::size_t {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LocalMeasure>) {
                std::size_t s = 1;
                for (const auto& [k, c] : b.children) s += node_count(*c);
                return s;
            } else if constexpr (std::is_same_v<T, CorrelatedMeasure>) {
                return 1 + node_count(*b.correlated) + node_count(*b.anticorrelated);
            } else if constexpr (std::is_same_v<T, Conclude> || std::is_same_v<T, Abort>) {
                return 1;
            } else {
                return 1 + node_count(*b.child);
            }
        },
        root.body);
}

}  // namespace lsm
