#include "lsm/serialize.hpp"

#include "lsm/errors.hpp"

namespace lsm {

namespace {

const char* kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::Measure: return "measure";
        case ActionKind::Unitary: return "unitary";
        case ActionKind::Prepare: return "prepare";
        case ActionKind::Classify: return "classify";
    }
    return "?";
}

json encode_ref(const FactorRef& r) { return {{"party", to_string(r.party)}, {"factor", r.factor}}; }

FactorRef decode_ref(const json& j) { return {party_from_string(j.at("party").get<std::string>()), j.at("factor").get<int>()}; }

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

json encode(cplx z) { return json::array({z.real(), z.imag()}); }

json encode_vector(const CVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(encode(v[i]));
    return out;
}

json encode_matrix(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(encode(m(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

json encode(const PureState& s) {
    json amps = json::array();
    for (const auto& a : s.amps()) amps.push_back(encode(a));
    return {{"dims", s.dims()}, {"amps", std::move(amps)}};
}

json encode(const Basis& b) {
    json out{{"name", b.name()}, {"dim", b.dim()}};
    bool standard = false;
    if (!b.name().empty()) {
        try {
            standard = Basis::named(b.name(), b.dim()) == b;
        } catch (const Error&) {
        }
    }
    if (!standard) out["matrix"] = encode_matrix(b.vectors());
    return out;
}

json encode(const PartyLayout& l) {
    json parties = json::array();
    for (Party p : l.factor_party) parties.push_back(to_string(p));
    return {{"party", std::move(parties)}, {"slot", l.factor_slot}, {"role", l.factor_role}};
}

json encode(const StateSet& s) {
    json states = json::array();
    for (const auto& st : s.states) states.push_back(encode(st));
    return {{"name", s.name}, {"states", std::move(states)}, {"layout", encode(s.layout)},
            {"pairwise_orthogonal", s.pairwise_orthogonal}};
}

json encode(const Assignment& a) {
    json out = json::object();
    for (const auto& [slot, i] : a) out[std::to_string(slot)] = i;
    return out;
}

json encode(const TranscriptEntry& e) {
    return {{"node", e.node_id}, {"party", to_string(e.party)}, {"kind", kind_name(e.kind)}, {"outcome", e.outcome}};
}

json encode(const ProtocolNode& n) {
    json out{{"id", n.id}};
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LocalMeasure>) {
                out["kind"] = "measure";
                out["party"] = to_string(b.party);
                out["factors"] = b.factors;
                out["basis"] = encode(b.basis);
                json kids = json::object();
                for (const auto& [k, c] : b.children) kids[std::to_string(k)] = encode(*c);
                out["children"] = std::move(kids);
            } else if constexpr (std::is_same_v<T, LocalUnitary>) {
                out["kind"] = "unitary";
                out["party"] = to_string(b.party);
                out["factors"] = b.factors;
                out["matrix"] = encode_matrix(b.u.matrix());
                out["child"] = encode(*b.child);
            } else if constexpr (std::is_same_v<T, Teleport>) {
                out["kind"] = "teleport";
                out["sender"] = to_string(b.sender);
                out["receiver"] = to_string(b.receiver);
                out["source"] = b.source;
                out["resource"] = {b.resource_sender, b.resource_receiver};
                out["child"] = encode(*b.child);
            } else if constexpr (std::is_same_v<T, CorrelatedMeasure>) {
                out["kind"] = "correlate";
                out["first"] = encode_ref(b.first);
                out["second"] = encode_ref(b.second);
                out["pauli"] = to_string(b.pauli);
                out["correlated"] = encode(*b.correlated);
                out["anticorrelated"] = encode(*b.anticorrelated);
            } else if constexpr (std::is_same_v<T, LocalPrepare>) {
                out["kind"] = "prepare";
                out["party"] = to_string(b.party);
                out["factors"] = b.factors;
                out["state"] = encode(b.state);
                out["child"] = encode(*b.child);
            } else if constexpr (std::is_same_v<T, Conclude>) {
                out["kind"] = "conclude";
                out["assignment"] = encode(b.assignment);
            } else {
                out["kind"] = "abort";
                out["reason"] = b.reason;
            }
        },
        n.body);
    return out;
}

json encode(const EntanglementLedger& l) {
    json out{{"avg_residual_ebits", l.average_residual},
             {"min_residual_ebits", l.min_residual},
             {"max_residual_ebits", l.max_residual},
             {"surplus_ebits", l.surplus},
             {"max_instance_ebits", l.max_instance_ebits}};
    out["supplied_ebits"] = l.supplied ? json(*l.supplied) : json(nullptr);
    out["returned_ebits"] = l.returned ? json(*l.returned) : json(nullptr);
    return out;
}

json encode(const MarkingReport& r, bool include_leaves) {
    json results = json::array();
    for (const auto& a : r.verdict.results) {
        json item{{"assignment", a.assignment},
                  {"success_probability", a.success_probability},
                  {"mislabeled", a.mislabeled},
                  {"avg_residual_ebits", a.average_residual},
                  {"instance_ebits", a.instance_ebits}};
        if (include_leaves) {
            json leaves = json::array();
            for (const auto& l : a.leaves) {
                json t = json::array();
                for (const auto& e : l.transcript) t.push_back(encode(e));
                leaves.push_back({{"probability", l.probability},
                                  {"residual_ebits", l.residual_ebits},
                                  {"verdict", l.verdict ? encode(*l.verdict) : json(nullptr)},
                                  {"correct", l.correct},
                                  {"transcript", std::move(t)}});
            }
            item["leaves"] = std::move(leaves);
        }
        results.push_back(std::move(item));
    }
    return {{"perfect", r.verdict.perfect}, {"ledger", encode(r.ledger)}, {"results", std::move(results)}};
}

json encode(const GramSearchProblem& p) {
    json us = json::array();
    for (const auto& u : p.unitaries) us.push_back(encode_matrix(u.matrix()));
    return {{"d", p.d}, {"unitaries", std::move(us)}};
}

json encode(const GramSearchResult& r) {
    return {{"verdict", to_string(r.verdict)},
            {"best_objective", r.best_objective},
            {"best_chi", encode_vector(r.best_chi)},
            {"restarts", r.restarts},
            {"restart_minima", r.restart_minima},
            {"certificate", r.verdict == SearchVerdict::Feasible
                                ? "explicit witness"
                                : "heuristic: no restart reached the feasibility tolerance; not a proof of infeasibility"}};
}

// --- decoding ----------------------------------------------------------------

cplx decode_complex(const json& j) {
    return guarded("complex number", [&] {
        if (!j.is_array() || j.size() != 2) throw InvalidArgument("complex number must be [re, im]");
        return cplx(j[0].get<double>(), j[1].get<double>());
    });
}

CVector decode_vector(const json& j) {
    if (!j.is_array()) throw InvalidArgument("vector must be a list");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = decode_complex(j[i]);
    return v;
}

Matrix decode_matrix(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw InvalidArgument("matrix must be a nonempty list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw InvalidArgument("ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = decode_complex(row[static_cast<std::size_t>(c)]);
    }
    return m;
}

PureState decode_state(const json& j) {
    return guarded("state", [&] {
        std::vector<cplx> amps;
        for (const auto& a : j.at("amps")) amps.push_back(decode_complex(a));
        return PureState(std::move(amps), j.at("dims").get<std::vector<int>>());
    });
}

Basis decode_basis(const json& j) {
    return guarded("basis", [&] {
        const auto name = j.value("name", std::string{});
        if (j.contains("matrix")) return Basis(decode_matrix(j.at("matrix")), name);
        return Basis::named(name, j.at("dim").get<int>());
    });
}

PartyLayout decode_layout(const json& j) {
    return guarded("layout", [&] {
        PartyLayout l;
        for (const auto& p : j.at("party")) l.factor_party.push_back(party_from_string(p.get<std::string>()));
        l.factor_slot = j.at("slot").get<std::vector<int>>();
        l.factor_role = j.at("role").get<std::vector<int>>();
        l.validate();
        return l;
    });
}

StateSet decode_state_set(const json& j) {
    return guarded("state set", [&] {
        std::vector<PureState> states;
        for (const auto& s : j.at("states")) states.push_back(decode_state(s));
        return StateSet::make(j.at("name").get<std::string>(), std::move(states), decode_layout(j.at("layout")),
                              j.value("pairwise_orthogonal", true));
    });
}

Assignment decode_assignment(const json& j) {
    return guarded("assignment", [&] {
        Assignment a;
        for (const auto& [k, v] : j.items()) a[std::stoi(k)] = v.get<int>();
        return a;
    });
}

NodePtr decode_protocol(const json& j) {
    return guarded("protocol", [&]() -> NodePtr {
        const auto id = j.at("id").get<std::string>();
        const auto kind = j.at("kind").get<std::string>();
        auto party = [&](const char* key) { return party_from_string(j.at(key).get<std::string>()); };
        if (kind == "measure") {
            std::map<int, NodePtr> kids;
            for (const auto& [k, c] : j.at("children").items()) kids[std::stoi(k)] = decode_protocol(c);
            return measure_node(id, party("party"), j.at("factors").get<std::vector<int>>(), decode_basis(j.at("basis")),
                                std::move(kids));
        }
        if (kind == "unitary")
            return unitary_node(id, party("party"), j.at("factors").get<std::vector<int>>(),
                                UnitaryOp(decode_matrix(j.at("matrix"))), decode_protocol(j.at("child")));
        if (kind == "teleport") {
            const auto res = j.at("resource").get<std::vector<int>>();
            if (res.size() != 2) throw InvalidArgument("teleport resource must list two factors");
            return teleport_node(id, party("sender"), party("receiver"), j.at("source").get<int>(), {res[0], res[1]},
                                 decode_protocol(j.at("child")));
        }
        if (kind == "correlate")
            return correlated_pauli_step(id, decode_ref(j.at("first")), decode_ref(j.at("second")),
                                         pauli_from_string(j.at("pauli").get<std::string>()),
                                         decode_protocol(j.at("correlated")), decode_protocol(j.at("anticorrelated")));
        if (kind == "prepare")
            return prepare_node(id, party("party"), j.at("factors").get<std::vector<int>>(), decode_state(j.at("state")),
                                decode_protocol(j.at("child")));
        if (kind == "conclude") return conclude_node(decode_assignment(j.at("assignment")), id);
        if (kind == "abort") return abort_node(j.at("reason").get<std::string>(), id);
        throw InvalidArgument("unknown protocol node kind '" + kind + "'");
    });
}

GramSearchProblem decode_problem(const json& j) {
    return guarded("search problem", [&] {
        std::vector<UnitaryOp> us;
        for (const auto& m : j.at("unitaries")) us.emplace_back(decode_matrix(m));
        auto p = GramSearchProblem::make(std::move(us));
        if (j.contains("d") && j.at("d").get<int>() != p.d) throw InvalidArgument("search problem 'd' disagrees with unitaries");
        return p;
    });
}

GramSearchResult decode_result(const json& j) {
    return guarded("search result", [&] {
        GramSearchResult r;
        r.verdict = search_verdict_from_string(j.at("verdict").get<std::string>());
        r.best_objective = j.at("best_objective").get<double>();
        r.best_chi = decode_vector(j.at("best_chi"));
        r.restarts = j.at("restarts").get<int>();
        r.restart_minima = j.at("restart_minima").get<std::vector<double>>();
        return r;
    });
}

}  // namespace lsm
