#include "lsm/layout.hpp"

#include <numeric>

#include "lsm/errors.hpp"

namespace lsm {

std::string to_string(Party p) {
    switch (p) {
        case Party::Alice: return "A";
        case Party::Bob: return "B";
        case Party::Charlie: return "C";
    }
    return "?";
}

Party party_from_string(const std::string& s) {
    if (s == "A" || s == "Alice") return Party::Alice;
    if (s == "B" || s == "Bob") return Party::Bob;
    if (s == "C" || s == "Charlie") return Party::Charlie;
    throw InvalidArgument("unknown party '" + s + "'");
}

void PartyLayout::validate() const {
    if (factor_slot.size() != factor_party.size() || factor_role.size() != factor_party.size())
        throw InvalidArgument("layout vectors have different lengths");
}

PartyLayout PartyLayout::bipartite_pairs(int parts, int slot) {
    PartyLayout l;
    for (int r = 0; r < parts; ++r) {
        for (Party p : {Party::Alice, Party::Bob}) {
            l.factor_party.push_back(p);
            l.factor_slot.push_back(slot);
            l.factor_role.push_back(r);
        }
    }
    return l;
}

PartyLayout PartyLayout::single_party(int factors, Party p, int slot) {
    PartyLayout l;
    for (int f = 0; f < factors; ++f) {
        l.factor_party.push_back(p);
        l.factor_slot.push_back(slot);
        l.factor_role.push_back(f);
    }
    return l;
}

PartyLayout PartyLayout::with_slot(int slot) const {
    PartyLayout l = *this;
    std::fill(l.factor_slot.begin(), l.factor_slot.end(), slot);
    return l;
}

PartyLayout PartyLayout::concat(const std::vector<PartyLayout>& parts) {
    PartyLayout out;
    for (const auto& p : parts) {
        p.validate();
        out.factor_party.insert(out.factor_party.end(), p.factor_party.begin(), p.factor_party.end());
        out.factor_slot.insert(out.factor_slot.end(), p.factor_slot.begin(), p.factor_slot.end());
        out.factor_role.insert(out.factor_role.end(), p.factor_role.begin(), p.factor_role.end());
    }
    return out;
}

std::vector<int> PartyLayout::factors_of(Party p) const {
    std::vector<int> out;
    for (int f = 0; f < num_factors(); ++f)
        if (factor_party[f] == p) out.push_back(f);
    return out;
}

std::vector<int> PartyLayout::factors_in_slot(int slot) const {
    std::vector<int> out;
    for (int f = 0; f < num_factors(); ++f)
        if (factor_slot[f] == slot) out.push_back(f);
    return out;
}

std::optional<int> PartyLayout::find(int slot, int role, Party p) const {
    for (int f = 0; f < num_factors(); ++f)
        if (factor_slot[f] == slot && factor_role[f] == role && factor_party[f] == p) return f;
    return std::nullopt;
}

std::optional<Bipartition> party_cut(const PartyLayout& layout, const std::vector<int>& live, Party party) {
    std::vector<int> left;
    for (int i = 0; i < static_cast<int>(live.size()); ++i)
        if (layout.factor_party.at(live[i]) == party) left.push_back(i);
    if (left.empty() || left.size() == live.size()) return std::nullopt;
    return Bipartition(std::move(left), static_cast<int>(live.size()));
}

double cross_party_entropy(const PureState& s, const PartyLayout& layout, const std::vector<int>& live) {
    if (static_cast<int>(live.size()) != s.num_factors()) throw InvalidArgument("live factor list does not match state");
    const auto cut = party_cut(layout, live, Party::Alice);
    return cut ? entanglement_entropy(s, *cut) : 0.0;
}

}  // namespace lsm
