#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsm/qcore.hpp"

namespace lsm {

enum class Party { Alice, Bob, Charlie };

std::string to_string(Party p);
Party party_from_string(const std::string& s);

// Slot value for factors that belong to supplied resources rather than to a
// state of the marking instance.
inline constexpr int kResourceSlot = -1;

/// Which party holds each factor, which slot (distributed state) it belongs
/// to, and which part of that state it is (0 = first part, 1 = second, ...).
///
/// Factor order convention: slot-major, and within a slot the parties are
/// interleaved part by part (A1 B1 A2 B2 ...).
struct PartyLayout {
    std::vector<Party> factor_party;
    std::vector<int> factor_slot;
    std::vector<int> factor_role;

    int num_factors() const { return static_cast<int>(factor_party.size()); }
    void validate() const;

    /// Standard bipartite layout of one state made of `parts` qubit pairs.
    static PartyLayout bipartite_pairs(int parts, int slot = 0);
    /// All factors on a single party.
    static PartyLayout single_party(int factors, Party p = Party::Alice, int slot = 0);

    /// Copy of this layout with every slot index replaced by `slot`.
    PartyLayout with_slot(int slot) const;
    /// Concatenation (factor order preserved).
    static PartyLayout concat(const std::vector<PartyLayout>& parts);

    std::vector<int> factors_of(Party p) const;
    std::vector<int> factors_in_slot(int slot) const;
    /// The factor of `slot` held by `p` with the given role, if any.
    std::optional<int> find(int slot, int role, Party p) const;
    bool operator==(const PartyLayout&) const = default;
};

/// Cut separating `party` from everyone else, restricted to `live` factors
/// (given in the order they appear in the state). Returns nothing when one
/// side would be empty.
std::optional<Bipartition> party_cut(const PartyLayout& layout, const std::vector<int>& live, Party party);

/// Entanglement across Alice | everyone-else of a state whose factor i is
/// the original layout factor live[i]. Zero when the cut is trivial.
double cross_party_entropy(const PureState& s, const PartyLayout& layout, const std::vector<int>& live);

}  // namespace lsm
