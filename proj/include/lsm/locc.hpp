#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lsm/layout.hpp"
#include "lsm/qcore.hpp"

namespace lsm {

struct ProtocolNode;
using NodePtr = std::shared_ptr<const ProtocolNode>;

/// slot -> index of the state concluded for that slot
using Assignment = std::map<int, int>;

struct FactorRef {
    Party party;
    int factor;
    bool operator==(const FactorRef&) const = default;
};

struct LocalMeasure {
    Party party;
    std::vector<int> factors;
    Basis basis;
    std::map<int, NodePtr> children;  // keyed by basis column
};

struct LocalUnitary {
    Party party;
    std::vector<int> factors;
    UnitaryOp u;
    NodePtr child;
};

/// Moves the state of `source` (held by sender) onto `resource_receiver` using
/// the shared pair (resource_sender, resource_receiver). Expanded at run time
/// into a Bell measurement plus a corrected unitary, see teleport_expand().
struct Teleport {
    Party sender;
    Party receiver;
    int source;
    int resource_sender;
    int resource_receiver;
    NodePtr child;
};

/// Both parties measure one qubit each in the same Pauli basis (first, then
/// second); the branch taken depends only on whether the outcomes agree.
struct CorrelatedMeasure {
    FactorRef first;
    FactorRef second;
    Pauli pauli;
    NodePtr correlated;
    NodePtr anticorrelated;
};

/// Replaces `factors` with a fresh local state. Factors still live are reset
/// first (computational-basis measurement, outcome discarded).
struct LocalPrepare {
    Party party;
    std::vector<int> factors;
    PureState state;
    NodePtr child;
};

struct Conclude {
    Assignment assignment;
};

/// Branch that is unreachable for valid inputs (e.g. a composer stage that
/// would repeat an already-identified index). Reaching it is a failure.
struct Abort {
    std::string reason;
};

struct ProtocolNode {
    std::string id;
    std::variant<LocalMeasure, LocalUnitary, Teleport, CorrelatedMeasure, LocalPrepare, Conclude, Abort> body;
};

// --- node builders ----------------------------------------------------------

NodePtr measure_node(std::string id, Party party, std::vector<int> factors, Basis basis,
                     std::map<int, NodePtr> children);
NodePtr unitary_node(std::string id, Party party, std::vector<int> factors, UnitaryOp u, NodePtr child);
NodePtr teleport_node(std::string id, Party sender, Party receiver, int source, std::pair<int, int> resource,
                      NodePtr child);
NodePtr prepare_node(std::string id, Party party, std::vector<int> factors, PureState state, NodePtr child);
NodePtr conclude_node(Assignment assignment, std::string id = "conclude");
NodePtr abort_node(std::string reason, std::string id = "abort");

/// Two-sided Pauli parity test; throws InvalidArgument when both factors sit
/// with the same party.
NodePtr correlated_pauli_step(std::string id, FactorRef first, FactorRef second, Pauli pauli, NodePtr on_correlated,
                              NodePtr on_anticorrelated);

/// Which correlated Pauli test separates two different Bell states, and what
/// each class means. Z splits phi from psi, X splits + from -; pairs that
/// differ in both use Z.
struct BellDiscriminator {
    Pauli pauli;
    BellKind on_correlated;
    BellKind on_anticorrelated;
};
BellDiscriminator bell_pair_discriminator(BellKind a, BellKind b);

/// Correlation class of a Bell state under a two-sided Pauli test.
bool bell_correlated(BellKind k, Pauli p);

/// Bell measurement at the sender followed by per-outcome corrections at the
/// receiver. `resource_twist` is the receiver-side unitary V with
/// resource = (I (x) V)|phi+>; identity for a |phi+> resource.
NodePtr teleport_expand(const Teleport& t, const std::string& id, const UnitaryOp& resource_twist = UnitaryOp::identity(2));

/// Receiver-side V such that `pair` = (I (x) V)|phi+>. Throws ResourceInvalid
/// when the pair is not maximally entangled within kTauNorm fidelity.
UnitaryOp resource_twist(const PureState& pair);

// --- execution --------------------------------------------------------------

enum class ActionKind { Measure, Unitary, Prepare, Classify };

struct TranscriptEntry {
    std::string node_id;
    Party party;
    ActionKind kind;
    int outcome;  // -1 for actions without an outcome; Classify: 0 = C, 1 = AC
    bool operator==(const TranscriptEntry&) const = default;
};

struct BranchOutcome {
    double probability;
    std::vector<TranscriptEntry> transcript;
    PureState final_state;
    std::vector<int> live_factors;      // original factor index of each final_state factor
    std::optional<Assignment> verdict;  // empty when the branch aborted
};

struct BranchTree {
    std::vector<int> input_dims;
    PartyLayout layout;
    std::vector<BranchOutcome> leaves;

    double total_probability() const;
};

/// Static pass: every node only touches factors of its own party.
void validate_locality(const ProtocolNode& root, const PartyLayout& layout);

/// Exhaustive enumeration of every branch of `root` on `input`.
BranchTree execute(const ProtocolNode& root, const PureState& input, const PartyLayout& layout);

/// Ordered (from, to) party pairs for which the transcript carries classical
/// communication: an action by `to` directly following an action by `from`.
std::set<std::pair<Party, Party>> cc_directions(const std::vector<TranscriptEntry>& transcript);

/// True if on every path all actions of `first` precede all actions of any
/// other party (one-way classical communication from `first`).
bool respects_one_way(const ProtocolNode& root, Party first);

/// Number of nodes reachable from root, counting shared subtrees once per use.
std::size_t node_count(const ProtocolNode& root);

}  // namespace lsm
