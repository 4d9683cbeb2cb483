#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsm/ensembles.hpp"
#include "lsm/locc.hpp"

namespace lsm {

/// Entanglement supplied ahead of the instance. Resources occupy the first
/// factors of the composite state, before slot 0.
struct CatalyticBudget {
    std::vector<PureState> resources;
    PartyLayout resource_layout;
    double supplied_ebits = 0.0;  // delta: total cross-party entropy of resources

    /// Bipartite qubit-pair resources, each laid out (Alice, Bob).
    static CatalyticBudget from_pairs(std::vector<PureState> pairs);
    int num_factors() const { return resource_layout.num_factors(); }
};

struct LeafRecord {
    double probability;
    double residual_ebits;
    std::optional<Assignment> verdict;
    std::vector<TranscriptEntry> transcript;
    bool correct;
};

struct AssignmentResult {
    std::vector<int> assignment;
    double success_probability;
    bool mislabeled;  // some positive-probability leaf concluded wrongly
    double average_residual;
    double instance_ebits;  // cross-party entropy of the undisturbed instance
    std::vector<LeafRecord> leaves;
};

struct MarkingVerdict {
    std::vector<AssignmentResult> results;
    bool perfect = false;
};

struct EntanglementLedger {
    double average_residual = 0.0;  // uniform over assignments, weighted by leaf probability
    double min_residual = 0.0;
    double max_residual = 0.0;
    std::optional<double> supplied;  // delta
    std::optional<double> returned;  // epsilon
    double surplus = 0.0;            // average residual beyond epsilon
    double max_instance_ebits = 0.0;
};

struct MarkingReport {
    MarkingVerdict verdict;
    EntanglementLedger ledger;
};

struct VerifyOptions {
    /// Restricts verification to these assignments (default: all ordered ones).
    std::optional<std::vector<std::vector<int>>> assignments;
    int threads = 1;
};

/// Runs `p` on every ordered m-assignment of `s` (plus supplied resources)
/// and checks that each one is identified with certainty.
MarkingReport verify_marking(const ProtocolNode& p, const StateSet& s, int m,
                             const std::optional<CatalyticBudget>& budget = std::nullopt,
                             const VerifyOptions& opts = {});

// --- concrete protocols ---------------------------------------------------------

/// Perfect 4-LSM of X4 without supplied entanglement (both flowcharts).
NodePtr build_x4_protocol();
/// B4 4-LSM with two supplied |phi+>: (2,1) catalytic.
std::pair<NodePtr, CatalyticBudget> catalytic_b4_protocol();
/// B3 3-LSM with one supplied |phi+>: (1,1) catalytic, two-way CC.
std::pair<NodePtr, CatalyticBudget> catalytic_b3_protocol();

/// Local Z measurement by each party; distinguishes product_basis4().
NodePtr product_basis_lsd();
/// Single-party computational measurement for {|0>, |1>}.
NodePtr single_bit_lsd();
/// Only a first-part Z parity test; insufficient for B4 (used as a negative control).
NodePtr naive_z_protocol(const StateSet& s, int m);

/// Two-sided Pauli test on `slot` telling members a and b of a Bell-tensor
/// set apart; branches to if_a / if_b. `factor_offset` counts resource
/// factors preceding slot 0.
NodePtr bell_tensor_pair_step(std::string id, const StateSet& s, int a, int b, int slot, int factor_offset,
                              NodePtr if_a, NodePtr if_b, Party first = Party::Alice);

// --- composers ---------------------------------------------------------------

/// Copy of `p` acting `slot_shift` slots later (factors and conclusions).
NodePtr relocate(const NodePtr& p, int slot_shift, int factors_per_slot);

/// Rebuilds `p` with each Conclude replaced by `leaf(assignment)`.
NodePtr graft(const NodePtr& p, const std::function<NodePtr(const Assignment&)>& leaf);

/// Perfect LSD of s applied slot by slot; the last slot is inferred.
NodePtr lsm_from_lsd(const NodePtr& lsd, const StateSet& s, int K);
/// n consecutive blocks of an m-LSM protocol.
NodePtr compose_m_to_nm(const NodePtr& p_m, const StateSet& s, int m, int n);
/// m-LSM -> (m+1)-LSM for product sets via local re-preparation.
NodePtr product_extend(const NodePtr& p_m, const StateSet& s, int m);
/// (K-2)-LSM front end + Bell-tensor pair discrimination -> K-LSM. `p` is
/// trusted to identify slots 0..K-3.
NodePtr extend_last_two(const NodePtr& p, const StateSet& s, int K, int factor_offset = 0,
                        Party first = Party::Alice);

}  // namespace lsm
