#pragma once

#include <string>

#include "json.hpp"
#include "lsm/ensembles.hpp"
#include "lsm/locc.hpp"
#include "lsm/marking.hpp"
#include "lsm/onewaysearch.hpp"

namespace lsm {

using json = nlohmann::json;

// Complex numbers are [re, im]; vectors are lists of those; matrices are
// lists of rows. Decoders throw InvalidArgument on malformed input.

json encode(cplx z);
json encode_vector(const CVector& v);
json encode_matrix(const Matrix& m);
json encode(const PureState& s);
json encode(const Basis& b);
json encode(const PartyLayout& l);
json encode(const StateSet& s);
json encode(const Assignment& a);
json encode(const TranscriptEntry& e);
/// Protocol DAGs are written as trees; shared subtrees are repeated.
json encode(const ProtocolNode& n);
json encode(const EntanglementLedger& l);
json encode(const MarkingReport& r, bool include_leaves = true);
json encode(const GramSearchProblem& p);
json encode(const GramSearchResult& r);

cplx decode_complex(const json& j);
CVector decode_vector(const json& j);
Matrix decode_matrix(const json& j);
PureState decode_state(const json& j);
Basis decode_basis(const json& j);
PartyLayout decode_layout(const json& j);
StateSet decode_state_set(const json& j);
Assignment decode_assignment(const json& j);
NodePtr decode_protocol(const json& j);
GramSearchProblem decode_problem(const json& j);
GramSearchResult decode_result(const json& j);

}  // namespace lsm
