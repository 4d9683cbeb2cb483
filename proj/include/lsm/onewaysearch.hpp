#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lsm/qcore.hpp"

namespace lsm {

using CVector = Eigen::VectorXcd;

/// Unitaries U_1..U_n on C^d. Feasible iff some unit chi makes {U_k chi}
/// orthonormal.
struct GramSearchProblem {
    std::vector<UnitaryOp> unitaries;
    int d = 0;

    /// Checks n >= 2 and a common dimension; d is taken from the operators.
    static GramSearchProblem make(std::vector<UnitaryOp> unitaries);
    int size() const { return static_cast<int>(unitaries.size()); }
};

struct SearchOptions {
    int max_iter = 10000;
    double grad_tol = 1e-12;
    double tau_feas = 1e-10;
    int threads = 1;
};

enum class SearchVerdict { Feasible, NoWitnessFound };
std::string to_string(SearchVerdict v);
SearchVerdict search_verdict_from_string(const std::string& s);

struct GramSearchResult {
    CVector best_chi;
    double best_objective = 0.0;
    int restarts = 0;
    std::vector<double> restart_minima;
    SearchVerdict verdict = SearchVerdict::NoWitnessFound;
};

/// I(x)Z(x)X, I(x)X(x)Z, Z(x)X(x)I, Z(x)I(x)X, X(x)I(x)Z, X(x)Z(x)I.
GramSearchProblem prop4_unitaries();

/// f(chi) = sum_{i<j} |<chi|U_i^dag U_j|chi>|^2. chi must be a unit vector.
double gram_objective(const CVector& chi, const GramSearchProblem& prob);
/// Gradient of f in the real coordinates (Re chi, Im chi), packed as a complex vector.
CVector gram_euclidean_gradient(const CVector& chi, const GramSearchProblem& prob);
/// Euclidean gradient projected onto the tangent space of the unit sphere at chi.
CVector gram_gradient(const CVector& chi, const GramSearchProblem& prob);

/// Local minimization of f from one unit start; returns the final point.
/// `iterations` is an upper bound on descent steps.
CVector descend(CVector chi, const GramSearchProblem& prob, int iterations, double grad_tol);

/// Random-restart projected gradient descent. Restart r draws its start from
/// a generator seeded by (seed, r), so results do not depend on thread count.
GramSearchResult search_witness(const GramSearchProblem& prob, int restarts, std::uint64_t seed,
                                const SearchOptions& opts = {});

}  // namespace lsm
