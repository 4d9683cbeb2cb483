#include "lsm/onewaysearch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "lsm/errors.hpp"

namespace lsm {

GramSearchProblem GramSearchProblem::make(std::vector<UnitaryOp> unitaries) {
    if (unitaries.size() < 2) throw InvalidArgument("search problem needs at least two unitaries");
    const int d = unitaries.front().dim();
    for (const auto& u : unitaries)
        if (u.dim() != d) throw InvalidArgument("search problem unitaries differ in dimension");
    return GramSearchProblem{std::move(unitaries), d};
}

std::string to_string(SearchVerdict v) { return v == SearchVerdict::Feasible ? "Feasible" : "NoWitnessFound"; }

SearchVerdict search_verdict_from_string(const std::string& s) {
    if (s == "Feasible") return SearchVerdict::Feasible;
    if (s == "NoWitnessFound") return SearchVerdict::NoWitnessFound;
    throw InvalidArgument("unknown search verdict '" + s + "'");
}

GramSearchProblem prop4_unitaries() {
    const char* words[] = {"IZX", "IXZ", "ZXI", "ZIX", "XIZ", "XZI"};
    std::vector<UnitaryOp> us;
    for (const char* w : words) us.emplace_back(kron(kron(pauli_matrix(w[0]), pauli_matrix(w[1])), pauli_matrix(w[2])));
    return GramSearchProblem::make(std::move(us));
}

namespace {

void check_input(const CVector& chi, const GramSearchProblem& prob) {
    if (chi.size() != prob.d) throw InvalidArgument("chi has the wrong dimension");
    if (std::abs(chi.norm() - 1.0) > kTauNorm) throw InvalidArgument("chi is not a unit vector");
}

std::vector<CVector> images(const CVector& chi, const GramSearchProblem& prob) {
    std::vector<CVector> w;
    w.reserve(prob.unitaries.size());
    for (const auto& u : prob.unitaries) w.push_back(u.matrix() * chi);
    return w;
}

double objective_unchecked(const CVector& chi, const GramSearchProblem& prob) {
    const auto w = images(chi, prob);
    double f = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) f += std::norm(w[i].dot(w[j]));
    return f;
}

CVector euclidean_unchecked(const CVector& chi, const GramSearchProblem& prob) {
    const auto w = images(chi, prob);
    const int n = prob.size();
    // acc_k collects the vectors later hit by U_k^dag.
    std::vector<CVector> acc(n, CVector::Zero(prob.d));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const cplx g = w[i].dot(w[j]);  // <w_i|w_j>
            acc[i] += std::conj(g) * w[j];
            acc[j] += g * w[i];
        }
    CVector grad = CVector::Zero(prob.d);
    for (int k = 0; k < n; ++k) grad += prob.unitaries[k].matrix().adjoint() * acc[k];
    return 2.0 * grad;
}

CVector project(const CVector& chi, const CVector& g) { return g - chi.dot(g).real() * chi; }

}  // namespace

double gram_objective(const CVector& chi, const GramSearchProblem& prob) {
    check_input(chi, prob);
    return objective_unchecked(chi, prob);
}

CVector gram_euclidean_gradient(const CVector& chi, const GramSearchProblem& prob) {
    check_input(chi, prob);
    return euclidean_unchecked(chi, prob);
}

CVector gram_gradient(const CVector& chi, const GramSearchProblem& prob) {
    check_input(chi, prob);
    return project(chi, euclidean_unchecked(chi, prob));
}

CVector descend(CVector chi, const GramSearchProblem& prob, int iterations, double grad_tol) {
    check_input(chi, prob);
    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-18;
    double f = objective_unchecked(chi, prob);
    double step = 0.1;
    for (int it = 0; it < iterations; ++it) {
        const CVector g = project(chi, euclidean_unchecked(chi, prob));
        const double gn2 = g.squaredNorm();
        if (std::sqrt(gn2) <= grad_tol) break;
        bool accepted = false;
        while (step >= kMinStep) {
            CVector trial = chi - step * g;
            trial.normalize();
            const double ft = objective_unchecked(trial, prob);
            if (ft <= f - kArmijo * step * gn2) {
                chi = std::move(trial);
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        step *= 2.0;
    }
    return chi;
}

GramSearchResult search_witness(const GramSearchProblem& prob, int restarts, std::uint64_t seed,
                                const SearchOptions& opts) {
    if (restarts < 1) throw InvalidArgument("search_witness needs at least one restart");
    if (prob.size() < 2) throw InvalidArgument("search problem needs at least two unitaries");

    std::vector<CVector> finals(restarts);
    std::vector<double> minima(restarts);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < restarts; r = next++) {
            std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                             static_cast<std::uint32_t>(r)};
            std::mt19937_64 rng(sq);
            std::normal_distribution<double> gauss;
            CVector chi(prob.d);
            for (int i = 0; i < prob.d; ++i) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                chi[i] = cplx(re, im);
            }
            chi.normalize();
            finals[r] = descend(std::move(chi), prob, opts.max_iter, opts.grad_tol);
            minima[r] = objective_unchecked(finals[r], prob);
        }
    };
    const int nthreads = std::clamp(opts.threads, 1, restarts);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    }

    const auto best = static_cast<std::size_t>(std::min_element(minima.begin(), minima.end()) - minima.begin());
    GramSearchResult res;
    const auto amps = canonical_phase(std::vector<cplx>(finals[best].data(), finals[best].data() + prob.d));
    res.best_chi = Eigen::Map<const CVector>(amps.data(), prob.d);
    res.best_objective = minima[best];
    res.restarts = restarts;
    res.restart_minima = std::move(minima);
    res.verdict = res.best_objective <= opts.tau_feas ? SearchVerdict::Feasible : SearchVerdict::NoWitnessFound;
    return res;
}

}  // namespace lsm
