// Thin pybind11 layer. Structured results cross the boundary as JSON text;
// the Python package decodes them.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lsm/cli.hpp"
#include "lsm/errors.hpp"
#include "lsm/marking.hpp"
#include "lsm/onewaysearch.hpp"
#include "lsm/serialize.hpp"

namespace py = pybind11;
using namespace lsm;

namespace {

GramSearchProblem problem_from(const std::vector<Matrix>& us) {
    std::vector<UnitaryOp> ops;
    ops.reserve(us.size());
    for (const auto& u : us) ops.emplace_back(u);
    return GramSearchProblem::make(std::move(ops));
}

MarkingReport verify_named(const std::string& name, int threads) {
    VerifyOptions opts;
    opts.threads = threads;
    if (name == "x4") return verify_marking(*build_x4_protocol(), x4_set(), 4, std::nullopt, opts);
    if (name == "b4-catalytic") {
        auto [p, budget] = catalytic_b4_protocol();
        return verify_marking(*p, bell_basis(), 4, budget, opts);
    }
    if (name == "b3-catalytic") {
        auto [p, budget] = catalytic_b3_protocol();
        return verify_marking(*p, b3_set(), 3, budget, opts);
    }
    throw InvalidArgument("unknown protocol '" + name + "' (expected x4, b4-catalytic, b3-catalytic)");
}

}  // namespace

PYBIND11_MODULE(_lsmark, m) {
    m.attr("__version__") = LSM_VERSION;

    py::register_exception<Error>(m, "LsmError", PyExc_ValueError);

    m.def(
        "verify_json",
        [](const std::string& name, int threads, bool leaves) {
            MarkingReport r;
            {
                py::gil_scoped_release release;
                r = verify_named(name, threads);
            }
            return encode(r, leaves).dump();
        },
        py::arg("name"), py::arg("threads") = 1, py::arg("leaves") = false);

    m.def("prop4_unitaries", [] {
        std::vector<Matrix> out;
        for (const auto& u : prop4_unitaries().unitaries) out.push_back(u.matrix());
        return out;
    });

    m.def(
        "gram_objective",
        [](const CVector& chi, const std::vector<Matrix>& us) { return gram_objective(chi, problem_from(us)); },
        py::arg("chi"), py::arg("unitaries"));
    m.def(
        "gram_gradient",
        [](const CVector& chi, const std::vector<Matrix>& us) { return CVector(gram_gradient(chi, problem_from(us))); },
        py::arg("chi"), py::arg("unitaries"));
    m.def(
        "search_witness_json",
        [](const std::vector<Matrix>& us, int restarts, std::uint64_t seed, int threads) {
            const auto prob = problem_from(us);
            SearchOptions opts;
            opts.threads = threads;
            GramSearchResult r;
            {
                py::gil_scoped_release release;
                r = search_witness(prob, restarts, seed, opts);
            }
            return encode(r).dump();
        },
        py::arg("unitaries"), py::arg("restarts") = 200, py::arg("seed") = 0, py::arg("threads") = 1);

    m.def("unmarkable_by_counting", &unmarkable_by_counting, py::arg("K"), py::arg("d"));
    m.def(
        "rate_compare",
        [](int n, int d, int k) {
            const auto r = rate_compare(n, d, k);
            return std::make_pair(r.lsd_rate, r.lsm_rate);
        },
        py::arg("n"), py::arg("d"), py::arg("k"));
    m.def("b3_two_lsm_fact", [] {
        const auto f = b3_two_lsm_fact();
        py::dict d;
        d["ensemble_size"] = f.ensemble_size;
        d["local_dim"] = f.local_dim;
        d["all_maximally_entangled"] = f.all_maximally_entangled;
        d["bound_applies"] = f.bound_applies;
        return d;
    });

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = lsm::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
