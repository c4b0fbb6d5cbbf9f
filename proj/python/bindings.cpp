// Python bindings for the core operations of the toolkit.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixsamp/experiments.hpp"

namespace py = pybind11;
using namespace mixsamp;

namespace {

PauliAxis axis_from_string(const std::string& axis) {
    if (axis == "x") return PauliAxis::X;
    if (axis == "y") return PauliAxis::Y;
    if (axis == "z") return PauliAxis::Z;
    throw std::invalid_argument("axis must be 'x', 'y' or 'z'");
}

EnhancementFlags flags_from_kind(const std::string& id) {
    return EstimatorKind::parse(id).flags;
}

PulseSeries pulse_from_values(const std::vector<double>& values, double dt) {
    return {values, {static_cast<int>(values.size()), dt}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sampling estimators for time-dependent mixed-state expectation values";
    m.attr("__version__") = "0.1.0";

    py::class_<HermitianEigensystem>(m, "HermitianEigensystem")
        .def_readonly("eigenvalues", &HermitianEigensystem::eigenvalues)
        .def_readonly("eigenvectors", &HermitianEigensystem::eigenvectors);

    m.def("hs_inner", &hs_inner, py::arg("a"), py::arg("b"),
          "Hilbert-Schmidt inner product tr(a^H b)");
    m.def("hs_norm", &hs_norm, py::arg("a"));
    m.def("eigh", &eigh, py::arg("a"), "Hermitian eigendecomposition, eigenvalues ascending");
    m.def("unitary_exp", &unitary_exp, py::arg("h"), py::arg("dt"), "exp(-i h dt)");

    m.def(
        "pauli_site",
        [](const std::string& axis, int site, int n_spins) {
            return pauli_site(axis_from_string(axis), site, n_spins);
        },
        py::arg("axis"), py::arg("site"), py::arg("n_spins"));
    m.def(
        "build_hamiltonian",
        [](int n_spins, double coupling_j, double field_hz, double field) {
            return build_hamiltonian({n_spins, coupling_j, field_hz}, field).matrix();
        },
        py::arg("n_spins"), py::arg("coupling_j"), py::arg("field_hz"), py::arg("field") = 0.0);
    m.def(
        "total_polarization",
        [](int n_spins) { return total_polarization(n_spins).matrix(); }, py::arg("n_spins"));
    m.def(
        "random_observable",
        [](int n_spins, std::uint64_t seed, bool traceless, double target_hs_norm) {
            return random_observable({n_spins, seed, traceless, target_hs_norm}).matrix();
        },
        py::arg("n_spins"), py::arg("seed"), py::arg("traceless") = true,
        py::arg("target_hs_norm") = 0.0);
    m.def(
        "sample_pulse",
        [](double e_max, double tau, int n_steps, double bandwidth_fraction,
           std::uint64_t seed) {
            PulseSpec spec = PulseSpec::standard(tau, n_steps);
            spec.e_max = e_max;
            spec.bandwidth_fraction = bandwidth_fraction;
            spec.seed = seed;
            PulseSeries series = sample_pulse(spec);
            return py::make_tuple(series.values, series.grid.dt);
        },
        py::arg("e_max"), py::arg("tau"), py::arg("n_steps"),
        py::arg("bandwidth_fraction") = 0.05, py::arg("seed") = 0,
        "Returns (field samples, dt)");

    m.def(
        "thermal_state",
        [](const ComplexMatrix& h0, double beta) {
            return thermal_state(HermitianObservable(h0), beta).matrix();
        },
        py::arg("h0"), py::arg("beta"));
    m.def(
        "purity", [](const ComplexMatrix& rho) { return purity(DensityMatrix::from_matrix(rho)); },
        py::arg("rho"));
    m.def(
        "beta_for_purity",
        [](const ComplexMatrix& h0, double target) {
            return beta_for_purity(HermitianObservable(h0), target);
        },
        py::arg("h0"), py::arg("target"));
    m.def(
        "split_background",
        [](const ComplexMatrix& rho) {
            auto [reduced, p_min] = split_background(DensityMatrix::from_matrix(rho));
            return py::make_tuple(reduced.matrix(), p_min);
        },
        py::arg("rho"), "Returns (reduced state, p_min)");
    m.def(
        "split_traceless",
        [](const ComplexMatrix& a) {
            auto [a0, lambda0] = split_traceless(HermitianObservable(a));
            return py::make_tuple(a0.matrix(), lambda0);
        },
        py::arg("a"), "Returns (traceless part, tr(a)/N)");
    m.def(
        "population_residuum",
        [](const std::vector<double>& populations, int k) {
            return population_residuum(PopulationVector(populations, /*reduced=*/true), k);
        },
        py::arg("populations"), py::arg("k"));

    m.def(
        "propagate_forward",
        [](const ComplexMatrix& h_static, const ComplexMatrix& h_drive,
           const std::vector<double>& pulse, double dt, const StateBatch& states) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return propagate_forward(plan, states);
        },
        py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"), py::arg("dt"),
        py::arg("states"));
    m.def(
        "propagate_backward",
        [](const ComplexMatrix& h_static, const ComplexMatrix& h_drive,
           const std::vector<double>& pulse, double dt, const StateBatch& states) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return propagate_backward(plan, states);
        },
        py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"), py::arg("dt"),
        py::arg("states"));
    m.def(
        "exact_expectation",
        [](const ComplexMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& h_static,
           const ComplexMatrix& h_drive, const std::vector<double>& pulse, double dt) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return exact_expectation(DensityMatrix::from_matrix(rho), HermitianObservable(a),
                                     plan);
        },
        py::arg("rho"), py::arg("a"), py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"),
        py::arg("dt"));

    m.def("optimal_rank_k_approx", &optimal_rank_k_approx, py::arg("rho"), py::arg("k"));
    m.def(
        "worst_case_bound",
        [](const std::vector<double>& populations, int k, bool reduced) {
            return worst_case_bound(PopulationVector(populations, /*reduced=*/true), k, reduced)
                .bound;
        },
        py::arg("populations"), py::arg("k"), py::arg("reduced") = false);
    m.def(
        "observable_bound",
        [](const std::vector<double>& eigenvalues, int k) {
            return observable_bound(eigenvalues, k).bound;
        },
        py::arg("eigenvalues"), py::arg("k"));

    m.def(
        "eigenstate_estimate",
        [](const ComplexMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& h_static,
           const ComplexMatrix& h_drive, const std::vector<double>& pulse, double dt, int k,
           const std::string& kind) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return eigenstate_estimate(DensityMatrix::from_matrix(rho), HermitianObservable(a),
                                       plan, k, flags_from_kind(kind))
                .value;
        },
        py::arg("rho"), py::arg("a"), py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"),
        py::arg("dt"), py::arg("k"), py::arg("kind") = "eigen");
    m.def(
        "random_phase_estimate",
        [](const ComplexMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& h_static,
           const ComplexMatrix& h_drive, const std::vector<double>& pulse, double dt, int k,
           const std::string& kind, std::uint64_t seed) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            Rng rng(seed);
            return random_phase_estimate(DensityMatrix::from_matrix(rho),
                                         HermitianObservable(a), plan, k, flags_from_kind(kind),
                                         rng, seed)
                .value;
        },
        py::arg("rho"), py::arg("a"), py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"),
        py::arg("dt"), py::arg("k"), py::arg("kind") = "rp", py::arg("seed") = 0);
    m.def(
        "observable_estimate",
        [](const ComplexMatrix& a, const ComplexMatrix& rho, const ComplexMatrix& h_static,
           const ComplexMatrix& h_drive, const std::vector<double>& pulse, double dt, int k) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return observable_estimate(HermitianObservable(a), DensityMatrix::from_matrix(rho),
                                       plan, k)
                .value;
        },
        py::arg("a"), py::arg("rho"), py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"),
        py::arg("dt"), py::arg("k"));
    m.def(
        "heisenberg_diagonal_fraction",
        [](const ComplexMatrix& a, const ComplexMatrix& h_static, const ComplexMatrix& h_drive,
           const std::vector<double>& pulse, double dt, const ComplexMatrix& basis_of) {
            PropagationPlan plan(h_static, h_drive, pulse_from_values(pulse, dt));
            return heisenberg_diagonal_fraction(HermitianObservable(a), plan, eigh(basis_of));
        },
        py::arg("a"), py::arg("h_static"), py::arg("h_drive"), py::arg("pulse"), py::arg("dt"),
        py::arg("basis_of"),
        "Diagonal weight of U^H a U in the eigenbasis of the given Hermitian matrix");
}
