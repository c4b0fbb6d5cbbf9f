#include "mixsamp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mixsamp {

EstimatorKind EstimatorKind::parse(const std::string& id) {
    EstimatorKind kind;
    if (id == "eigen")
        kind = {EstimatorFamily::Eigenstate, {false, false}};
    else if (id == "eigen+ts")
        kind = {EstimatorFamily::Eigenstate, {true, false}};
    else if (id == "eigen+ts+bg")
        kind = {EstimatorFamily::Eigenstate, {true, true}};
    else if (id == "rp")
        kind = {EstimatorFamily::RandomPhase, {false, false}};
    else if (id == "rp+ts")
        kind = {EstimatorFamily::RandomPhase, {true, false}};
    else if (id == "rp+ts+bg")
        kind = {EstimatorFamily::RandomPhase, {true, true}};
    else if (id == "obs")
        kind = {EstimatorFamily::Observable, {false, false}};
    else
        throw std::invalid_argument("unknown estimator id: " + id);
    return kind;
}

std::string EstimatorKind::id() const {
    validate();
    std::string base;
    switch (family) {
        case EstimatorFamily::Eigenstate: base = "eigen"; break;
        case EstimatorFamily::RandomPhase: base = "rp"; break;
        case EstimatorFamily::Observable: return "obs";
    }
    if (flags.trace_shift) base += "+ts";
    if (flags.background_removal) base += "+bg";
    return base;
}

void EstimatorKind::validate() const {
    if (flags.background_removal && !flags.trace_shift)
        throw std::invalid_argument(
            "EstimatorKind: background removal requires the trace shift");
    if (family == EstimatorFamily::Observable &&
        (flags.trace_shift || flags.background_removal))
        throw std::invalid_argument("EstimatorKind: observable sampling takes no flags");
}

namespace detail {

std::vector<int> top_k_by_modulus(const RealVector& values, int k) {
    std::vector<int> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(values(a)) > std::abs(values(b));
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

StateBatch random_phase_states_raw(const ComplexMatrix& basis, const RealVector& weights,
                                   int k, Rng& rng) {
    const Eigen::Index n = basis.rows();
    if (weights.size() != basis.cols())
        throw std::invalid_argument("random_phase_states: weight/basis size mismatch");
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    RealVector amplitudes = weights.array().max(0.0).sqrt() * inv_sqrt_n;
    StateBatch states = StateBatch::Zero(n, k);
    for (int realization = 0; realization < k; ++realization)
        for (Eigen::Index j = 0; j < basis.cols(); ++j)
            states.col(realization) +=
                (amplitudes(j) * std::polar(1.0, rng.angle())) * basis.col(j);
    return states;
}

}  // namespace detail

ComplexMatrix optimal_rank_k_approx(const ComplexMatrix& rho, int k) {
    HermitianEigensystem es = eigh(rho);
    const int n = es.dim();
    if (k < 1 || k > n) throw std::invalid_argument("optimal_rank_k_approx: k out of range");
    ComplexMatrix approx = ComplexMatrix::Zero(n, n);
    for (int idx : detail::top_k_by_modulus(es.eigenvalues, k)) {
        const auto v = es.eigenvectors.col(idx);
        approx.noalias() += es.eigenvalues(idx) * (v * v.adjoint());
    }
    return approx;
}

namespace {

double tail_norm(std::vector<double> moduli, int k) {
    std::stable_sort(moduli.begin(), moduli.end(), std::greater<double>());
    double sum = 0.0;
    for (std::size_t i = moduli.size(); i > static_cast<std::size_t>(k); --i)
        sum += moduli[i - 1] * moduli[i - 1];
    return std::sqrt(sum);
}

}  // namespace

ErrorBoundReport worst_case_bound(const PopulationVector& p, int k, bool reduced) {
    if (k < 0 || k > p.size()) throw std::invalid_argument("worst_case_bound: k out of range");
    std::vector<double> q = p.values();
    if (reduced) {
        const double p_min = q.back();  // descending order
        for (double& v : q) v -= p_min;
    }
    return {tail_norm(std::move(q), k), k, reduced, ErrorBoundReport::Side::Ensemble};
}

ErrorBoundReport observable_bound(const std::vector<double>& a_eigenvalues, int k) {
    if (k < 0 || k > static_cast<int>(a_eigenvalues.size()))
        throw std::invalid_argument("observable_bound: k out of range");
    std::vector<double> moduli(a_eigenvalues.size());
    std::transform(a_eigenvalues.begin(), a_eigenvalues.end(), moduli.begin(),
                   [](double a) { return std::abs(a); });
    return {tail_norm(std::move(moduli), k), k, false, ErrorBoundReport::Side::Observable};
}

SamplingEstimate eigenstate_estimate(const DensityMatrix& rho, const HermitianObservable& a,
                                     const PropagationPlan& plan, int k,
                                     EnhancementFlags flags) {
    EstimatorKind kind{EstimatorFamily::Eigenstate, flags};
    kind.validate();
    const int n = rho.dim();
    if (k < 1 || k > n) throw std::invalid_argument("eigenstate_estimate: k out of range");
    if (a.dim() != n) throw std::invalid_argument("eigenstate_estimate: dimension mismatch");

    // Populations are stored descending, so the k most populated eigenstates
    // are the first k columns; the reduced populations share that ordering.
    const RealVector& p = rho.population_values();
    StateBatch evolved = propagate_forward(plan, rho.basis().leftCols(k));
    ComplexVector vals = expectation_values(a.matrix(), evolved);

    const double lambda0 = flags.trace_shift ? a.trace() / n : 0.0;
    const double p_min = flags.background_removal ? p(n - 1) : 0.0;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        const double weight = p(i) - p_min;
        // <psi|a0|psi> = <psi|a|psi> - lambda0 for normalised eigenstates.
        total += weight * (vals(i).real() - lambda0);
    }
    return {total + lambda0, k, kind, std::nullopt};
}

StateBatch random_phase_states(const DensityMatrix& rho, int k, bool reduced, Rng& rng,
                               const std::optional<ComplexMatrix>& basis) {
    if (k < 1) throw std::invalid_argument("random_phase_states: k must be >= 1");
    RealVector weights = rho.population_values();
    if (reduced) weights.array() -= weights(weights.size() - 1);
    if (!basis) return detail::random_phase_states_raw(rho.basis(), weights, k, rng);

    if (basis->rows() != rho.dim() || basis->cols() != rho.dim())
        throw std::invalid_argument("random_phase_states: basis dimension mismatch");
    // General-basis construction: the weights enter through sqrt(rho),
    // |Phi> = sqrt(rho) (1/sqrt(N)) sum_j e^{i theta_j} |basis_j>.
    ComplexMatrix sqrt_rho = rho.basis() *
                             weights.array().sqrt().matrix().cast<Complex>().asDiagonal() *
                             rho.basis().adjoint();
    return detail::random_phase_states_raw(sqrt_rho * (*basis),
                                           RealVector::Ones(rho.dim()), k, rng);
}

SamplingEstimate random_phase_estimate(const DensityMatrix& rho, const HermitianObservable& a,
                                       const PropagationPlan& plan, int k,
                                       EnhancementFlags flags, Rng& rng,
                                       std::optional<std::uint64_t> seed_label) {
    EstimatorKind kind{EstimatorFamily::RandomPhase, flags};
    kind.validate();
    if (a.dim() != rho.dim() || rho.dim() != plan.dim())
        throw std::invalid_argument("random_phase_estimate: dimension mismatch");

    StateBatch states = random_phase_states(rho, k, flags.background_removal, rng);
    StateBatch evolved = propagate_forward(plan, std::move(states));
    ComplexVector vals = expectation_values(a.matrix(), evolved);

    const double lambda0 = flags.trace_shift ? a.trace() / rho.dim() : 0.0;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double value = vals(i).real();
        // Sample the traceless part: subtract lambda0 times the squared norm
        // of the (unnormalised) realization.
        if (flags.trace_shift) value -= lambda0 * evolved.col(i).squaredNorm();
        total += value;
    }
    const double estimate = total * static_cast<double>(rho.dim()) / k + lambda0;
    return {estimate, k, kind, seed_label};
}

SamplingEstimate observable_estimate(const HermitianObservable& a, const DensityMatrix& rho,
                                     const PropagationPlan& plan, int k) {
    const int n = a.dim();
    if (k < 1 || k > n) throw std::invalid_argument("observable_estimate: k out of range");
    if (rho.dim() != n || plan.dim() != n)
        throw std::invalid_argument("observable_estimate: dimension mismatch");

    HermitianEigensystem es = a.eigensystem();
    std::vector<int> picks = detail::top_k_by_modulus(es.eigenvalues, k);
    StateBatch selected(n, k);
    for (int i = 0; i < k; ++i) selected.col(i) = es.eigenvectors.col(picks[static_cast<std::size_t>(i)]);

    StateBatch back = propagate_backward(plan, std::move(selected));
    ComplexVector overlaps = expectation_values(rho.matrix(), back);
    double total = 0.0;
    for (int i = 0; i < k; ++i)
        total += es.eigenvalues(picks[static_cast<std::size_t>(i)]) * overlaps(i).real();
    return {total, k, {EstimatorFamily::Observable, {}}, std::nullopt};
}

double abs_error(double exact, const SamplingEstimate& estimate) {
    return std::abs(exact - estimate.value);
}

double heisenberg_diagonal_fraction(const HermitianObservable& a, const PropagationPlan& plan,
                                    const HermitianEigensystem& basis) {
    if (a.dim() != plan.dim() || basis.dim() != a.dim())
        throw std::invalid_argument("heisenberg_diagonal_fraction: dimension mismatch");
    const double norm_sq = a.matrix().squaredNorm();
    if (norm_sq == 0.0) return 0.0;

    ComplexMatrix u = accumulate_unitary(plan);
    ComplexMatrix heisenberg = u.adjoint() * a.matrix() * u;
    ComplexVector diag = expectation_values(heisenberg, basis.eigenvectors);
    return diag.squaredNorm() / norm_sq;
}

}  // namespace mixsamp
