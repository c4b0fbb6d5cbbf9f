#include "mixsamp/propagation.hpp"

#include <mutex>
#include <stdexcept>

namespace mixsamp {

PropagationPlan::PropagationPlan(ComplexMatrix h_static, ComplexMatrix h_drive,
                                 PulseSeries pulse)
    : h_static_(std::move(h_static)), h_drive_(std::move(h_drive)), pulse_(std::move(pulse)) {
    if (!is_hermitian(h_static_) || !is_hermitian(h_drive_))
        throw std::invalid_argument("PropagationPlan: Hamiltonian parts must be Hermitian");
    if (h_static_.rows() != h_drive_.rows())
        throw std::invalid_argument("PropagationPlan: operator dimension mismatch");
    if (pulse_.size() != pulse_.grid.n_steps)
        throw std::invalid_argument("PropagationPlan: pulse length must equal grid length");
    if (pulse_.grid.n_steps < 1 || !(pulse_.grid.dt > 0))
        throw std::invalid_argument("PropagationPlan: invalid time grid");
}

PropagationPlan PropagationPlan::for_chain(const ChainParams& chain, PulseSeries pulse) {
    return PropagationPlan(build_hamiltonian(chain, 0.0).matrix(),
                           drive_operator(chain.n_spins), std::move(pulse));
}

double PropagationPlan::step_field(int n) const {
    const int n_steps = pulse_.grid.n_steps;
    if (n < 0 || n >= n_steps)
        throw std::invalid_argument("PropagationPlan: step index out of range");
    const double left = pulse_.values[static_cast<std::size_t>(n)];
    const double right = (n + 1 < n_steps) ? pulse_.values[static_cast<std::size_t>(n + 1)] : 0.0;
    return 0.5 * (left + right);
}

ComplexMatrix PropagationPlan::step_hamiltonian(int n) const {
    return h_static_ + step_field(n) * h_drive_;
}

ComplexMatrix PropagationPlan::build_step_unitary(int n) const {
    return unitary_exp(step_hamiltonian(n), pulse_.grid.dt);
}

const std::vector<ComplexMatrix>* PropagationPlan::cached_unitaries() const {
    const std::size_t n = static_cast<std::size_t>(dim());
    const std::size_t bytes =
        static_cast<std::size_t>(pulse_.grid.n_steps) * n * n * sizeof(Complex);
    if (bytes > unitary_cache_limit) return nullptr;
    std::call_once(cache_->flag, [&] {
        cache_->unitaries.reserve(static_cast<std::size_t>(pulse_.grid.n_steps));
        for (int step = 0; step < pulse_.grid.n_steps; ++step)
            cache_->unitaries.push_back(build_step_unitary(step));
        cache_->active = true;
    });
    return cache_->active ? &cache_->unitaries : nullptr;
}

namespace {

void require_dim(const PropagationPlan& plan, const StateBatch& states) {
    if (states.rows() != plan.dim())
        throw std::invalid_argument("propagate: state dimension does not match the plan");
}

}  // namespace

StateBatch propagate_forward(const PropagationPlan& plan, StateBatch states,
                             const StepObserver& observer) {
    require_dim(plan, states);
    const auto* cache = plan.cached_unitaries();
    if (observer) observer(0, states);
    for (int n = 0; n < plan.grid().n_steps; ++n) {
        if (cache)
            states = (*cache)[static_cast<std::size_t>(n)] * states;
        else
            states = plan.build_step_unitary(n) * states;
        if (observer) observer(n + 1, states);
    }
    return states;
}

StateBatch propagate_backward(const PropagationPlan& plan, StateBatch states) {
    require_dim(plan, states);
    const auto* cache = plan.cached_unitaries();
    for (int n = plan.grid().n_steps - 1; n >= 0; --n) {
        if (cache)
            states = (*cache)[static_cast<std::size_t>(n)].adjoint() * states;
        else
            states = plan.build_step_unitary(n).adjoint() * states;
    }
    return states;
}

ComplexMatrix accumulate_unitary(const PropagationPlan& plan) {
    return propagate_forward(plan, ComplexMatrix::Identity(plan.dim(), plan.dim()));
}

ComplexVector expectation_values(const ComplexMatrix& a, const StateBatch& states) {
    if (a.rows() != states.rows())
        throw std::invalid_argument("expectation_values: dimension mismatch");
    ComplexMatrix applied = a * states;
    ComplexVector out(states.cols());
    for (Eigen::Index j = 0; j < states.cols(); ++j)
        out(j) = states.col(j).dot(applied.col(j));
    return out;
}

namespace {

double weighted_expectation(const RealVector& weights, const ComplexMatrix& a,
                            const StateBatch& states) {
    ComplexVector vals = expectation_values(a, states);
    Complex total(0.0, 0.0);
    for (Eigen::Index j = 0; j < vals.size(); ++j) total += weights(j) * vals(j);
    if (std::abs(total.imag()) > 1e-10 * std::max(1.0, std::abs(total.real())))
        throw std::runtime_error("exact_expectation: result has a non-real component");
    return total.real();
}

}  // namespace

double exact_expectation(const DensityMatrix& rho, const HermitianObservable& a,
                         const PropagationPlan& plan) {
    if (rho.dim() != plan.dim() || a.dim() != plan.dim())
        throw std::invalid_argument("exact_expectation: dimension mismatch");
    StateBatch evolved = propagate_forward(plan, rho.basis());
    return weighted_expectation(rho.population_values(), a.matrix(), evolved);
}

std::vector<double> exact_expectation_series(const DensityMatrix& rho,
                                             const HermitianObservable& a,
                                             const PropagationPlan& plan) {
    if (rho.dim() != plan.dim() || a.dim() != plan.dim())
        throw std::invalid_argument("exact_expectation_series: dimension mismatch");
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(plan.grid().n_steps) + 1);
    propagate_forward(plan, rho.basis(), [&](int, const StateBatch& states) {
        series.push_back(weighted_expectation(rho.population_values(), a.matrix(), states));
    });
    return series;
}

}  // namespace mixsamp
