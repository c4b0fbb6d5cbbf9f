#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "mixsamp/ensembles.hpp"
#include "mixsamp/spin_chain.hpp"
#include "mixsamp/types.hpp"

namespace mixsamp {

/// Time evolution plan for H(t) = h_static + field(t) * h_drive on a uniform
/// grid. Each step n applies unitary_exp(H(f_n), dt) where f_n is the
/// midpoint field, the average of the samples at t_n and t_{n+1} (the sample
/// one past the end of the grid is zero, matching the truncated envelope).
///
/// Step unitaries are deterministic, so they are cached on first use when
/// they fit into `unitary_cache_limit` bytes; beyond that they are rebuilt
/// on the fly each pass (the O(N_T * N^3) cost envelope at n = 10 spins).
class PropagationPlan {
  public:
    PropagationPlan(ComplexMatrix h_static, ComplexMatrix h_drive, PulseSeries pulse);

    static PropagationPlan for_chain(const ChainParams& chain, PulseSeries pulse);

    int dim() const { return static_cast<int>(h_static_.rows()); }
    const TimeGrid& grid() const { return pulse_.grid; }
    const PulseSeries& pulse() const { return pulse_; }
    const ComplexMatrix& static_hamiltonian() const { return h_static_; }
    const ComplexMatrix& drive() const { return h_drive_; }

    double step_field(int n) const;
    ComplexMatrix step_hamiltonian(int n) const;
    ComplexMatrix build_step_unitary(int n) const;

    /// Cached unitaries for all steps, or nullptr when they exceed the
    /// cache limit. Thread-safe; built at most once per plan.
    const std::vector<ComplexMatrix>* cached_unitaries() const;

    std::size_t unitary_cache_limit = std::size_t(1) << 30;

  private:
    ComplexMatrix h_static_;
    ComplexMatrix h_drive_;
    PulseSeries pulse_;

    struct Cache {
        std::once_flag flag;
        std::vector<ComplexMatrix> unitaries;
        bool active = false;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Called after every step with the number of steps applied so far (the
/// initial call has 0 steps) and the current batch.
using StepObserver = std::function<void(int steps_done, const StateBatch& states)>;

/// Evolves the columns of `states` through all steps of the plan. The step
/// unitary is built once per step and applied to the whole batch.
StateBatch propagate_forward(const PropagationPlan& plan, StateBatch states,
                             const StepObserver& observer = {});

/// Applies the adjoint step unitaries in reverse order, realizing
/// U^dagger(T); composing with propagate_forward gives the identity.
StateBatch propagate_backward(const PropagationPlan& plan, StateBatch states);

/// Full forward propagator U(T) as the ordered product of the step
/// unitaries.
ComplexMatrix accumulate_unitary(const PropagationPlan& plan);

/// Per-column expectation values <psi_j|a|psi_j>.
ComplexVector expectation_values(const ComplexMatrix& a, const StateBatch& states);

/// Exact final-time expectation value: propagates the complete eigenbasis
/// of rho and sums p_n <E_n(T)|a|E_n(T)>. This is the oracle against which
/// all sampling estimators are measured.
double exact_expectation(const DensityMatrix& rho, const HermitianObservable& a,
                         const PropagationPlan& plan);

/// Expectation value at every grid step, including t = 0; the last entry is
/// the final-time value returned by exact_expectation.
std::vector<double> exact_expectation_series(const DensityMatrix& rho,
                                             const HermitianObservable& a,
                                             const PropagationPlan& plan);

}  // namespace mixsamp
