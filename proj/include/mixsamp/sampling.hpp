#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixsamp/ensembles.hpp"
#include "mixsamp/propagation.hpp"
#include "mixsamp/rng.hpp"

namespace mixsamp {

enum class EstimatorFamily { Eigenstate, RandomPhase, Observable };

struct EnhancementFlags {
    bool trace_shift = false;
    /// Requires trace_shift: the reduced-population expectation value only
    /// reconstructs the target when the traceless observable is sampled.
    bool background_removal = false;
};

/// Estimator identity, addressable by the stable string ids used in configs
/// and CSV columns: "eigen", "eigen+ts", "eigen+ts+bg", "rp", "rp+ts",
/// "rp+ts+bg", "obs".
struct EstimatorKind {
    EstimatorFamily family = EstimatorFamily::Eigenstate;
    EnhancementFlags flags;

    static EstimatorKind parse(const std::string& id);
    std::string id() const;
    void validate() const;
};

struct SamplingEstimate {
    double value = 0.0;
    int k = 0;
    EstimatorKind kind;
    std::optional<std::uint64_t> seed;  // random-phase estimators only
};

struct ErrorBoundReport {
    enum class Side { Ensemble, Observable };
    double bound = 0.0;
    int k = 0;
    bool reduced = false;
    Side side = Side::Ensemble;
};

/// Best rank-k approximation in Hilbert-Schmidt norm of a Hermitian matrix:
/// P rho P with P the projector onto the eigenspace of the k eigenvalues of
/// largest modulus. The squared residual equals the sum of the squared
/// remaining eigenvalue moduli, and no rank-k matrix does better.
ComplexMatrix optimal_rank_k_approx(const ComplexMatrix& rho, int k);

/// Ensemble-side worst-case bound sqrt(sum_{i>k} q_i^2) for observables of
/// unit Hilbert-Schmidt norm, with q the populations (reduced = false) or
/// the background-removed populations p - p_min (reduced = true).
ErrorBoundReport worst_case_bound(const PopulationVector& p, int k, bool reduced);

/// Observable-side worst-case bound sqrt(sum_{i>k} |a_i|^2) over the
/// eigenvalues sorted by descending modulus; zero once k reaches the rank.
ErrorBoundReport observable_bound(const std::vector<double>& a_eigenvalues, int k);

/// Deterministic truncated-eigenbasis estimator: propagates the k most
/// populated eigenstates of rho. With trace_shift the traceless part of the
/// observable is sampled and tr(a)/N is added back at the end; with
/// background_removal the reduced populations weight the sum.
SamplingEstimate eigenstate_estimate(const DensityMatrix& rho, const HermitianObservable& a,
                                     const PropagationPlan& plan, int k,
                                     EnhancementFlags flags = {});

/// k unnormalized random-phase thermal states
///   |Phi> = (1/sqrt(N)) sum_j sqrt(q_j) e^{i theta_j} |basis_j>
/// in the eigenbasis of rho (or an explicit orthonormal basis, in which case
/// the weights enter through sqrt(rho)). q is p, or p - p_min when reduced.
StateBatch random_phase_states(const DensityMatrix& rho, int k, bool reduced, Rng& rng,
                               const std::optional<ComplexMatrix>& basis = std::nullopt);

/// Random-phase estimator (N/k) sum_k <Phi_k(T)|a'|Phi_k(T)> (+ tr(a)/N when
/// trace-shifted); unbiased over phase draws for the corresponding target.
SamplingEstimate random_phase_estimate(const DensityMatrix& rho, const HermitianObservable& a,
                                       const PropagationPlan& plan, int k,
                                       EnhancementFlags flags, Rng& rng,
                                       std::optional<std::uint64_t> seed_label = std::nullopt);

/// Observable-side estimator: backward-propagates the k eigenvectors of a
/// with largest-modulus eigenvalues and overlaps with the initial ensemble,
/// sum_{n<=k} a_n <A_n(T)|rho|A_n(T)>. Exact for k >= rank(a) under any
/// dynamics and any initial state.
SamplingEstimate observable_estimate(const HermitianObservable& a, const DensityMatrix& rho,
                                     const PropagationPlan& plan, int k);

double abs_error(double exact, const SamplingEstimate& estimate);

/// Diagnostic for random-phase suitability: the weight of the diagonal of
/// the Heisenberg-picture observable U^dagger a U in the given basis,
/// normalised by ||a||_HS^2.
double heisenberg_diagonal_fraction(const HermitianObservable& a, const PropagationPlan& plan,
                                    const HermitianEigensystem& basis);

namespace detail {
/// Indices of the k largest entries by |value|, ties broken by original
/// index (stable).
std::vector<int> top_k_by_modulus(const RealVector& values, int k);

/// Random-phase states from explicit weights on an orthonormal basis
/// (test hook; the public overload fills in the ensemble populations).
StateBatch random_phase_states_raw(const ComplexMatrix& basis, const RealVector& weights,
                                   int k, Rng& rng);
}  // namespace detail

}  // namespace mixsamp
