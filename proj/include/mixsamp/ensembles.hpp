#pragma once

#include <utility>
#include <vector>

#include "mixsamp/spin_chain.hpp"
#include "mixsamp/types.hpp"

namespace mixsamp {

/// Eigenvalue weights of a density matrix, sorted descending. Full
/// ensembles sum to one; reduced ensembles (after background removal) sum
/// to 1 - N*p_min and are marked as such.
class PopulationVector {
  public:
    PopulationVector(std::vector<double> values, bool reduced = false);

    const std::vector<double>& values() const { return values_; }
    bool reduced() const { return reduced_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

  private:
    std::vector<double> values_;
    bool reduced_;
};

/// Total population outside the first k entries: 1 - sum_{i<=k} p_i.
double population_residuum(const PopulationVector& p, int k);

/// Mixed state with its eigensystem cached: populations sorted descending
/// with the eigenvector columns aligned. Immutable after construction.
class DensityMatrix {
  public:
    /// Validates Hermiticity, positivity (eigenvalues >= -1e-12) and unit
    /// trace within 1e-10.
    static DensityMatrix from_matrix(const ComplexMatrix& m);

    /// Builds the state sum_n w_n |basis_n><basis_n|. Weights need not sum
    /// to one when `reduced` is set (background-removed states).
    static DensityMatrix from_populations(ComplexMatrix basis, RealVector weights,
                                          bool reduced = false);

    const ComplexMatrix& matrix() const { return mat_; }
    /// Populations, descending; tiny negative eigenvalues are clamped to 0.
    const RealVector& population_values() const { return populations_; }
    PopulationVector populations() const;
    /// Column n is the eigenvector of populations()[n].
    const ComplexMatrix& basis() const { return basis_; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    bool reduced() const { return reduced_; }

  private:
    DensityMatrix(ComplexMatrix mat, RealVector populations, ComplexMatrix basis,
                  bool reduced)
        : mat_(std::move(mat)),
          populations_(std::move(populations)),
          basis_(std::move(basis)),
          reduced_(reduced) {}

    ComplexMatrix mat_;
    RealVector populations_;
    ComplexMatrix basis_;
    bool reduced_;
};

/// Canonical ensemble exp(-beta h0)/Z. Energies are shifted by the ground
/// state energy before exponentiation, so large beta cannot overflow;
/// beta = +infinity yields the (possibly degenerate) ground-state ensemble.
DensityMatrix thermal_state(const HermitianObservable& h0, double beta);

/// tr(rho^2) = sum_n p_n^2.
double purity(const DensityMatrix& rho);

/// Inverse temperature that reaches the target purity, by bisection on the
/// monotone map beta -> purity. Endpoints map to 0 and +infinity.
double beta_for_purity(const HermitianObservable& h0, double target);

/// Splits off the identity background p_min * I: returns the reduced state
/// with populations p_n - p_min on the same eigenvectors, and p_min.
std::pair<DensityMatrix, double> split_background(const DensityMatrix& rho);

/// Splits a into its traceless part and the identity coefficient
/// lambda0 = tr(a)/N, so that a = a0 + lambda0 * I.
std::pair<HermitianObservable, double> split_traceless(const HermitianObservable& a);

}  // namespace mixsamp
