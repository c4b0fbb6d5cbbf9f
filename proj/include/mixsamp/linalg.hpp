#pragma once

#include "mixsamp/types.hpp"

namespace mixsamp {

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are sorted
/// ascending; column k of `eigenvectors` is the unit eigenvector of
/// eigenvalue k. For degenerate eigenvalues the basis within the
/// degenerate subspace is decomposition-dependent; downstream code must
/// only rely on quantities that are invariant under that choice.
struct HermitianEigensystem {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

// Tolerances for the linear-algebra layer (double precision, N <= 1024).
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kReconstructTol = 1e-9;

/// Hilbert-Schmidt inner product tr(a^dagger b).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hilbert-Schmidt (Frobenius) norm sqrt(tr(a^dagger a)).
double hs_norm(const ComplexMatrix& a);

/// True if ||a - a^dagger||_HS <= tol * max(1, ||a||_HS).
bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol);

/// Hermitian eigendecomposition. Throws std::invalid_argument for
/// non-Hermitian input and std::runtime_error if the solver fails.
HermitianEigensystem eigh(const ComplexMatrix& a);

/// U = exp(-i h dt) for Hermitian h, computed through eigh so that U is
/// unitary up to the orthonormality of the eigenvectors.
ComplexMatrix unitary_exp(const ComplexMatrix& h, double dt);

/// Kronecker product, a placed on the left factor.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace mixsamp
