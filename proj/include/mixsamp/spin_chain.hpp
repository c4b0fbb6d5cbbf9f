#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixsamp/linalg.hpp"
#include "mixsamp/rng.hpp"
#include "mixsamp/types.hpp"

namespace mixsamp {

/// Hermitian operator with validated construction. Wraps the dense matrix;
/// the eigensystem is computed on demand via eigh().
class HermitianObservable {
  public:
    explicit HermitianObservable(ComplexMatrix m);

    const ComplexMatrix& matrix() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }
    double trace() const { return mat_.trace().real(); }
    double norm() const { return mat_.norm(); }
    HermitianEigensystem eigensystem() const { return eigh(mat_); }

  private:
    ComplexMatrix mat_;
};

/// Nearest-neighbour spin chain with open boundaries:
///   H(t) = -J sum_j vec(sigma)_j . vec(sigma)_{j+1}
///          - h_z sum_j sigma_j^z + field(t) sum_j sigma_j^x
struct ChainParams {
    int n_spins = 6;
    double coupling_j = 1.0;
    double field_hz = 0.002;

    int dim() const { return 1 << n_spins; }
    void validate() const;
};

/// Random driving field: Gaussian envelope times a band-limited Fourier sum
/// with randomly drawn complex amplitudes, truncated so the field vanishes
/// at the start of the grid and rescaled to the requested peak amplitude.
struct PulseSpec {
    double e_max = 1.0;
    double tau = 170.0;
    double t_center = 3.0 * 170.0;
    int n_steps = 1024;
    double dt = 6.0 * 170.0 / 1024.0;
    double bandwidth_fraction = 0.05;
    std::uint64_t seed = 0;

    /// Grid spanning six envelope widths centred on the pulse, so the
    /// truncated envelope vanishes at both grid edges.
    static PulseSpec standard(double tau = 170.0, int n_steps = 1024);

    TimeGrid grid() const { return {n_steps, dt}; }
    void validate() const;
};

struct PulseSeries {
    std::vector<double> values;  // field sample at each grid point
    TimeGrid grid;

    int size() const { return static_cast<int>(values.size()); }
};

enum class PauliAxis { X, Y, Z };

/// Single Pauli string term: coefficient times a product of Pauli matrices
/// on distinct sites (1-based site indices).
struct PauliTerm {
    std::vector<std::pair<int, PauliAxis>> factors;
    double coefficient = 0.0;
};

/// Randomised linear combination of one- and two-site Pauli terms,
/// rescaled to a fixed Hilbert-Schmidt norm.
struct ObservableSpec {
    int n_spins = 6;
    std::uint64_t seed = 0;
    bool traceless = true;
    double target_hs_norm = 0.0;  // 0 means sqrt(N)

    double resolved_norm() const;
    void validate() const;
};

/// Pauli matrix on one site of the chain, identity elsewhere; site 1 is the
/// leftmost Kronecker factor.
ComplexMatrix pauli_site(PauliAxis axis, int site, int n_spins);

HermitianObservable build_hamiltonian(const ChainParams& params, double field);

/// Drive operator sum_j sigma_j^x; build_hamiltonian(params, f) equals
/// build_hamiltonian(params, 0) + f * drive_operator(n) exactly.
ComplexMatrix drive_operator(int n_spins);

/// Total polarization A_z = sum_j sigma_j^z; diagonal and traceless.
HermitianObservable total_polarization(int n_spins);

/// Draws the pulse amplitudes from `rng`. `amplitude_override` substitutes
/// the drawn amplitudes (test hook); an all-zero draw from the rng is
/// resampled, an all-zero override is an error.
PulseSeries sample_pulse(const PulseSpec& spec, Rng& rng,
                         const std::vector<Complex>* amplitude_override = nullptr);

/// Convenience overload seeding the generator from spec.seed.
PulseSeries sample_pulse(const PulseSpec& spec);

HermitianObservable random_observable(const ObservableSpec& spec, Rng& rng);
HermitianObservable random_observable(const ObservableSpec& spec);

/// a + lambda*identity with |lambda| = ||a||_HS / N and random sign; used to
/// generate non-traceless test observables.
HermitianObservable add_identity_offset(const HermitianObservable& a, Rng& rng);

namespace detail {
/// Dense accumulation of Pauli-string terms; every string touches exactly N
/// entries, so the cost is O(terms * N). Exposed for tests and for building
/// observables from explicit coefficients.
ComplexMatrix pauli_sum(int n_spins, const std::vector<PauliTerm>& terms);
}  // namespace detail

}  // namespace mixsamp
