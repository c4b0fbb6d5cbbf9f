#include "mixsamp/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mixsamp {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kEigenvalueFloor = -1e-12;

// Boltzmann weights on a shifted spectrum, normalised; energies ascending
// in, populations descending out.
RealVector boltzmann_populations(const RealVector& energies, double beta) {
    const Eigen::Index n = energies.size();
    RealVector w(n);
    if (std::isinf(beta)) {
        // Ground-state limit: equal weight on the (numerically) degenerate
        // ground manifold.
        const double e0 = energies(0);
        const double tol = 1e-12 * std::max(1.0, std::abs(e0));
        for (Eigen::Index i = 0; i < n; ++i) w(i) = (energies(i) - e0 <= tol) ? 1.0 : 0.0;
    } else {
        const double e0 = energies(0);
        for (Eigen::Index i = 0; i < n; ++i) w(i) = std::exp(-beta * (energies(i) - e0));
    }
    return w / w.sum();
}

double purity_of(const RealVector& populations) { return populations.squaredNorm(); }

}  // namespace

PopulationVector::PopulationVector(std::vector<double> values, bool reduced)
    : values_(std::move(values)), reduced_(reduced) {
    if (values_.empty()) throw std::invalid_argument("PopulationVector: empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        double v = values_[i];
        if (!std::isfinite(v) || v < kEigenvalueFloor)
            throw std::invalid_argument("PopulationVector: entries must be nonnegative");
        values_[i] = std::max(v, 0.0);
        if (i > 0 && values_[i] > values_[i - 1] + 1e-12)
            throw std::invalid_argument("PopulationVector: entries must be descending");
        sum += values_[i];
    }
    if (!reduced_ && std::abs(sum - 1.0) > kTraceTol)
        throw std::invalid_argument("PopulationVector: full ensemble must sum to 1");
}

double population_residuum(const PopulationVector& p, int k) {
    if (k < 0 || k > p.size())
        throw std::invalid_argument("population_residuum: k out of range");
    // Summing the tail keeps the result exact at k = N.
    double tail = 0.0;
    for (int i = p.size() - 1; i >= k; --i) tail += p[i];
    return tail;
}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m) {
    HermitianEigensystem es = eigh(m);  // throws for non-Hermitian input
    const Eigen::Index n = es.eigenvalues.size();

    double trace = es.eigenvalues.sum();
    if (std::abs(trace - 1.0) > kTraceTol)
        throw std::invalid_argument("DensityMatrix: trace must be 1");
    if (es.eigenvalues.minCoeff() < kEigenvalueFloor)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");

    // eigh sorts ascending; populations are stored descending.
    RealVector populations(n);
    ComplexMatrix basis(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        populations(i) = std::max(es.eigenvalues(n - 1 - i), 0.0);
        basis.col(i) = es.eigenvectors.col(n - 1 - i);
    }
    return DensityMatrix(m, std::move(populations), std::move(basis), false);
}

DensityMatrix DensityMatrix::from_populations(ComplexMatrix basis, RealVector weights,
                                              bool reduced) {
    const Eigen::Index n = basis.rows();
    if (basis.cols() != n || weights.size() != n)
        throw std::invalid_argument("DensityMatrix: basis/weights size mismatch");
    if (weights.minCoeff() < kEigenvalueFloor)
        throw std::invalid_argument("DensityMatrix: negative weight");
    if (!reduced && std::abs(weights.sum() - 1.0) > kTraceTol)
        throw std::invalid_argument("DensityMatrix: weights must sum to 1");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return weights(a) > weights(b); });

    RealVector populations(n);
    ComplexMatrix sorted_basis(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        populations(i) = std::max(weights(order[static_cast<std::size_t>(i)]), 0.0);
        sorted_basis.col(i) = basis.col(order[static_cast<std::size_t>(i)]);
    }
    ComplexMatrix mat =
        sorted_basis * populations.cast<Complex>().asDiagonal() * sorted_basis.adjoint();
    return DensityMatrix(std::move(mat), std::move(populations), std::move(sorted_basis),
                         reduced);
}

PopulationVector DensityMatrix::populations() const {
    return PopulationVector(
        std::vector<double>(populations_.data(), populations_.data() + populations_.size()),
        reduced_);
}

DensityMatrix thermal_state(const HermitianObservable& h0, double beta) {
    if (std::isnan(beta) || beta < 0)
        throw std::invalid_argument("thermal_state: beta must be >= 0");
    HermitianEigensystem es = h0.eigensystem();
    RealVector populations = boltzmann_populations(es.eigenvalues, beta);
    // Energies ascend, so the Boltzmann weights already descend and the
    // stable sort in from_populations keeps the energy ordering among ties.
    return DensityMatrix::from_populations(es.eigenvectors, std::move(populations));
}

double purity(const DensityMatrix& rho) { return purity_of(rho.population_values()); }

double beta_for_purity(const HermitianObservable& h0, double target) {
    const int n = h0.dim();
    const double p_min = 1.0 / n;
    constexpr double tol = 1e-10;
    if (target < p_min - tol || target > 1.0 + tol)
        throw std::invalid_argument("beta_for_purity: target outside [1/N, 1]");
    if (target <= p_min + tol) return 0.0;

    HermitianEigensystem es = h0.eigensystem();
    auto purity_at = [&](double beta) {
        return purity_of(boltzmann_populations(es.eigenvalues, beta));
    };

    const double p_max = purity_at(std::numeric_limits<double>::infinity());
    if (target >= p_max - tol) {
        if (target > p_max + tol)
            throw std::invalid_argument(
                "beta_for_purity: target above the ground-state purity");
        return std::numeric_limits<double>::infinity();
    }

    double lo = 0.0, hi = 1.0;
    while (purity_at(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            throw std::runtime_error("beta_for_purity: bisection bracket failed");
    }
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double p = purity_at(mid);
        if (std::abs(p - target) <= tol) return mid;
        (p < target ? lo : hi) = mid;
    }
    throw std::runtime_error("beta_for_purity: bisection did not converge");
}

std::pair<DensityMatrix, double> split_background(const DensityMatrix& rho) {
    const RealVector& p = rho.population_values();
    const double p_min = p(p.size() - 1);  // populations are descending
    RealVector reduced = p.array() - p_min;
    return {DensityMatrix::from_populations(rho.basis(), std::move(reduced),
                                            /*reduced=*/true),
            p_min};
}

std::pair<HermitianObservable, double> split_traceless(const HermitianObservable& a) {
    const double lambda0 = a.trace() / a.dim();
    ComplexMatrix a0 = a.matrix();
    a0.diagonal().array() -= lambda0;
    return {HermitianObservable(std::move(a0)), lambda0};
}

}  // namespace mixsamp
