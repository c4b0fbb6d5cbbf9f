#include "mixsamp/linalg.hpp"

#include <stdexcept>

namespace mixsamp {

namespace {

void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": matrix must be square");
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "hs_inner");
    require_square(b, "hs_inner");
    if (a.rows() != b.rows()) throw std::invalid_argument("hs_inner: dimension mismatch");
    // tr(a^dagger b) as an entrywise sum, O(N^2) instead of a product trace.
    return a.conjugate().cwiseProduct(b).sum();
}

double hs_norm(const ComplexMatrix& a) {
    require_square(a, "hs_norm");
    return a.norm();
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
    if (a.rows() != a.cols() || !a.allFinite()) return false;
    double scale = std::max(1.0, a.norm());
    return (a - a.adjoint()).norm() <= tol * scale;
}

HermitianEigensystem eigh(const ComplexMatrix& a) {
    require_square(a, "eigh");
    if (!is_hermitian(a))
        throw std::invalid_argument("eigh: input is not Hermitian within tolerance");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigh: eigendecomposition failed to converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix unitary_exp(const ComplexMatrix& h, double dt) {
    if (!std::isfinite(dt)) throw std::invalid_argument("unitary_exp: dt must be finite");
    HermitianEigensystem es = eigh(h);
    const Complex minus_i(0.0, -1.0);
    ComplexVector phases =
        (minus_i * dt * es.eigenvalues.cast<Complex>().array()).exp().matrix();
    return es.eigenvectors * phases.asDiagonal() * es.eigenvectors.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace mixsamp
