#pragma once

#include <doctest.h>

#include "mixsamp/linalg.hpp"
#include "mixsamp/rng.hpp"

namespace mixsamp::testing {

inline ComplexMatrix sigma_x() {
    ComplexMatrix s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

inline ComplexMatrix sigma_y() {
    ComplexMatrix s(2, 2);
    s << 0, Complex(0, -1), Complex(0, 1), 0;
    return s;
}

inline ComplexMatrix sigma_z() {
    ComplexMatrix s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

inline ComplexMatrix random_hermitian(int n, Rng& rng) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.complex_normal();
    return 0.5 * (m + m.adjoint().eval());
}

inline ComplexMatrix random_unitary(int n, Rng& rng) {
    return unitary_exp(random_hermitian(n, rng), 1.0);
}

inline void check_close(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    CHECK((a - b).norm() <= tol);
}

}  // namespace mixsamp::testing
