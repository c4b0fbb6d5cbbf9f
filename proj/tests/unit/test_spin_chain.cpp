#include <doctest.h>

#include "mixsamp/spin_chain.hpp"
#include "test_common.hpp"

using namespace mixsamp;
using namespace mixsamp::testing;

TEST_SUITE("spin_chain") {
    TEST_CASE("pauli_site places the factor at the right position") {
        check_close(pauli_site(PauliAxis::Z, 1, 1), sigma_z(), 1e-15);

        ComplexMatrix z1 = pauli_site(PauliAxis::Z, 1, 2);
        ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
        expected.diagonal() << 1, 1, -1, -1;
        check_close(z1, expected, 1e-15);

        check_close(pauli_site(PauliAxis::X, 2, 2),
                    kron(ComplexMatrix::Identity(2, 2), sigma_x()), 1e-15);
    }

    TEST_CASE("pauli_site operators are Hermitian, traceless, norm sqrt(N)") {
        for (int n : {1, 2, 3, 4}) {
            for (int site = 1; site <= n; ++site) {
                for (PauliAxis axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
                    ComplexMatrix op = pauli_site(axis, site, n);
                    CHECK(is_hermitian(op));
                    CHECK(std::abs(op.trace()) < 1e-12);
                    CHECK(hs_norm(op) == doctest::Approx(std::sqrt(double(1 << n))));
                }
            }
        }
    }

    TEST_CASE("pauli_site rejects out-of-range sites") {
        CHECK_THROWS_AS(pauli_site(PauliAxis::X, 0, 2), std::invalid_argument);
        CHECK_THROWS_AS(pauli_site(PauliAxis::X, 3, 2), std::invalid_argument);
    }

    TEST_CASE("pauli_sum matches explicit Kronecker construction") {
        Rng rng(21);
        for (int trial = 0; trial < 30; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 3);
            const int site = 1 + static_cast<int>(rng.next_u64() % n);
            const auto axis = static_cast<PauliAxis>(rng.next_u64() % 3);
            check_close(detail::pauli_sum(n, {{{{site, axis}}, 1.0}}),
                        pauli_site(axis, site, n), 1e-14);
        }
    }

    TEST_CASE("pauli_sum two-site strings match operator products") {
        Rng rng(22);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 3;
            const int j = 1 + static_cast<int>(rng.next_u64() % 2);
            const int k = j + 1 + static_cast<int>(rng.next_u64() % (n - j));
            const auto a = static_cast<PauliAxis>(rng.next_u64() % 3);
            const auto b = static_cast<PauliAxis>(rng.next_u64() % 3);
            check_close(detail::pauli_sum(n, {{{{j, a}, {k, b}}, 1.0}}),
                        pauli_site(a, j, n) * pauli_site(b, k, n), 1e-14);
        }
    }

    TEST_CASE("two-spin exchange Hamiltonian spectrum") {
        HermitianObservable h = build_hamiltonian({2, 1.0, 0.0}, 0.0);
        HermitianEigensystem es = h.eigensystem();
        CHECK(es.eigenvalues(0) == doctest::Approx(-1.0));
        CHECK(es.eigenvalues(1) == doctest::Approx(-1.0));
        CHECK(es.eigenvalues(2) == doctest::Approx(-1.0));
        CHECK(es.eigenvalues(3) == doctest::Approx(3.0));
    }

    TEST_CASE("pure z-field Hamiltonian is diagonal") {
        HermitianObservable h = build_hamiltonian({2, 0.0, 1.0}, 0.0);
        ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
        expected.diagonal() << -2, 0, 0, 2;
        check_close(h.matrix(), expected, 1e-14);
    }

    TEST_CASE("field-free Hamiltonian commutes with the total polarization") {
        HermitianObservable h = build_hamiltonian({4, 1.0, 0.3}, 0.0);
        const ComplexMatrix& az = total_polarization(4).matrix();
        CHECK((h.matrix() * az - az * h.matrix()).norm() <= 1e-10);
    }

    TEST_CASE("build_hamiltonian is exactly linear in the drive field") {
        ChainParams params{3, 0.7, 0.1};
        ComplexMatrix h0 = build_hamiltonian(params, 0.0).matrix();
        ComplexMatrix hf = build_hamiltonian(params, 0.37).matrix();
        CHECK((hf - h0 - 0.37 * drive_operator(3)).norm() == 0.0);
    }

    TEST_CASE("total polarization matrices") {
        check_close(total_polarization(1).matrix(), sigma_z(), 1e-15);
        ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
        expected.diagonal() << 2, 0, 0, -2;
        check_close(total_polarization(2).matrix(), expected, 1e-15);
        CHECK(std::abs(total_polarization(5).trace()) < 1e-12);
    }

    TEST_CASE("sampled pulse is normalised to the peak amplitude") {
        PulseSpec spec = PulseSpec::standard(170.0, 256);
        spec.e_max = 0.8;
        spec.seed = 5;
        PulseSeries series = sample_pulse(spec);
        double peak = 0;
        for (double v : series.values) peak = std::max(peak, std::abs(v));
        CHECK(peak == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(std::abs(series.values.front()) <= 1e-6 * spec.e_max);
    }

    TEST_CASE("pulse sampling is deterministic in the seed") {
        PulseSpec spec = PulseSpec::standard(170.0, 128);
        spec.seed = 99;
        PulseSeries a = sample_pulse(spec), b = sample_pulse(spec);
        CHECK(a.values == b.values);
        spec.seed = 100;
        CHECK(sample_pulse(spec).values != a.values);
    }

    TEST_CASE("zero peak amplitude gives the zero pulse") {
        PulseSpec spec = PulseSpec::standard(170.0, 64);
        spec.e_max = 0.0;
        PulseSeries series = sample_pulse(spec);
        for (double v : series.values) CHECK(v == 0.0);
    }

    TEST_CASE("all-zero amplitude override raises") {
        PulseSpec spec = PulseSpec::standard(170.0, 64);
        Rng rng(1);
        const int n_modes = static_cast<int>(std::ceil(0.05 * 64));
        std::vector<Complex> zeros(static_cast<std::size_t>(n_modes), Complex(0, 0));
        CHECK_THROWS_AS(sample_pulse(spec, rng, &zeros), std::runtime_error);
    }

    TEST_CASE("random observables are Hermitian, traceless and norm sqrt(N)") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            ObservableSpec spec{4, seed, true, 0.0};
            HermitianObservable a = random_observable(spec);
            const double root_n = std::sqrt(16.0);
            CHECK(is_hermitian(a.matrix()));
            CHECK(std::abs(a.trace()) <= 1e-10 * root_n);
            CHECK(a.norm() == doctest::Approx(root_n).epsilon(1e-10));
        }
    }

    TEST_CASE("random observables are deterministic in the seed") {
        ObservableSpec spec{3, 7, true, 0.0};
        CHECK(random_observable(spec).matrix() == random_observable(spec).matrix());
        ObservableSpec other{3, 8, true, 0.0};
        CHECK(random_observable(spec).matrix() != random_observable(other).matrix());
    }

    TEST_CASE("single-coefficient draw reduces to a bare Pauli operator") {
        ComplexMatrix m = detail::pauli_sum(1, {{{{1, PauliAxis::Z}}, 1.0}});
        m *= std::sqrt(2.0) / m.norm();  // the generator's rescaling step
        check_close(m, sigma_z(), 1e-14);
    }

    TEST_CASE("identity offset magnitude and trace shift") {
        Rng rng(31);
        HermitianObservable zero(ComplexMatrix::Zero(4, 4));
        CHECK(add_identity_offset(zero, rng).matrix().norm() == 0.0);

        HermitianObservable sz(sigma_z());
        HermitianObservable shifted = add_identity_offset(sz, rng);
        const double lambda = (shifted.trace() - sz.trace()) / 2.0;
        CHECK(std::abs(lambda) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
        check_close(shifted.matrix() - lambda * ComplexMatrix::Identity(2, 2), sz.matrix(),
                    1e-12);
    }

    TEST_CASE("non-traceless spec applies the identity offset") {
        ObservableSpec spec{3, 11, false, 0.0};
        HermitianObservable a = random_observable(spec);
        CHECK(std::abs(a.trace()) > 1e-6);
    }

    TEST_CASE("chain params validation") {
        ChainParams single{1, 1.0, 0.0}, pair{2, 1.0, 0.0};
        CHECK_THROWS_AS(single.validate(), std::invalid_argument);
        CHECK_NOTHROW(pair.validate());
    }
}
