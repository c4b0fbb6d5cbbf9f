#include <doctest.h>

#include <cmath>

#include "mixsamp/sampling.hpp"
#include "test_common.hpp"

using namespace mixsamp;
using namespace mixsamp::testing;

namespace {

PulseSeries zero_pulse(int n_steps, double dt) {
    return {std::vector<double>(static_cast<std::size_t>(n_steps), 0.0), {n_steps, dt}};
}

PropagationPlan pulsed_plan(const ChainParams& chain, int n_steps, std::uint64_t seed,
                            double e_max = 1.0) {
    PulseSpec spec = PulseSpec::standard(20.0, n_steps);
    spec.seed = seed;
    spec.e_max = e_max;
    return PropagationPlan::for_chain(chain, sample_pulse(spec));
}

ComplexMatrix random_rank_k(int n, int k, Rng& rng) {
    ComplexMatrix b(n, k), c(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) {
            b(i, j) = rng.complex_normal();
            c(i, j) = rng.complex_normal();
        }
    return b * c.adjoint();
}

double tail_sum_sq(const RealVector& eigenvalues, int k) {
    std::vector<double> moduli;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        moduli.push_back(std::abs(eigenvalues(i)));
    std::sort(moduli.begin(), moduli.end(), std::greater<double>());
    double sum = 0;
    for (std::size_t i = static_cast<std::size_t>(k); i < moduli.size(); ++i)
        sum += moduli[i] * moduli[i];
    return sum;
}

}  // namespace

TEST_SUITE("sampling") {
    TEST_CASE("estimator ids round trip and flags validate") {
        for (const char* id :
             {"eigen", "eigen+ts", "eigen+ts+bg", "rp", "rp+ts", "rp+ts+bg", "obs"})
            CHECK(EstimatorKind::parse(id).id() == id);
        CHECK_THROWS_AS(EstimatorKind::parse("eigen+bg"), std::invalid_argument);
        CHECK_THROWS_AS(EstimatorKind::parse("nope"), std::invalid_argument);
        EstimatorKind bad{EstimatorFamily::RandomPhase, {false, true}};
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }

    TEST_CASE("optimal rank-k approximation keeps the top of the spectrum") {
        ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
        rho.diagonal() << 0.5, 0.3, 0.2;
        ComplexMatrix approx = optimal_rank_k_approx(rho, 2);
        ComplexMatrix expected = rho;
        expected(2, 2) = 0.0;
        check_close(approx, expected, 1e-12);
        CHECK((rho - approx).norm() == doctest::Approx(0.2).epsilon(1e-12));

        check_close(optimal_rank_k_approx(rho, 3), rho, 1e-12);
    }

    TEST_CASE("rank-k truncation selects by modulus") {
        ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
        rho.diagonal() << 1.0, -0.9, 0.1;
        ComplexMatrix approx = optimal_rank_k_approx(rho, 1);
        ComplexMatrix expected = ComplexMatrix::Zero(3, 3);
        expected(0, 0) = 1.0;
        check_close(approx, expected, 1e-12);
        CHECK((rho - approx).norm() == doctest::Approx(std::sqrt(0.82)).epsilon(1e-12));
    }

    TEST_CASE("rank-k approximation rejects bad input") {
        ComplexMatrix rho = ComplexMatrix::Identity(3, 3) / 3.0;
        CHECK_THROWS_AS(optimal_rank_k_approx(rho, 0), std::invalid_argument);
        CHECK_THROWS_AS(optimal_rank_k_approx(rho, 4), std::invalid_argument);
        ComplexMatrix bad(2, 2);
        bad << 0, 1, 0, 0;
        CHECK_THROWS_AS(optimal_rank_k_approx(bad, 1), std::invalid_argument);
    }

    TEST_CASE("the rank-k inequality holds and the projector attains it") {
        Rng rng(61);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 15);
            const int k = 1 + static_cast<int>(rng.next_u64() % n);
            ComplexMatrix rho = random_hermitian(n, rng);
            rho /= rho.norm();
            HermitianEigensystem es = eigh(rho);
            const double tail = tail_sum_sq(es.eigenvalues, k);

            for (int candidate = 0; candidate < 40; ++candidate) {
                ComplexMatrix m = random_rank_k(n, k, rng);
                CHECK((rho - m).squaredNorm() >= tail - 1e-9);
            }
            ComplexMatrix best = optimal_rank_k_approx(rho, k);
            CHECK(std::abs((rho - best).squaredNorm() - tail) <= 1e-10);
        }
    }

    TEST_CASE("worst-case bound examples") {
        PopulationVector p({2.0 / 3.0, 1.0 / 3.0});
        CHECK(worst_case_bound(p, 1, false).bound == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(worst_case_bound(p, 1, true).bound == doctest::Approx(0.0));
        CHECK(worst_case_bound(p, 2, false).bound == 0.0);
        CHECK_THROWS_AS(worst_case_bound(p, 3, false), std::invalid_argument);
    }

    TEST_CASE("bounds decrease with k and vanish at k = N") {
        Rng rng(62);
        HermitianObservable h0(random_hermitian(16, rng));
        PopulationVector p = thermal_state(h0, 1.0).populations();
        for (bool reduced : {false, true}) {
            double previous = std::numeric_limits<double>::infinity();
            for (int k = 0; k <= 16; ++k) {
                const double bound = worst_case_bound(p, k, reduced).bound;
                CHECK(bound <= previous + 1e-15);
                previous = bound;
            }
            CHECK(worst_case_bound(p, 16, reduced).bound == 0.0);
        }
    }

    TEST_CASE("observable-side bound examples") {
        std::vector<double> projector{1, 0, 0, 0};
        CHECK(observable_bound(projector, 1).bound == 0.0);
        std::vector<double> generic{2.0, -1.0, 0.5};
        CHECK(observable_bound(generic, 1).bound ==
              doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));
        CHECK(observable_bound(generic, 0).bound ==
              doctest::Approx(std::sqrt(4.0 + 1.0 + 0.25)).epsilon(1e-12));
    }

    TEST_CASE("eigenstate estimate recovers the oracle at k = N") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 0.7);
        HermitianObservable a = random_observable({3, 17, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 64, 17);
        const double exact = exact_expectation(rho, a, plan);
        for (EnhancementFlags flags : {EnhancementFlags{false, false},
                                       EnhancementFlags{true, false},
                                       EnhancementFlags{true, true}})
            CHECK(std::abs(eigenstate_estimate(rho, a, plan, 8, flags).value - exact) <= 1e-9);
    }

    TEST_CASE("a pure state needs a single eigenstate") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, std::numeric_limits<double>::infinity());
        HermitianObservable a = random_observable({3, 18, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 64, 18);
        const double exact = exact_expectation(rho, a, plan);
        CHECK(std::abs(eigenstate_estimate(rho, a, plan, 1, {}).value - exact) <= 1e-9);

        Rng rng(63);
        CHECK(std::abs(random_phase_estimate(rho, a, plan, 1, {}, rng).value - exact) <= 1e-9);
    }

    TEST_CASE("the maximally mixed state with both enhancements is exact at any k") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 0.0);
        HermitianObservable a = random_observable({3, 19, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 64, 19);
        const double exact = exact_expectation(rho, a, plan);
        CHECK(std::abs(exact) <= 1e-10);  // traceless observable, identity ensemble
        EnhancementFlags both{true, true};
        for (int k : {1, 3, 8})
            CHECK(std::abs(eigenstate_estimate(rho, a, plan, k, both).value - exact) <= 1e-9);
        Rng rng(64);
        CHECK(std::abs(random_phase_estimate(rho, a, plan, 2, both, rng).value - exact) <=
              1e-9);
    }

    TEST_CASE("eigenstate estimate validates its inputs") {
        ChainParams chain{2, 1.0, 0.25};
        DensityMatrix rho = thermal_state(build_hamiltonian(chain, 0.0), 0.5);
        HermitianObservable a = random_observable({2, 20, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 8, 20);
        CHECK_THROWS_AS(eigenstate_estimate(rho, a, plan, 0, {}), std::invalid_argument);
        CHECK_THROWS_AS(eigenstate_estimate(rho, a, plan, 5, {}), std::invalid_argument);
        CHECK_THROWS_AS(eigenstate_estimate(rho, a, plan, 1, {false, true}),
                        std::invalid_argument);
    }

    TEST_CASE("random-phase states of a pure ensemble are the ground state") {
        ChainParams chain{2, 1.0, 0.3};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, std::numeric_limits<double>::infinity());
        Rng rng(65);
        StateBatch states = random_phase_states(rho, 3, false, rng);
        const ComplexVector ground = rho.basis().col(0);
        for (int j = 0; j < 3; ++j) {
            // parallel to the ground state, norm 1/sqrt(N)
            CHECK(std::abs(std::abs(ground.dot(states.col(j))) - states.col(j).norm()) <=
                  1e-12);
            CHECK(states.col(j).norm() == doctest::Approx(0.5).epsilon(1e-12));
        }
    }

    TEST_CASE("reduced random-phase states of the maximally mixed state vanish") {
        ChainParams chain{2, 1.0, 0.3};
        DensityMatrix rho = thermal_state(build_hamiltonian(chain, 0.0), 0.0);
        Rng rng(66);
        StateBatch states = random_phase_states(rho, 2, true, rng);
        CHECK(states.norm() == 0.0);
    }

    TEST_CASE("averaged uniform realizations resolve the identity") {
        const int n = 2, k = 100000;
        ComplexMatrix basis = ComplexMatrix::Identity(n, n);
        Rng rng(67);
        StateBatch states =
            detail::random_phase_states_raw(basis, RealVector::Ones(n), k, rng);
        ComplexMatrix avg = ComplexMatrix::Zero(n, n);
        for (int j = 0; j < k; ++j) avg += states.col(j) * states.col(j).adjoint();
        avg *= static_cast<double>(n) / k;
        // statistical fluctuation ~ N/sqrt(K)
        CHECK((avg - ComplexMatrix::Identity(n, n)).norm() <=
              3.0 * n / std::sqrt(double(k)));
    }

    TEST_CASE("explicit eigenbasis argument reproduces the default construction") {
        ChainParams chain{2, 1.0, 0.3};
        DensityMatrix rho = thermal_state(build_hamiltonian(chain, 0.0), 0.8);
        Rng rng_a(68), rng_b(68);
        StateBatch direct = random_phase_states(rho, 4, false, rng_a);
        StateBatch via_basis = random_phase_states(rho, 4, false, rng_b, rho.basis());
        check_close(direct, via_basis, 1e-12);
    }

    TEST_CASE("random-phase estimates are invariant under spectral shifts") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 1.2);
        HermitianObservable a = random_observable({3, 21, true, 0.0});
        HermitianObservable shifted(a.matrix() +
                                    1.7 * ComplexMatrix::Identity(a.dim(), a.dim()));
        PropagationPlan plan = pulsed_plan(chain, 32, 21);
        for (EnhancementFlags flags : {EnhancementFlags{false, false},
                                       EnhancementFlags{true, false},
                                       EnhancementFlags{true, true}}) {
            Rng rng_a(77), rng_b(77);
            const double base = random_phase_estimate(rho, a, plan, 3, flags, rng_a).value;
            const double moved = random_phase_estimate(rho, shifted, plan, 3, flags, rng_b).value;
            CHECK(std::abs(moved - base - 1.7) <= 1e-11);
        }
    }

    TEST_CASE("the random-phase estimator is unbiased") {
        ChainParams chain{2, 1.0, 0.3};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 1.0);
        HermitianObservable a = random_observable({2, 22, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 4, 22);
        const double target = exact_expectation(rho, a, plan);

        const int n_seeds = 10000, k = 2;
        double sum = 0, sum_sq = 0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            Rng rng = Rng::split(900, {static_cast<std::uint64_t>(seed)});
            const double value = random_phase_estimate(rho, a, plan, k, {}, rng).value;
            sum += value;
            sum_sq += value * value;
        }
        const double mean = sum / n_seeds;
        const double variance = sum_sq / n_seeds - mean * mean;
        const double standard_error = std::sqrt(variance / n_seeds);
        CHECK(std::abs(mean - target) <= 3.0 * standard_error);
    }

    TEST_CASE("more random-phase realizations give smaller errors on average") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, beta_for_purity(h0, 0.2));
        HermitianObservable a = random_observable({3, 23, true, 0.0});
        PropagationPlan plan = pulsed_plan(chain, 16, 23);
        const double exact = exact_expectation(rho, a, plan);

        auto mean_error = [&](int k) {
            double total = 0;
            for (int seed = 0; seed < 40; ++seed) {
                Rng rng = Rng::split(901, {static_cast<std::uint64_t>(seed),
                                           static_cast<std::uint64_t>(k)});
                total += std::abs(random_phase_estimate(rho, a, plan, k, {}, rng).value - exact);
            }
            return total / 40;
        };
        CHECK(mean_error(64) < mean_error(4));
    }

    TEST_CASE("background removal is a no-op when the smallest population is zero") {
        // p' = p for a rank-deficient ensemble, so with a traceless
        // observable the reduced estimator must reproduce the plain one
        // realization by realization.
        ChainParams chain{2, 1.0, 0.3};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        HermitianEigensystem es = h0.eigensystem();
        RealVector weights(4);
        weights << 0.6, 0.4, 0.0, 0.0;
        DensityMatrix rho = DensityMatrix::from_populations(es.eigenvectors, weights);

        HermitianObservable az = total_polarization(2);  // diagonal, traceless
        PropagationPlan plan = pulsed_plan(chain, 16, 70);
        Rng rng_a(71), rng_b(71);
        const double plain = random_phase_estimate(rho, az, plan, 4, {}, rng_a).value;
        const double reduced =
            random_phase_estimate(rho, az, plan, 4, {true, true}, rng_b).value;
        CHECK(reduced == doctest::Approx(plain).epsilon(1e-12));
    }

    TEST_CASE("rank-one projectors need a single backward state") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 0.5);
        PropagationPlan plan = pulsed_plan(chain, 48, 24);

        Rng rng(69);
        ComplexVector v(8);
        for (int i = 0; i < 8; ++i) v(i) = rng.complex_normal();
        v.normalize();
        HermitianObservable projector(ComplexMatrix(v * v.adjoint()));
        const double exact = exact_expectation(rho, projector, plan);
        CHECK(std::abs(observable_estimate(projector, rho, plan, 1).value - exact) <= 1e-9);
    }

    TEST_CASE("observable sampling is exact at k = N and at the observable rank") {
        ChainParams chain{2, 1.0, 0.3};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        DensityMatrix rho = thermal_state(h0, 0.9);
        PropagationPlan plan = pulsed_plan(chain, 32, 25);

        HermitianObservable a = random_observable({2, 26, true, 0.0});
        const double exact = exact_expectation(rho, a, plan);
        CHECK(std::abs(observable_estimate(a, rho, plan, 4).value - exact) <= 1e-9);

        // A_z = diag(2, 0, 0, -2): two zero eigenvalues drop from the sum.
        HermitianObservable az = total_polarization(2);
        const double exact_az = exact_expectation(rho, az, plan);
        CHECK(std::abs(observable_estimate(az, rho, plan, 2).value - exact_az) <= 1e-9);
    }

    TEST_CASE("abs_error is the plain distance") {
        SamplingEstimate estimate{0.75, 1, {}, std::nullopt};
        CHECK(abs_error(1.0, estimate) == doctest::Approx(0.25));
        estimate.value = 1.0;
        CHECK(abs_error(1.0, estimate) == 0.0);
    }

    TEST_CASE("errors stay below the matching analytic bounds") {
        ChainParams chain{3, 1.0, 0.25};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        PropagationPlan plan = pulsed_plan(chain, 64, 27);
        for (double target_purity : {0.15, 0.6}) {
            DensityMatrix rho = thermal_state(h0, beta_for_purity(h0, target_purity));
            PopulationVector populations = rho.populations();
            for (std::uint64_t seed = 30; seed < 34; ++seed) {
                HermitianObservable a = random_observable({3, seed, true, 0.0});
                const double exact = exact_expectation(rho, a, plan);
                for (int k : {1, 3, 6}) {
                    for (EnhancementFlags flags : {EnhancementFlags{false, false},
                                                   EnhancementFlags{true, false},
                                                   EnhancementFlags{true, true}}) {
                        const double err = std::abs(
                            eigenstate_estimate(rho, a, plan, k, flags).value - exact);
                        const double bound =
                            worst_case_bound(populations, k, flags.background_removal).bound;
                        CHECK(err <= bound * a.norm() + 1e-8);
                    }
                    HermitianEigensystem es = a.eigensystem();
                    std::vector<double> eigenvalues(es.eigenvalues.data(),
                                                    es.eigenvalues.data() + es.dim());
                    const double obs_err =
                        std::abs(observable_estimate(a, rho, plan, k).value - exact);
                    CHECK(obs_err <= observable_bound(eigenvalues, k).bound + 1e-8);
                }
            }
        }
    }

    TEST_CASE("diagonal fraction is one for a conserved observable") {
        ChainParams chain{2, 1.0, 0.37};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        PropagationPlan plan = PropagationPlan::for_chain(chain, zero_pulse(16, 0.4));
        CHECK(heisenberg_diagonal_fraction(total_polarization(2), plan, h0.eigensystem()) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("diagonal fraction vanishes for an off-diagonal observable") {
        ComplexMatrix h = ComplexMatrix::Zero(2, 2);
        PropagationPlan plan(h, ComplexMatrix::Zero(2, 2), zero_pulse(4, 0.5));
        HermitianEigensystem standard{RealVector::Zero(2), ComplexMatrix::Identity(2, 2)};
        CHECK(heisenberg_diagonal_fraction(HermitianObservable(sigma_x()), plan, standard) <=
              1e-12);
    }

    TEST_CASE("strong driving destroys the diagonal structure") {
        ChainParams chain{3, 1.0, 0.37};
        HermitianObservable h0 = build_hamiltonian(chain, 0.0);
        HermitianObservable az = total_polarization(3);
        PropagationPlan weak = pulsed_plan(chain, 64, 28, 0.001);
        PropagationPlan strong = pulsed_plan(chain, 64, 28, 1.0);
        const double f_weak = heisenberg_diagonal_fraction(az, weak, h0.eigensystem());
        const double f_strong = heisenberg_diagonal_fraction(az, strong, h0.eigensystem());
        CHECK(f_strong < f_weak);
        CHECK(f_weak > 0.99);
    }
}
