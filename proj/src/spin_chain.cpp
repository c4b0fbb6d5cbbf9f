#include "mixsamp/spin_chain.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixsamp {

namespace {

ComplexMatrix pauli_matrix(PauliAxis axis) {
    ComplexMatrix s(2, 2);
    const Complex i(0.0, 1.0);
    switch (axis) {
        case PauliAxis::X: s << 0, 1, 1, 0; break;
        case PauliAxis::Y: s << 0, -i, i, 0; break;
        case PauliAxis::Z: s << 1, 0, 0, -1; break;
    }
    return s;
}

}  // namespace

HermitianObservable::HermitianObservable(ComplexMatrix m) : mat_(std::move(m)) {
    if (!is_hermitian(mat_))
        throw std::invalid_argument("HermitianObservable: matrix is not Hermitian");
}

void ChainParams::validate() const {
    if (n_spins < 2) throw std::invalid_argument("ChainParams: n_spins must be >= 2");
    if (n_spins > 20) throw std::invalid_argument("ChainParams: n_spins too large");
    if (!std::isfinite(coupling_j) || !std::isfinite(field_hz))
        throw std::invalid_argument("ChainParams: parameters must be finite");
}

PulseSpec PulseSpec::standard(double tau, int n_steps) {
    PulseSpec spec;
    spec.tau = tau;
    spec.t_center = 3.0 * tau;
    spec.n_steps = n_steps;
    spec.dt = 6.0 * tau / n_steps;
    return spec;
}

void PulseSpec::validate() const {
    if (n_steps < 2) throw std::invalid_argument("PulseSpec: n_steps must be >= 2");
    if (!(tau > 0)) throw std::invalid_argument("PulseSpec: tau must be positive");
    if (!(dt > 0)) throw std::invalid_argument("PulseSpec: dt must be positive");
    if (!(bandwidth_fraction > 0) || bandwidth_fraction > 1.0)
        throw std::invalid_argument("PulseSpec: bandwidth_fraction must be in (0, 1]");
    if (!std::isfinite(e_max) || e_max < 0)
        throw std::invalid_argument("PulseSpec: e_max must be finite and nonnegative");
}

double ObservableSpec::resolved_norm() const {
    return target_hs_norm > 0 ? target_hs_norm : std::sqrt(double(1 << n_spins));
}

void ObservableSpec::validate() const {
    if (n_spins < 1) throw std::invalid_argument("ObservableSpec: n_spins must be >= 1");
    if (n_spins > 20) throw std::invalid_argument("ObservableSpec: n_spins too large");
    if (target_hs_norm < 0)
        throw std::invalid_argument("ObservableSpec: target_hs_norm must be >= 0");
}

ComplexMatrix pauli_site(PauliAxis axis, int site, int n_spins) {
    if (n_spins < 1) throw std::invalid_argument("pauli_site: n_spins must be >= 1");
    if (site < 1 || site > n_spins)
        throw std::invalid_argument("pauli_site: site index out of range");
    ComplexMatrix op = ComplexMatrix::Identity(1, 1);
    for (int j = 1; j <= n_spins; ++j)
        op = kron(op, j == site ? pauli_matrix(axis) : ComplexMatrix::Identity(2, 2));
    return op;
}

namespace detail {

ComplexMatrix pauli_sum(int n_spins, const std::vector<PauliTerm>& terms) {
    const int dim = 1 << n_spins;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    const Complex i(0.0, 1.0);
    for (const PauliTerm& term : terms) {
        // Site s is the leftmost Kronecker factor for s = 1, hence bit n - s.
        for (int col = 0; col < dim; ++col) {
            int row = col;
            Complex factor = term.coefficient;
            for (const auto& [site, axis] : term.factors) {
                if (site < 1 || site > n_spins)
                    throw std::invalid_argument("pauli_sum: site index out of range");
                const int bit = n_spins - site;
                const bool down = (col >> bit) & 1;
                switch (axis) {
                    case PauliAxis::X: row ^= 1 << bit; break;
                    case PauliAxis::Y:
                        row ^= 1 << bit;
                        factor *= down ? -i : i;
                        break;
                    case PauliAxis::Z:
                        if (down) factor = -factor;
                        break;
                }
            }
            out(row, col) += factor;
        }
    }
    return out;
}

}  // namespace detail

ComplexMatrix drive_operator(int n_spins) {
    std::vector<PauliTerm> terms;
    for (int j = 1; j <= n_spins; ++j) terms.push_back({{{j, PauliAxis::X}}, 1.0});
    return detail::pauli_sum(n_spins, terms);
}

HermitianObservable build_hamiltonian(const ChainParams& params, double field) {
    params.validate();
    std::vector<PauliTerm> static_terms;
    for (int j = 1; j < params.n_spins; ++j)
        for (PauliAxis axis : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z})
            static_terms.push_back({{{j, axis}, {j + 1, axis}}, -params.coupling_j});
    for (int j = 1; j <= params.n_spins; ++j)
        static_terms.push_back({{{j, PauliAxis::Z}}, -params.field_hz});
    ComplexMatrix h = detail::pauli_sum(params.n_spins, static_terms);
    h += field * drive_operator(params.n_spins);
    return HermitianObservable(std::move(h));
}

HermitianObservable total_polarization(int n_spins) {
    if (n_spins < 1) throw std::invalid_argument("total_polarization: n_spins must be >= 1");
    std::vector<PauliTerm> terms;
    for (int j = 1; j <= n_spins; ++j) terms.push_back({{{j, PauliAxis::Z}}, 1.0});
    return HermitianObservable(detail::pauli_sum(n_spins, terms));
}

PulseSeries sample_pulse(const PulseSpec& spec, Rng& rng,
                         const std::vector<Complex>* amplitude_override) {
    spec.validate();
    const int n = spec.n_steps;
    const TimeGrid grid{n, spec.dt};

    PulseSeries series;
    series.grid = grid;
    series.values.assign(static_cast<std::size_t>(n), 0.0);
    if (spec.e_max == 0.0) return series;  // zero-amplitude pulse

    const int n_modes = std::min(
        n, static_cast<int>(std::ceil(spec.bandwidth_fraction * static_cast<double>(n))));
    const double period = n * spec.dt;
    const double envelope_floor =
        std::exp(-spec.t_center * spec.t_center / (2.0 * spec.tau * spec.tau));

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Complex> amps(static_cast<std::size_t>(n_modes));
        if (amplitude_override) {
            if (static_cast<int>(amplitude_override->size()) != n_modes)
                throw std::invalid_argument("sample_pulse: amplitude override size mismatch");
            amps = *amplitude_override;
        } else {
            for (Complex& a : amps) a = rng.complex_normal();
        }

        double peak = 0.0;
        for (int idx = 0; idx < n; ++idx) {
            const double t = grid.time(idx);
            const double shifted = t - spec.t_center;
            // Truncated Gaussian envelope: exactly zero at t = 0 (and, by
            // symmetry of the grid, at t = total_time()).
            const double envelope = std::max(
                std::exp(-shifted * shifted / (2.0 * spec.tau * spec.tau)) - envelope_floor,
                0.0);
            Complex sum(0.0, 0.0);
            const double theta = -2.0 * std::numbers::pi * shifted / period;
            for (int j = 0; j < n_modes; ++j) sum += amps[static_cast<std::size_t>(j)] *
                                                     std::polar(1.0, theta * j);
            const double value = envelope * sum.real();
            series.values[static_cast<std::size_t>(idx)] = value;
            peak = std::max(peak, std::abs(value));
        }

        if (peak > 0.0) {
            const double scale = spec.e_max / peak;
            for (double& v : series.values) v *= scale;
            return series;
        }
        if (amplitude_override)
            throw std::runtime_error("sample_pulse: override amplitudes produce a zero field");
        // All drawn amplitudes vanished (probability zero); draw again.
    }
    throw std::runtime_error("sample_pulse: failed to draw a nonzero field");
}

PulseSeries sample_pulse(const PulseSpec& spec) {
    Rng rng(spec.seed);
    return sample_pulse(spec, rng);
}

HermitianObservable random_observable(const ObservableSpec& spec, Rng& rng) {
    spec.validate();
    const double target = spec.resolved_norm();
    const int n = spec.n_spins;
    constexpr PauliAxis kAxes[] = {PauliAxis::X, PauliAxis::Y, PauliAxis::Z};

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<PauliTerm> terms;
        for (int j = 1; j <= n; ++j)
            for (PauliAxis a : kAxes) terms.push_back({{{j, a}}, rng.normal()});
        for (int j = 1; j <= n; ++j)
            for (int k = j + 1; k <= n; ++k)
                for (PauliAxis a : kAxes)
                    for (PauliAxis b : kAxes)
                        terms.push_back({{{j, a}, {k, b}}, rng.normal()});

        ComplexMatrix m = detail::pauli_sum(n, terms);
        const double norm = m.norm();
        if (norm == 0.0) continue;  // degenerate all-zero draw
        m *= target / norm;
        HermitianObservable obs(std::move(m));
        if (!spec.traceless) obs = add_identity_offset(obs, rng);
        return obs;
    }
    throw std::runtime_error("random_observable: failed to draw a nonzero observable");
}

HermitianObservable random_observable(const ObservableSpec& spec) {
    Rng rng(spec.seed);
    return random_observable(spec, rng);
}

HermitianObservable add_identity_offset(const HermitianObservable& a, Rng& rng) {
    const int dim = a.dim();
    const double lambda = rng.sign() * a.norm() / static_cast<double>(dim);
    return HermitianObservable(a.matrix() +
                               lambda * ComplexMatrix::Identity(dim, dim));
}

}  // namespace mixsamp
