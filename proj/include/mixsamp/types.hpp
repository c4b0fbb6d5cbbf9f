#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace mixsamp {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// A set of state vectors stored as the columns of a dense matrix.
using StateBatch = Eigen::MatrixXcd;

/// Uniform time grid t_n = n*dt. A propagation over the grid performs
/// n_steps unitary steps and ends at total_time() = n_steps*dt; field
/// samples live on the points t_0 .. t_{n_steps-1}.
struct TimeGrid {
    int n_steps = 1;
    double dt = 1.0;

    double time(int n) const { return n * dt; }
    double total_time() const { return n_steps * dt; }
    std::vector<double> times() const {
        std::vector<double> t(static_cast<std::size_t>(n_steps));
        for (int n = 0; n < n_steps; ++n) t[static_cast<std::size_t>(n)] = time(n);
        return t;
    }
};

}  // namespace mixsamp
