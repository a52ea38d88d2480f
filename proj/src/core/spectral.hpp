#pragma once

// Discretized check of the operator identity
//   F_{y;Z|X} F_{Z|X}^{-1} = F_{Z|X*} D_{y;X*} F_{Z|X*}^{-1}:
// from the observable operators alone, the eigenvalues recover f(y | x*), the
// eigenvectors recover f(z | x*), and the Berkson kernel f(x* | x) follows
// from F_{Z|X*}^{-1} F_{Z|X}. Eigenvalue labels are fixed by requiring each
// recovered column of f(x* | x) to be centred at its x.

#include "core/simulation.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace berkson {

struct DiscreteModel {
    std::vector<double> x_grid, xstar_grid, z_grid, y_grid;
    double xstar_step = 1.0;
    double z_step = 1.0;
    Eigen::MatrixXd F_zxs;  // f(z_i | x*_j), columns sum * z_step to 1
    Eigen::MatrixXd F_xsx;  // f(x*_j | x_k), columns sum * xstar_step to 1
    Eigen::MatrixXd f_y_xs; // f(y_l | x*_j)

    /// Throws UsageError on shape mismatch, negative entries or columns that
    /// are not unit-mass within tol.
    void validate(double tol = 1e-10) const;
};

struct GaussianModelSpec {
    int nodes = 15;
    int y_nodes = 9;
    double half_width = 2.1;
    double sigma_dx = 0.15;  // 0 gives the degenerate identity kernel
    double sigma_z = 0.15;
    double sigma_y = 1.5;
    RegressionFunction g{RegressionFunction::Kind::identity, {}};
    RegressionFunction h{RegressionFunction::Kind::identity, {}};
};

/// Gaussian kernels on equally spaced grids. The x grid is set to the
/// discrete column means of the Berkson kernel so each column is exactly
/// centred.
DiscreteModel gaussian_model(const GaussianModelSpec& spec);

struct ObservedOperators {
    Eigen::MatrixXd A_y;  // F_{y;Z|X}
    Eigen::MatrixXd B;    // F_{Z|X}
};

/// A_y = F_zxs diag(f(y_l | .)) F_xsx * xstar_step, B = F_zxs F_xsx * xstar_step.
ObservedOperators build_observed(const DiscreteModel& m, std::size_t y_index);

struct OrderingResult {
    std::vector<std::size_t> permutation;  // row i of the input belongs to x* node permutation[i]
    double violation = 0.0;                // sum over columns of squared centring error
    std::vector<double> column_error;      // signed centring error per x column
};

/// Centring error of rows labelled by `perm`.
OrderingResult centering_violation(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& perm,
                                   const std::vector<double>& xstar_grid, double xstar_step,
                                   const std::vector<double>& x_grid);

/// Finds the labelling of the rows of a recovered f(x* | x) (rows in unknown
/// x* order) that minimizes the centring violation. Exhaustive over all
/// permutations when `exhaustive`, otherwise solves the linear centring
/// equations for the row locations and assigns nodes by rank.
OrderingResult resolve_ordering(const Eigen::MatrixXd& rows, const std::vector<double>& xstar_grid,
                                double xstar_step, const std::vector<double>& x_grid, bool exhaustive);

struct SpectralOptions {
    double max_condition = 1e10;
    double degeneracy_tol = 1e-8;       // relative eigenvalue gap below which a y is flagged
    double centering_tol = 1e-6;        // max |column mean - x| accepted
    std::size_t exhaustive_limit = 8;   // exhaustive ordering/alignment up to this many nodes
};

struct Recovery {
    Eigen::MatrixXd eigenvalues;   // rows y, cols x*: recovered f(y | x*)
    Eigen::MatrixXd F_zxs;         // recovered eigenfunctions, unit mass
    Eigen::MatrixXd F_xsx;         // recovered Berkson kernel
    std::vector<std::size_t> permutation;
    std::vector<double> column_error;
    std::vector<bool> degenerate_y;
    std::size_t reference_y = 0;
    double condition_B = 0.0;
    double min_singular_B = 0.0;
    double max_imag = 0.0;
    double centering_error = 0.0;  // max |column_error|
};

/// Throws NumericalError when B is numerically singular or no labelling
/// centres the recovered kernel within options.centering_tol.
Recovery recover_latents(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& B,
                         const std::vector<double>& xstar_grid, double xstar_step,
                         const std::vector<double>& x_grid, double z_step, const SpectralOptions& opts = {});

/// max |a - b| / max |b| over all entries.
double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace berkson
