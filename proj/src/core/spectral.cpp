#include "core/spectral.hpp"

#include "core/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace berkson {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

void normalize_columns(Eigen::MatrixXd& m, double step) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= m.col(j).sum() * step;
}

} // namespace

void DiscreteModel::validate(double tol) const {
    const auto n = static_cast<Eigen::Index>(xstar_grid.size());
    if (n < 2) throw UsageError("discrete model: need at least 2 x* nodes");
    if (F_zxs.rows() != static_cast<Eigen::Index>(z_grid.size()) || F_zxs.cols() != n)
        throw UsageError("discrete model: F_zxs shape does not match the z and x* grids");
    if (F_xsx.rows() != n || F_xsx.cols() != static_cast<Eigen::Index>(x_grid.size()))
        throw UsageError("discrete model: F_xsx shape does not match the x* and x grids");
    if (f_y_xs.rows() != static_cast<Eigen::Index>(y_grid.size()) || f_y_xs.cols() != n)
        throw UsageError("discrete model: f_y_xs shape does not match the y and x* grids");
    if (!std::is_sorted(xstar_grid.begin(), xstar_grid.end()))
        throw UsageError("discrete model: x* grid must be ascending");
    auto check = [tol](const Eigen::MatrixXd& m, double step, const char* name) {
        if ((m.array() < 0.0).any()) throw UsageError(std::string("discrete model: negative entry in ") + name);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (std::abs(m.col(j).sum() * step - 1.0) > tol)
                throw UsageError(std::string("discrete model: column ") + std::to_string(j) + " of " + name +
                                 " does not have unit mass");
    };
    check(F_zxs, z_step, "F_zxs");
    check(F_xsx, xstar_step, "F_xsx");
    if ((f_y_xs.array() < 0.0).any()) throw UsageError("discrete model: negative entry in f_y_xs");
}

DiscreteModel gaussian_model(const GaussianModelSpec& spec) {
    if (spec.nodes < 2 || spec.y_nodes < 1) throw UsageError("spectral model: need >= 2 nodes and >= 1 y node");
    if (spec.nodes > 25) throw UsageError("spectral model: at most 25 nodes are supported");
    if (!(spec.half_width > 0.0) || !(spec.sigma_z > 0.0) || !(spec.sigma_y > 0.0) || spec.sigma_dx < 0.0)
        throw UsageError("spectral model: widths must be positive (sigma_dx may be 0)");

    const int n = spec.nodes;
    DiscreteModel m;
    m.xstar_grid = linspace(-spec.half_width, spec.half_width, n);
    m.xstar_step = m.xstar_grid[1] - m.xstar_grid[0];

    std::vector<double> hx(n), gx(n);
    for (int j = 0; j < n; ++j) {
        hx[j] = spec.h(m.xstar_grid[j]);
        gx[j] = spec.g(m.xstar_grid[j]);
    }
    const auto [hmin, hmax] = std::minmax_element(hx.begin(), hx.end());
    if (!(*hmax > *hmin)) throw UsageError("spectral model: h must not be constant on the grid");
    m.z_grid = linspace(*hmin, *hmax, n);
    m.z_step = m.z_grid[1] - m.z_grid[0];

    m.F_zxs.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = (m.z_grid[i] - hx[j]) / spec.sigma_z;
            m.F_zxs(i, j) = std::exp(-0.5 * u * u);
        }
    normalize_columns(m.F_zxs, m.z_step);

    m.F_xsx.resize(n, n);
    m.x_grid.resize(n);
    if (spec.sigma_dx == 0.0) {
        m.F_xsx = Eigen::MatrixXd::Identity(n, n) / m.xstar_step;
        m.x_grid = m.xstar_grid;
    } else {
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double u = (m.xstar_grid[j] - m.xstar_grid[k]) / spec.sigma_dx;
                m.F_xsx(j, k) = std::exp(-0.5 * u * u);
            }
        normalize_columns(m.F_xsx, m.xstar_step);
        for (int k = 0; k < n; ++k) {
            double mean = 0.0;
            for (int j = 0; j < n; ++j) mean += m.xstar_grid[j] * m.F_xsx(j, k);
            m.x_grid[k] = mean * m.xstar_step;
        }
    }

    const auto [gmin, gmax] = std::minmax_element(gx.begin(), gx.end());
    const double width = std::max(*gmax - *gmin, 1e-3);
    m.y_grid.resize(spec.y_nodes);
    m.f_y_xs.resize(spec.y_nodes, n);
    for (int l = 0; l < spec.y_nodes; ++l) {
        // Offset from the x* lattice so no y sits at a symmetry point.
        m.y_grid[l] = *gmin + (l + 0.37) * width / spec.y_nodes;
        for (int j = 0; j < n; ++j) {
            const double u = (m.y_grid[l] - gx[j]) / spec.sigma_y;
            m.f_y_xs(l, j) = kInvSqrt2Pi * std::exp(-0.5 * u * u) / spec.sigma_y;
        }
    }
    m.validate();
    return m;
}

ObservedOperators build_observed(const DiscreteModel& m, std::size_t y_index) {
    if (y_index >= m.y_grid.size()) throw UsageError("build_observed: y index out of range");
    ObservedOperators ops;
    const Eigen::VectorXd d = m.f_y_xs.row(static_cast<Eigen::Index>(y_index)).transpose();
    ops.A_y = m.F_zxs * d.asDiagonal() * m.F_xsx * m.xstar_step;
    ops.B = m.F_zxs * m.F_xsx * m.xstar_step;
    return ops;
}

OrderingResult centering_violation(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& perm,
                                   const std::vector<double>& xstar_grid, double xstar_step,
                                   const std::vector<double>& x_grid) {
    OrderingResult r;
    r.permutation = perm;
    r.column_error.resize(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index k = 0; k < rows.cols(); ++k) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            mean += xstar_grid[perm[static_cast<std::size_t>(i)]] * rows(i, k);
        const double e = mean * xstar_step - x_grid[static_cast<std::size_t>(k)];
        r.column_error[static_cast<std::size_t>(k)] = e;
        r.violation += e * e;
    }
    return r;
}

OrderingResult resolve_ordering(const Eigen::MatrixXd& rows, const std::vector<double>& xstar_grid,
                                double xstar_step, const std::vector<double>& x_grid, bool exhaustive) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (n != xstar_grid.size() || static_cast<std::size_t>(rows.cols()) != x_grid.size())
        throw UsageError("resolve_ordering: shape mismatch");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    if (exhaustive) {
        OrderingResult best = centering_violation(rows, perm, xstar_grid, xstar_step, x_grid);
        while (std::next_permutation(perm.begin(), perm.end())) {
            auto r = centering_violation(rows, perm, xstar_grid, xstar_step, x_grid);
            if (r.violation < best.violation) best = std::move(r);
        }
        return best;
    }

    // Centring is linear in the row locations: rows^T loc = x / step.
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(x_grid.size()));
    for (std::size_t k = 0; k < x_grid.size(); ++k) rhs(static_cast<Eigen::Index>(k)) = x_grid[k] / xstar_step;
    const Eigen::VectorXd loc = rows.transpose().fullPivLu().solve(rhs);
    std::vector<std::size_t> by_loc(n);
    std::iota(by_loc.begin(), by_loc.end(), std::size_t{0});
    std::stable_sort(by_loc.begin(), by_loc.end(), [&](std::size_t a, std::size_t b) {
        return loc(static_cast<Eigen::Index>(a)) < loc(static_cast<Eigen::Index>(b));
    });
    for (std::size_t r = 0; r < n; ++r) perm[by_loc[r]] = r;
    return centering_violation(rows, perm, xstar_grid, xstar_step, x_grid);
}

namespace {

struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // unit mass columns
    double max_imag = 0.0;
    double rel_gap = 0.0;
};

EigenPairs decompose(const Eigen::MatrixXd& M, double z_step) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
    if (es.info() != Eigen::Success) throw NumericalError("recover_latents: eigendecomposition failed");
    EigenPairs out;
    const auto n = M.rows();
    out.values = es.eigenvalues().real();
    out.vectors = es.eigenvectors().real();
    out.max_imag = es.eigenvalues().imag().cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double mass = out.vectors.col(j).sum() * z_step;
        if (!(std::abs(mass) > 1e-12 * out.vectors.col(j).cwiseAbs().sum() * z_step))
            throw NumericalError("recover_latents: eigenvector with zero mass");
        out.vectors.col(j) /= mass;
    }
    const double scale = out.values.cwiseAbs().maxCoeff();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) gap = std::min(gap, std::abs(out.values(a) - out.values(b)));
    out.rel_gap = scale > 0.0 ? gap / scale : 0.0;
    return out;
}

// match[i] = column of `cand` aligned with column i of `ref`.
std::vector<std::size_t> align(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& cand, std::size_t exhaustive_limit) {
    const auto n = static_cast<std::size_t>(ref.cols());
    Eigen::MatrixXd overlap(ref.cols(), cand.cols());
    for (Eigen::Index i = 0; i < ref.cols(); ++i)
        for (Eigen::Index j = 0; j < cand.cols(); ++j)
            overlap(i, j) = std::abs(ref.col(i).dot(cand.col(j))) / (ref.col(i).norm() * cand.col(j).norm());

    std::vector<std::size_t> match(n);
    if (n <= exhaustive_limit) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        double best = -1.0;
        do {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
            if (s > best) {
                best = s;
                match = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return match;
    }
    std::vector<char> used_r(n, 0), used_c(n, 0);
    for (std::size_t step = 0; step < n; ++step) {
        double best = -1.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used_r[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (used_c[j]) continue;
                const double o = overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (o > best) {
                    best = o;
                    bi = i;
                    bj = j;
                }
            }
        }
        used_r[bi] = used_c[bj] = 1;
        match[bi] = bj;
    }
    return match;
}

} // namespace

Recovery recover_latents(const std::vector<Eigen::MatrixXd>& A, const Eigen::MatrixXd& B,
                         const std::vector<double>& xstar_grid, double xstar_step,
                         const std::vector<double>& x_grid, double z_step, const SpectralOptions& opts) {
    if (A.empty()) throw UsageError("recover_latents: no A_y matrices");
    const auto n = B.rows();
    if (B.cols() != n || static_cast<std::size_t>(n) != xstar_grid.size() || static_cast<std::size_t>(n) != x_grid.size())
        throw UsageError("recover_latents: B must be square and match the grids");
    for (const auto& a : A)
        if (a.rows() != n || a.cols() != n) throw UsageError("recover_latents: A_y shape mismatch");

    Recovery rec;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const auto& sv = svd.singularValues();
    rec.min_singular_B = sv(n - 1);
    rec.condition_B = rec.min_singular_B > 0.0 ? sv(0) / rec.min_singular_B : std::numeric_limits<double>::infinity();
    if (!(rec.condition_B <= opts.max_condition)) {
        std::ostringstream os;
        os << "recover_latents: F_{Z|X} is numerically singular (condition " << rec.condition_B << ")";
        throw NumericalError(os.str());
    }

    // A_y B^{-1} via B^T X^T = A_y^T.
    const auto lu = B.transpose().fullPivLu();
    std::vector<EigenPairs> pairs;
    pairs.reserve(A.size());
    for (const auto& a : A) {
        const Eigen::MatrixXd M = lu.solve(a.transpose()).transpose();
        pairs.push_back(decompose(M, z_step));
        rec.max_imag = std::max(rec.max_imag, pairs.back().max_imag);
    }

    rec.reference_y = 0;
    for (std::size_t l = 1; l < pairs.size(); ++l)
        if (pairs[l].rel_gap > pairs[rec.reference_y].rel_gap) rec.reference_y = l;
    const auto& ref = pairs[rec.reference_y];
    if (!(ref.rel_gap > opts.degeneracy_tol))
        throw NumericalError("recover_latents: every y has (near-)repeated eigenvalues");

    const auto ny = static_cast<Eigen::Index>(A.size());
    Eigen::MatrixXd values(ny, n);
    rec.degenerate_y.assign(A.size(), false);
    const auto ref_inv = ref.vectors.fullPivLu();
    for (std::size_t l = 0; l < pairs.size(); ++l) {
        const auto row = static_cast<Eigen::Index>(l);
        if (pairs[l].rel_gap > opts.degeneracy_tol) {
            const auto match = align(ref.vectors, pairs[l].vectors, opts.exhaustive_limit);
            for (Eigen::Index i = 0; i < n; ++i) values(row, i) = pairs[l].values(static_cast<Eigen::Index>(match[static_cast<std::size_t>(i)]));
        } else {
            // Eigenvectors are not unique here; read the eigenvalues off the
            // reference basis instead.
            rec.degenerate_y[l] = true;
            const Eigen::MatrixXd M = lu.solve(A[l].transpose()).transpose();
            const Eigen::MatrixXd D = ref_inv.solve(M * ref.vectors);
            values.row(row) = D.diagonal().transpose();
        }
    }

    const Eigen::MatrixXd rows = ref_inv.solve(B) / xstar_step;
    const bool exhaustive = static_cast<std::size_t>(n) <= opts.exhaustive_limit;
    const auto order = resolve_ordering(rows, xstar_grid, xstar_step, x_grid, exhaustive);

    rec.permutation = order.permutation;
    rec.column_error = order.column_error;
    rec.centering_error = 0.0;
    for (double e : order.column_error) rec.centering_error = std::max(rec.centering_error, std::abs(e));
    if (!(rec.centering_error <= opts.centering_tol)) {
        std::ostringstream os;
        os << "recover_latents: no ordering centres the recovered kernel (max error " << rec.centering_error
           << "); column errors:";
        for (double e : order.column_error) os << ' ' << e;
        throw NumericalError(os.str());
    }

    rec.eigenvalues.resize(ny, n);
    rec.F_zxs.resize(n, n);
    rec.F_xsx.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto node = static_cast<Eigen::Index>(order.permutation[static_cast<std::size_t>(i)]);
        rec.eigenvalues.col(node) = values.col(i);
        rec.F_zxs.col(node) = ref.vectors.col(i);
        rec.F_xsx.row(node) = rows.row(i);
    }
    return rec;
}

double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
    const double denom = b.cwiseAbs().maxCoeff();
    return (a - b).cwiseAbs().maxCoeff() / (denom > 0.0 ? denom : 1.0);
}

} // namespace berkson
