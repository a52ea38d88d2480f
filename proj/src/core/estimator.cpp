#include "core/estimator.hpp"

#include "core/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace berkson {

void SieveOrders::validate() const {
    if (k_dx < 1 || k_dy < 1 || k_dz < 1 || k_g < 1 || k_h < 1)
        throw UsageError("sieve orders must all be >= 1, got " + to_string());
    if (k_dx > 30 || k_dy > 30 || k_dz > 30 || k_g > 30 || k_h > 30)
        throw UsageError("sieve orders above 30 are not supported, got " + to_string());
}

std::string SieveOrders::to_string() const {
    std::ostringstream os;
    os << k_dx << ',' << k_dy << ',' << k_dz << ',' << k_g << ',' << k_h;
    return os.str();
}

SieveOrders SieveOrders::parse(std::string_view s) {
    std::vector<int> v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto tok = std::string(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
        std::size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size())
            throw UsageError("orders: cannot parse '" + std::string(s) + "' (expected kdx,kdy,kdz,kg,kh)");
        v.push_back(k);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (v.size() != 5) throw UsageError("orders: expected 5 comma-separated counts, got '" + std::string(s) + "'");
    SieveOrders o{v[0], v[1], v[2], v[3], v[4]};
    o.validate();
    return o;
}

std::vector<double> poly_least_squares(std::span<const double> x, std::span<const double> target,
                                       int terms, const char* label) {
    if (terms < 1) throw UsageError(std::string(label) + ": need at least one term");
    if (x.size() <= static_cast<std::size_t>(terms))
        throw UsageError(std::string(label) + ": need more observations than the " +
                         std::to_string(terms) + " polynomial terms");
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(terms, terms);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(terms);
    std::vector<double> powers(2 * terms - 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = 1.0;
        for (auto& pw : powers) {
            pw = p;
            p *= x[i];
        }
        for (int a = 0; a < terms; ++a) {
            xty(a) += powers[a] * target[i];
            for (int b = 0; b < terms; ++b) xtx(a, b) += powers[a + b];
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
    qr.setThreshold(1e-12);
    if (qr.rank() < terms)
        throw NumericalError(std::string(label) + ": rank-deficient design with " + std::to_string(terms) +
                             " polynomial terms (rank " + std::to_string(qr.rank()) + ")");
    const Eigen::VectorXd beta = qr.solve(xty);
    return {beta.data(), beta.data() + terms};
}

NaiveFit naive_fit(const Dataset& d, int terms_g, int terms_h) {
    validate(d);
    std::vector<double> x(d.size()), y(d.size()), z(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        x[i] = d.rows[i].x;
        y[i] = d.rows[i].y;
        z[i] = d.rows[i].z;
    }
    NaiveFit out;
    out.beta_g = poly_least_squares(x, y, terms_g, "naive g");
    out.beta_h = poly_least_squares(x, z, terms_h, "naive h");
    double sy = 0.0, sz = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double ry = y[i] - eval_poly(out.beta_g, x[i]);
        const double rz = z[i] - eval_poly(out.beta_h, x[i]);
        sy += ry * ry;
        sz += rz * rz;
    }
    out.resid_var_y = sy / static_cast<double>(d.size());
    out.resid_var_z = sz / static_cast<double>(d.size());
    return out;
}

ModelParams initialize(const Dataset& d, const SieveOrders& orders, const EstimatorOptions& opts) {
    orders.validate();
    const auto naive = naive_fit(d, orders.k_g, orders.k_h);
    const auto& b = opts.bounds;
    auto clamp_scale = [&](double s) { return std::clamp(s, b.scale_min, b.scale_max); };
    auto clamp_coeffs = [&](std::vector<double> c) {
        for (auto& v : c) v = std::clamp(v, -b.coeff_bound, b.coeff_bound);
        return c;
    };

    double mean = 0.0;
    for (const auto& r : d.rows) mean += r.x;
    mean /= static_cast<double>(d.size());
    double ss = 0.0;
    for (const auto& r : d.rows) ss += (r.x - mean) * (r.x - mean);
    const double sd_x = std::sqrt(ss / static_cast<double>(d.size() - 1));

    auto gaussian = [&](double scale, int k) {
        const std::vector<double> tail(k, 0.0);
        return make_density(clamp_scale(scale), SieveOrders::density_terms(k), tail, opts.centering,
                            opts.baseline);
    };

    ModelParams p;
    p.g.coeffs = clamp_coeffs(naive.beta_g);
    p.h.coeffs = clamp_coeffs(naive.beta_h);
    p.dx = gaussian(opts.init_dx_fraction * sd_x, orders.k_dx);
    p.dy = gaussian(std::sqrt(naive.resid_var_y) * opts.init_split, orders.k_dy);
    p.dz = gaussian(std::sqrt(naive.resid_var_z) * opts.init_split, orders.k_dz);
    return p;
}

SieveOrders pilot_orders(const SieveOrders& o) {
    return {1, 1, 1, std::min(o.k_g, 3), std::min(o.k_h, 3)};
}

std::vector<SieveOrders> warm_start_path(const SieveOrders& orders) {
    orders.validate();
    std::vector<SieveOrders> path;
    for (SieveOrders o = pilot_orders(orders); o != orders;) {
        path.push_back(o);
        for (auto [k, target] : {std::pair{&o.k_dx, orders.k_dx}, {&o.k_dy, orders.k_dy}, {&o.k_dz, orders.k_dz},
                                 {&o.k_g, orders.k_g}, {&o.k_h, orders.k_h}})
            *k = std::min(*k + 1, target);
    }
    return path;
}

ModelParams extend(const ModelParams& p, const SieveOrders& orders, const EstimatorOptions& opts) {
    orders.validate();
    auto poly = [](const PolySieve& s, int k, const char* name) {
        if (static_cast<int>(s.coeffs.size()) > k)
            throw UsageError(std::string("extend: ") + name + " has more terms than the target orders");
        PolySieve out = s;
        out.coeffs.resize(static_cast<std::size_t>(k), 0.0);
        return out;
    };
    auto density = [&](const DensitySieve& d, int k, const char* name) {
        const int K = SieveOrders::density_terms(k);
        if (static_cast<int>(d.terms()) > K)
            throw UsageError(std::string("extend: ") + name + " has more terms than the target orders");
        std::vector<double> tail(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 2; j < d.coeffs.size(); ++j) tail[j - 2] = d.coeffs[j];
        return make_density(d.scale, K, tail, opts.centering, opts.baseline);
    };
    ModelParams q;
    q.g = poly(p.g, orders.k_g, "g");
    q.h = poly(p.h, orders.k_h, "h");
    q.dx = density(p.dx, orders.k_dx, "f_dx");
    q.dy = density(p.dy, orders.k_dy, "f_dy");
    q.dz = density(p.dz, orders.k_dz, "f_dz");
    return q;
}

namespace {

void pack_density(const DensitySieve& d, int k, std::vector<double>& out) {
    out.push_back(std::log(d.scale));
    const auto std_coeffs = d.standardized_coeffs();
    for (int j = 0; j < k; ++j) out.push_back(std_coeffs.at(2 + j));
}

std::optional<DensitySieve> unpack_density(std::span<const double>& v, int k, const EstimatorOptions& opts) {
    const double scale = std::exp(v[0]);
    if (!(scale >= opts.bounds.scale_min && scale <= opts.bounds.scale_max)) return std::nullopt;
    std::vector<double> tail(k);
    double p = scale * scale;
    for (int j = 0; j < k; ++j) {
        tail[j] = v[1 + j] / p;
        p *= scale;
    }
    v = v.subspan(1 + k);
    auto d = make_density(scale, SieveOrders::density_terms(k), tail, opts.centering, opts.baseline);
    if (!within_bounds(d, opts.bounds)) return std::nullopt;
    return d;
}

} // namespace

std::vector<double> pack(const ModelParams& p, const SieveOrders& orders) {
    if (p.g.terms() != static_cast<std::size_t>(orders.k_g) || p.h.terms() != static_cast<std::size_t>(orders.k_h) ||
        p.dx.terms() != static_cast<std::size_t>(SieveOrders::density_terms(orders.k_dx)) ||
        p.dy.terms() != static_cast<std::size_t>(SieveOrders::density_terms(orders.k_dy)) ||
        p.dz.terms() != static_cast<std::size_t>(SieveOrders::density_terms(orders.k_dz)))
        throw UsageError("pack: parameter sizes do not match orders " + orders.to_string());
    std::vector<double> out;
    out.reserve(orders.parameter_count());
    out.insert(out.end(), p.g.coeffs.begin(), p.g.coeffs.end());
    out.insert(out.end(), p.h.coeffs.begin(), p.h.coeffs.end());
    pack_density(p.dx, orders.k_dx, out);
    pack_density(p.dy, orders.k_dy, out);
    pack_density(p.dz, orders.k_dz, out);
    return out;
}

std::optional<ModelParams> unpack(std::span<const double> v, const SieveOrders& orders,
                                  const EstimatorOptions& opts) {
    if (v.size() != static_cast<std::size_t>(orders.parameter_count()))
        throw UsageError("unpack: vector length does not match orders " + orders.to_string());
    ModelParams p;
    p.g.coeffs.assign(v.begin(), v.begin() + orders.k_g);
    v = v.subspan(orders.k_g);
    p.h.coeffs.assign(v.begin(), v.begin() + orders.k_h);
    v = v.subspan(orders.k_h);
    if (!within_bounds(p.g, opts.bounds) || !within_bounds(p.h, opts.bounds)) return std::nullopt;
    auto dx = unpack_density(v, orders.k_dx, opts);
    if (!dx) return std::nullopt;
    auto dy = unpack_density(v, orders.k_dy, opts);
    if (!dy) return std::nullopt;
    auto dz = unpack_density(v, orders.k_dz, opts);
    if (!dz) return std::nullopt;
    p.dx = std::move(*dx);
    p.dy = std::move(*dy);
    p.dz = std::move(*dz);
    return p;
}

Curves evaluate_curves(const ModelParams& p, std::span<const double> points) {
    Curves c;
    c.x.assign(points.begin(), points.end());
    for (double x : points) {
        c.g.push_back(p.g(x));
        c.h.push_back(p.h(x));
    }
    return c;
}

DensityTraces evaluate_densities(const ModelParams& p, std::span<const double> points) {
    DensityTraces t;
    t.v.assign(points.begin(), points.end());
    for (double v : points) {
        t.dx.push_back(p.dx(v));
        t.dy.push_back(p.dy(v));
        t.dz.push_back(p.dz(v));
    }
    return t;
}

namespace {

// Runs the simplex from `start`, inflating the error scales first if the
// start is infeasible.
void optimize_from(const Dataset& d, ModelParams start, const SimplexOptions& simplex,
                   const EstimatorOptions& opts, FitResult& res) {
    const auto& orders = res.orders;
    const auto& grid = res.grid;
    auto start_ll = log_likelihood(start, d, grid);
    while (!start_ll && res.inflations < 5) {
        ++res.inflations;
        for (DensitySieve* ds : {&start.dx, &start.dy, &start.dz}) {
            const int K = static_cast<int>(ds->terms());
            const std::vector<double> tail(std::max(K - 2, 0), 0.0);
            *ds = make_density(std::min(2.0 * ds->scale, opts.bounds.scale_max), K, tail,
                               opts.centering, opts.baseline);
        }
        start_ll = log_likelihood(start, d, grid);
    }
    if (!start_ll)
        throw NumericalError("fit: no feasible starting point after inflating the error scales 5 times");

    const Objective objective = [&](std::span<const double> v) -> std::optional<double> {
        const auto p = unpack(v, orders, opts);
        if (!p) return std::nullopt;
        const auto ll = log_likelihood(*p, d, grid);
        if (!ll) return std::nullopt;
        return -*ll;
    };

    const auto x0 = pack(start, orders);
    const auto f0 = objective(x0);
    if (!f0) throw NumericalError("fit: starting point violates the coefficient bounds");
    res.initial_loglik = -*f0;

    const auto opt = minimize(objective, x0, simplex);
    auto best = unpack(opt.x, orders, opts);
    if (!best) throw NumericalError("fit: optimizer returned an infeasible point");
    const auto ll = log_likelihood(*best, d, grid);
    if (!ll) throw NumericalError("fit: optimizer returned an infeasible point");

    res.params = std::move(*best);
    res.loglik = *ll;
    res.converged = opt.converged;
    res.iterations += opt.iters;
    res.evaluations += opt.evaluations;
}

} // namespace

FitResult fit(const Dataset& d, const SieveOrders& orders, const QuadratureGrid& grid,
              const SimplexOptions& simplex, const EstimatorOptions& opts) {
    validate(d);
    orders.validate();
    simplex.validate();

    FitResult res;
    res.orders = orders;
    res.grid = grid;

    ModelParams start;
    if (opts.warm_start) res.warm_path = warm_start_path(orders);
    if (res.warm_path.empty()) {
        start = initialize(d, orders, opts);
    } else {
        FitResult stage;
        stage.grid = grid;
        ModelParams stage_start = initialize(d, res.warm_path.front(), opts);
        for (const auto& o : res.warm_path) {
            stage.orders = o;
            optimize_from(d, stage.params.g.coeffs.empty() ? stage_start : extend(stage.params, o, opts), simplex,
                          opts, stage);
        }
        start = extend(stage.params, orders, opts);
        res.warm_loglik = stage.loglik;
        res.iterations = stage.iterations;
        res.evaluations = stage.evaluations;
        res.inflations = stage.inflations;
    }
    optimize_from(d, start, simplex, opts, res);
    res.curves = evaluate_curves(res.params, grid.nodes());

    const double s = std::max({res.params.dx.scale, res.params.dy.scale, res.params.dz.scale});
    std::vector<double> v(161);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -4.0 * s + 8.0 * s * static_cast<double>(i) / 160.0;
    res.density_traces = evaluate_densities(res.params, v);
    return res;
}

} // namespace berkson
