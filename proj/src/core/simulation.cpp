#include "core/simulation.hpp"

#include "core/error.hpp"
#include "core/format.hpp"
#include "core/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace berkson {

namespace {

// Splits "name(a,b,...)" into name and numeric arguments.
std::pair<std::string, std::vector<double>> parse_call(std::string_view s, const char* what) {
    s = trim(s);
    const auto open = s.find('(');
    if (open == std::string_view::npos) return {std::string(s), {}};
    if (s.back() != ')') throw UsageError(std::string(what) + ": missing ')' in '" + std::string(s) + "'");
    std::vector<double> args;
    const auto inner = s.substr(open + 1, s.size() - open - 2);
    if (!trim(inner).empty()) {
        for (auto tok : split(inner, ',')) {
            double v = 0.0;
            if (!parse_double(tok, v))
                throw UsageError(std::string(what) + ": bad number '" + std::string(tok) + "'");
            args.push_back(v);
        }
    }
    return {std::string(trim(s.substr(0, open))), args};
}

std::string join_args(std::string_view name, std::initializer_list<double> args) {
    std::string out(name);
    out += '(';
    bool first = true;
    for (double a : args) {
        if (!first) out += ',';
        out += format_double(a);
        first = false;
    }
    return out + ')';
}

} // namespace

Distribution Distribution::parse(std::string_view s) {
    const auto [name, args] = parse_call(s, "distribution");
    auto need = [&](std::size_t k) {
        if (args.size() != k)
            throw UsageError("distribution '" + name + "' takes " + std::to_string(k) + " argument(s)");
    };
    if (name == "uniform") {
        need(2);
        return uniform(args[0], args[1]);
    }
    if (name == "t") {
        need(2);
        return scaled_t(args[0], args[1]);
    }
    if (name == "logistic") {
        need(1);
        return scaled_logistic(args[0]);
    }
    if (name == "gaussian" || name == "normal") {
        need(1);
        return gaussian(args[0]);
    }
    throw UsageError("unknown distribution '" + name + "' (expected uniform, t, logistic, gaussian)");
}

std::string Distribution::to_string() const {
    switch (kind) {
    case Kind::uniform: return join_args("uniform", {a, b});
    case Kind::scaled_t: return join_args("t", {a, scale});
    case Kind::scaled_logistic: return join_args("logistic", {scale});
    case Kind::gaussian: return join_args("gaussian", {scale});
    }
    return {};
}

void Distribution::validate(const char* name) const {
    const std::string n(name);
    if (kind == Kind::uniform) {
        if (!(std::isfinite(a) && std::isfinite(b) && a < b)) throw UsageError(n + ": uniform needs a < b");
        return;
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) throw UsageError(n + ": scale must be positive");
    if (kind == Kind::scaled_t && !(a > 2.0)) throw UsageError(n + ": t degrees of freedom must exceed 2");
}

double Distribution::sample(RandomStream& rng) const {
    switch (kind) {
    case Kind::uniform: return a + (b - a) * rng.uniform();
    case Kind::gaussian: return scale * rng.normal();
    case Kind::scaled_logistic: {
        const double u = rng.uniform();
        return scale * std::log(u / (1.0 - u));
    }
    case Kind::scaled_t: {
        const double n = rng.normal();
        const double chi2 = 2.0 * rng.gamma(0.5 * a);
        return scale * n / std::sqrt(chi2 / a);
    }
    }
    return 0.0;
}

RegressionFunction RegressionFunction::parse(std::string_view s) {
    const auto [name, args] = parse_call(s, "regression function");
    if (name == "abs_quadratic" && args.empty()) return {Kind::abs_quadratic, {}};
    if (name == "softplus2x" && args.empty()) return {Kind::softplus2x, {}};
    if (name == "identity" && args.empty()) return {Kind::identity, {}};
    if (name == "poly" && !args.empty()) return {Kind::polynomial, args};
    throw UsageError("unknown regression function '" + std::string(s) +
                     "' (expected abs_quadratic, softplus2x, identity, poly(c0,c1,...))");
}

std::string RegressionFunction::to_string() const {
    switch (kind) {
    case Kind::abs_quadratic: return "abs_quadratic";
    case Kind::softplus2x: return "softplus2x";
    case Kind::identity: return "identity";
    case Kind::polynomial: {
        std::string out = "poly(";
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (i) out += ',';
            out += format_double(coeffs[i]);
        }
        return out + ')';
    }
    }
    return {};
}

double RegressionFunction::operator()(double x) const {
    switch (kind) {
    case Kind::abs_quadratic: return std::abs(x) * x;
    case Kind::softplus2x: {
        const double t = 2.0 * x;
        return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    }
    case Kind::identity: return x;
    case Kind::polynomial: return eval_poly(coeffs, x);
    }
    return 0.0;
}

Scenario Scenario::paper_design() { return Scenario{}; }

Scenario Scenario::identity_gaussian() {
    Scenario sc;
    // unit-variance covariate, on the same scale as the errors
    sc.x = Distribution::uniform(-std::sqrt(3.0), std::sqrt(3.0));
    sc.dx = Distribution::gaussian(1.0);
    sc.dy = Distribution::gaussian(1.0);
    sc.dz = Distribution::gaussian(1.0);
    sc.g = {RegressionFunction::Kind::identity, {}};
    sc.h = {RegressionFunction::Kind::identity, {}};
    return sc;
}

Scenario Scenario::quadratic_gaussian() {
    Scenario sc;
    sc.x = Distribution::uniform(-1.0, 1.0);
    sc.dx = Distribution::gaussian(0.25);
    sc.dy = Distribution::gaussian(0.25);
    sc.dz = Distribution::gaussian(0.25);
    sc.g = {RegressionFunction::Kind::polynomial, {0.0, 0.0, 1.0}};
    sc.h = {RegressionFunction::Kind::identity, {}};
    return sc;
}

Scenario Scenario::preset(std::string_view name) {
    if (name == "paper") return paper_design();
    if (name == "identity_gaussian") return identity_gaussian();
    if (name == "quadratic_gaussian") return quadratic_gaussian();
    throw UsageError("unknown scenario preset '" + std::string(name) +
                     "' (expected paper, identity_gaussian, quadratic_gaussian)");
}

void Scenario::validate() const {
    x.validate("scenario.x");
    dx.validate("scenario.dx");
    dy.validate("scenario.dy");
    dz.validate("scenario.dz");
    if (n < 1) throw UsageError("scenario.n must be >= 1");
}

SimulatedSample generate_detailed(const Scenario& sc) {
    sc.validate();
    RandomStream sx(sc.seed, static_cast<std::uint64_t>(SimStream::x));
    RandomStream sdx(sc.seed, static_cast<std::uint64_t>(SimStream::dx));
    RandomStream sdy(sc.seed, static_cast<std::uint64_t>(SimStream::dy));
    RandomStream sdz(sc.seed, static_cast<std::uint64_t>(SimStream::dz));

    SimulatedSample out;
    out.data.rows.resize(sc.n);
    out.xstar.resize(sc.n);
    out.dx.resize(sc.n);
    out.dy.resize(sc.n);
    out.dz.resize(sc.n);
    for (std::size_t i = 0; i < sc.n; ++i) {
        const double x = sc.x.sample(sx);
        out.dx[i] = sc.dx.sample(sdx);
        out.dy[i] = sc.dy.sample(sdy);
        out.dz[i] = sc.dz.sample(sdz);
        const double xs = x + out.dx[i];
        out.xstar[i] = xs;
        out.data.rows[i] = {x, sc.g(xs) + out.dy[i], sc.h(xs) + out.dz[i]};
    }
    return out;
}

Dataset generate(const Scenario& sc) { return generate_detailed(sc).data; }

Band pointwise_band(const std::vector<std::vector<double>>& curves, std::size_t points) {
    Band band;
    band.q05.assign(points, std::nan(""));
    band.q50 = band.q95 = band.q05;
    std::vector<double> col;
    for (std::size_t j = 0; j < points; ++j) {
        col.clear();
        for (const auto& c : curves)
            if (!c.empty()) col.push_back(c.at(j));
        if (col.empty()) continue;
        std::sort(col.begin(), col.end());
        auto q = [&](double p) {
            const double h = p * static_cast<double>(col.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const auto hi = std::min(lo + 1, col.size() - 1);
            return col[lo] + (h - static_cast<double>(lo)) * (col[hi] - col[lo]);
        };
        band.q05[j] = q(0.05);
        band.q50[j] = q(0.50);
        band.q95[j] = q(0.95);
    }
    return band;
}

std::size_t ReplicationReport::successes() const {
    return static_cast<std::size_t>(std::count(failures.begin(), failures.end(), std::string{}));
}

std::size_t ReplicationReport::converged_count() const {
    return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), true));
}

std::vector<double> default_eval_points() {
    std::vector<double> pts(41);
    for (int i = 0; i < 41; ++i) pts[i] = -1.5 + 0.075 * i;
    return pts;
}

ReplicationReport replicate(const Scenario& sc, int R, const SieveOrders& orders, const QuadratureGrid& grid,
                            const SimplexOptions& simplex, const EstimatorOptions& opts,
                            std::span<const double> eval_points, int threads) {
    if (R < 1) throw UsageError("replicate: need at least one replication");
    if (eval_points.empty()) throw UsageError("replicate: no evaluation points");
    sc.validate();
    orders.validate();
    simplex.validate();

    ReplicationReport rep;
    const auto rcount = static_cast<std::size_t>(R);
    rep.eval_points.assign(eval_points.begin(), eval_points.end());
    for (double x : eval_points) {
        rep.true_g.push_back(sc.g(x));
        rep.true_h.push_back(sc.h(x));
    }
    rep.robust_g.resize(rcount);
    rep.robust_h.resize(rcount);
    rep.naive_g.resize(rcount);
    rep.naive_h.resize(rcount);
    rep.seeds.resize(rcount);
    rep.converged.assign(rcount, false);
    rep.failures.assign(rcount, std::string{});
    std::vector<char> conv(rcount, 0);

    parallel_for(rcount, threads, [&](std::size_t r) {
        Scenario s = sc;
        s.seed = sc.seed + r;
        rep.seeds[r] = s.seed;
        try {
            const Dataset d = generate(s);
            const auto naive = naive_fit(d, orders.k_g, orders.k_h);
            const FitResult f = fit(d, orders, grid, simplex, opts);
            auto& rg = rep.robust_g[r];
            auto& rh = rep.robust_h[r];
            auto& ng = rep.naive_g[r];
            auto& nh = rep.naive_h[r];
            for (double x : eval_points) {
                rg.push_back(f.params.g(x));
                rh.push_back(f.params.h(x));
                ng.push_back(eval_poly(naive.beta_g, x));
                nh.push_back(eval_poly(naive.beta_h, x));
            }
            conv[r] = f.converged ? 1 : 0;
        } catch (const std::exception& e) {
            rep.failures[r] = e.what();
            rep.robust_g[r].clear();
            rep.robust_h[r].clear();
            rep.naive_g[r].clear();
            rep.naive_h[r].clear();
        }
    });
    for (std::size_t r = 0; r < rcount; ++r) rep.converged[r] = conv[r] != 0;

    if (2 * rep.successes() < rcount)
        throw NumericalError("replicate: only " + std::to_string(rep.successes()) + " of " +
                             std::to_string(rcount) + " replications produced a fit");

    const std::size_t m = eval_points.size();
    rep.robust_g_band = pointwise_band(rep.robust_g, m);
    rep.robust_h_band = pointwise_band(rep.robust_h, m);
    rep.naive_g_band = pointwise_band(rep.naive_g, m);
    rep.naive_h_band = pointwise_band(rep.naive_h, m);
    return rep;
}

} // namespace berkson
