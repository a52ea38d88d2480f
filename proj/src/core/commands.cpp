#include "core/commands.hpp"

#include "core/error.hpp"
#include "core/io.hpp"

#include <filesystem>

namespace berkson {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path prepare_dir(const std::string& out_dir) {
    if (out_dir.empty()) throw UsageError("no output directory given");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw UsageError("cannot create output directory '" + out_dir + "'");
    return fs::path(out_dir);
}

json scenario_json(const Scenario& sc) {
    return {{"x", sc.x.to_string()},   {"dx", sc.dx.to_string()}, {"dy", sc.dy.to_string()},
            {"dz", sc.dz.to_string()}, {"g", sc.g.to_string()},   {"h", sc.h.to_string()},
            {"n", sc.n},               {"seed", sc.seed}};
}

json rng_json() {
    return {{"generator", "philox4x32-10"},
            {"key", "seed (low 32 bits, high 32 bits)"},
            {"counter", "block (low, high), stream id (low, high)"},
            {"streams", {{"x", 0}, {"dx", 1}, {"dy", 2}, {"dz", 3}}}};
}

json optimizer_json(const SimplexOptions& s) {
    return {{"max_iters", s.max_iters},   {"f_tol", s.f_tol},     {"x_tol", s.x_tol},
            {"restarts", s.restarts},     {"reflection", s.reflection}, {"expansion", s.expansion},
            {"contraction", s.contraction}, {"shrink", s.shrink}};
}

} // namespace

void run_simulate(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = prepare_dir(out_dir);
    const Scenario sc = cfg.scenario();
    const Dataset d = generate(sc);
    write_dataset((dir / "data.csv").string(), d);
    write_json(dir / "manifest.json",
               {{"command", "simulate"}, {"seed", cfg.seed}, {"scenario", scenario_json(sc)}, {"rng", rng_json()},
                {"rows", d.size()}});
}

FitResult run_fit(const RunConfig& cfg, const std::string& input, const std::string& out_dir) {
    const Dataset d = read_dataset(input);
    const auto dir = prepare_dir(out_dir);
    const auto grid = cfg.grid.resolve(d);
    FitResult f = fit(d, cfg.orders, grid, cfg.simplex, cfg.estimator);
    write_json(dir / "fit.json", fit_to_json(f, d.size(), cfg.estimator));
    write_text(dir / "curves.csv", curves_csv(f.curves));
    write_text(dir / "densities.csv", densities_csv(f.density_traces));
    return f;
}

void run_naive(const RunConfig& cfg, const std::string& input, const std::string& out_dir) {
    const Dataset d = read_dataset(input);
    const auto dir = prepare_dir(out_dir);
    const auto grid = cfg.grid.resolve(d);
    const auto nf = naive_fit(d, cfg.orders.k_g, cfg.orders.k_h);
    ModelParams p;
    p.g.coeffs = nf.beta_g;
    p.h.coeffs = nf.beta_h;
    write_json(dir / "naive.json", {{"beta_g", nf.beta_g},
                                    {"beta_h", nf.beta_h},
                                    {"resid_var_y", nf.resid_var_y},
                                    {"resid_var_z", nf.resid_var_z},
                                    {"n", d.size()}});
    write_text(dir / "curves.csv", curves_csv(evaluate_curves(p, grid.nodes())));
}

SelectionResult run_select(const RunConfig& cfg, const std::string& input, const std::string& out_dir) {
    const Dataset d = read_dataset(input);
    const auto dir = prepare_dir(out_dir);
    const auto grid = cfg.grid.resolve(d);
    const auto plan = cfg.selection_plan();
    auto res = select_orders(d, plan, grid, cfg.simplex, cfg.estimator, cfg.threads_for(true));
    write_text(dir / "selection.csv", selection_csv(res));
    write_json(dir / "selection.json", {{"command", "select"},
                                        {"seed", cfg.seed},
                                        {"best", to_json(res.best)},
                                        {"holdout_fraction", plan.holdout_fraction},
                                        {"partitions", plan.partitions},
                                        {"candidates", plan.candidates.size()},
                                        {"grid", to_json(grid)},
                                        {"optimizer", optimizer_json(cfg.simplex)}});
    return res;
}

ReplicationReport run_replicate(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = prepare_dir(out_dir);
    const Scenario sc = cfg.scenario();
    const auto grid = cfg.grid.fixed_grid();
    auto rep = replicate(sc, cfg.replications, cfg.orders, grid, cfg.simplex, cfg.estimator, cfg.eval_points,
                         cfg.threads_for(true));
    write_text(dir / "report.csv", report_csv(rep));

    json failures = json::array();
    for (std::size_t r = 0; r < rep.failures.size(); ++r)
        if (!rep.failures[r].empty()) failures.push_back({{"replication", r}, {"seed", rep.seeds[r]}, {"error", rep.failures[r]}});
    write_json(dir / "manifest.json", {{"command", "replicate"},
                                       {"seed", cfg.seed},
                                       {"scenario", scenario_json(sc)},
                                       {"rng", rng_json()},
                                       {"replications", cfg.replications},
                                       {"seeds", rep.seeds},
                                       {"orders", to_json(cfg.orders)},
                                       {"grid", to_json(grid)},
                                       {"optimizer", optimizer_json(cfg.simplex)},
                                       {"successful_fits", rep.successes()},
                                       {"converged_fits", rep.converged_count()},
                                       {"converged", rep.converged},
                                       {"failures", failures}});
    return rep;
}

bool run_spectral_check(const RunConfig& cfg, const std::string& out_dir) {
    const auto dir = prepare_dir(out_dir);
    const DiscreteModel m = gaussian_model(cfg.spectral);
    std::vector<Eigen::MatrixXd> A;
    Eigen::MatrixXd B;
    for (std::size_t l = 0; l < m.y_grid.size(); ++l) {
        auto ops = build_observed(m, l);
        A.push_back(std::move(ops.A_y));
        B = std::move(ops.B);
    }

    json diag = {{"nodes", cfg.spectral.nodes}, {"y_nodes", cfg.spectral.y_nodes}};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.F_zxs);
    diag["min_singular_F_zxs"] = svd.singularValues().tail(1)(0);
    constexpr double tol = 1e-6;
    bool ok = false;
    try {
        const auto rec = recover_latents(A, B, m.xstar_grid, m.xstar_step, m.x_grid, m.z_step, cfg.spectral_options);
        const double eig_err = max_relative_error(rec.eigenvalues, m.f_y_xs);
        const double kernel_err = max_relative_error(rec.F_xsx, m.F_xsx);
        const double eigvec_err = max_relative_error(rec.F_zxs, m.F_zxs);
        std::vector<bool> degenerate(rec.degenerate_y.begin(), rec.degenerate_y.end());
        diag["condition_B"] = rec.condition_B;
        diag["min_singular_B"] = rec.min_singular_B;
        diag["max_eigenvalue_imag"] = rec.max_imag;
        diag["reference_y"] = rec.reference_y;
        diag["degenerate_y"] = degenerate;
        diag["centering_violation_max"] = rec.centering_error;
        diag["centering_violation_profile"] = rec.column_error;
        diag["max_rel_error_eigenvalues"] = eig_err;
        diag["max_rel_error_F_xsx"] = kernel_err;
        diag["max_rel_error_F_zxs"] = eigvec_err;
        diag["tolerance"] = tol;
        ok = eig_err <= tol && kernel_err <= tol && rec.max_imag < 1e-8;
        diag["status"] = ok ? "ok" : "recovery error above tolerance";
    } catch (const NumericalError& e) {
        diag["status"] = std::string("failed: ") + e.what();
    }
    write_json(dir / "diagnostics.json", diag);
    return ok;
}

} // namespace berkson
