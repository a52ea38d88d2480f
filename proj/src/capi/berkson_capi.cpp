#include "berkson/berkson.h"

#include "core/commands.hpp"
#include "core/error.hpp"
#include "core/io.hpp"

#include <new>
#include <string>

struct bk_config {
    berkson::RunConfig cfg;
};

struct bk_dataset {
    berkson::Dataset data;
};

struct bk_fit {
    berkson::ModelParams params;
    berkson::QuadratureGrid grid;
    double loglik = 0.0;
    bool converged = false;
    nlohmann::json doc;
};

namespace {

thread_local std::string g_last_error;

bk_status fail(bk_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

template <class F>
bk_status guarded(F&& body) {
    try {
        return body();
    } catch (const berkson::UsageError& e) {
        return fail(BK_ERR_USAGE, e.what());
    } catch (const berkson::NumericalError& e) {
        return fail(BK_ERR_NUMERICAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BK_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BK_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(BK_ERR_INTERNAL, "unknown error");
    }
}

#define BK_REQUIRE(cond, what) \
    if (!(cond)) return fail(BK_ERR_USAGE, what)

} // namespace

extern "C" {

const char* bk_version(void) { return "0.1.0"; }

const char* bk_last_error(void) { return g_last_error.c_str(); }

bk_status bk_config_create(bk_config** out) {
    BK_REQUIRE(out, "null output pointer");
    return guarded([&] {
        *out = new bk_config();
        return BK_OK;
    });
}

bk_status bk_config_load(bk_config* cfg, const char* path) {
    BK_REQUIRE(cfg && path, "null argument");
    return guarded([&] {
        cfg->cfg.load_file(path);
        return BK_OK;
    });
}

bk_status bk_config_set(bk_config* cfg, const char* key, const char* value) {
    BK_REQUIRE(cfg && key && value, "null argument");
    return guarded([&] {
        cfg->cfg.set(key, value);
        return BK_OK;
    });
}

void bk_config_free(bk_config* cfg) { delete cfg; }

bk_status bk_dataset_read_csv(const char* path, bk_dataset** out) {
    BK_REQUIRE(path && out, "null argument");
    return guarded([&] {
        *out = new bk_dataset{berkson::read_dataset(path)};
        return BK_OK;
    });
}

bk_status bk_dataset_from_arrays(const double* x, const double* y, const double* z, size_t n, bk_dataset** out) {
    BK_REQUIRE(out && (n == 0 || (x && y && z)), "null argument");
    return guarded([&] {
        berkson::Dataset d;
        d.rows.reserve(n);
        for (size_t i = 0; i < n; ++i) d.rows.push_back({x[i], y[i], z[i]});
        berkson::validate(d);
        *out = new bk_dataset{std::move(d)};
        return BK_OK;
    });
}

size_t bk_dataset_size(const bk_dataset* d) { return d ? d->data.size() : 0; }

bk_status bk_dataset_row(const bk_dataset* d, size_t i, double* x, double* y, double* z) {
    BK_REQUIRE(d && x && y && z, "null argument");
    BK_REQUIRE(i < d->data.size(), "row index out of range");
    const auto& r = d->data.rows[i];
    *x = r.x;
    *y = r.y;
    *z = r.z;
    return BK_OK;
}

bk_status bk_dataset_write_csv(const bk_dataset* d, const char* path) {
    BK_REQUIRE(d && path, "null argument");
    return guarded([&] {
        berkson::write_dataset(path, d->data);
        return BK_OK;
    });
}

void bk_dataset_free(bk_dataset* d) { delete d; }

bk_status bk_simulate(const bk_config* cfg, bk_dataset** out) {
    BK_REQUIRE(cfg && out, "null argument");
    return guarded([&] {
        *out = new bk_dataset{berkson::generate(cfg->cfg.scenario())};
        return BK_OK;
    });
}

bk_status bk_fit_run(const bk_config* cfg, const bk_dataset* d, bk_fit** out) {
    BK_REQUIRE(cfg && d && out, "null argument");
    return guarded([&] {
        const auto& c = cfg->cfg;
        const auto grid = c.grid.resolve(d->data);
        auto f = berkson::fit(d->data, c.orders, grid, c.simplex, c.estimator);
        auto doc = berkson::fit_to_json(f, d->data.size(), c.estimator);
        *out = new bk_fit{std::move(f.params), f.grid, f.loglik, f.converged, std::move(doc)};
        return BK_OK;
    });
}

bk_status bk_fit_load(const char* path, bk_fit** out) {
    BK_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto s = berkson::read_fit_json(path);
        nlohmann::json doc = {{"orders", berkson::to_json(s.orders)},
                              {"grid", berkson::to_json(s.grid)},
                              {"loglik", s.loglik},
                              {"converged", s.converged},
                              {"params", berkson::to_json(s.params)},
                              {"bounds",
                               {{"coeff_bound", s.bounds.coeff_bound},
                                {"scale_min", s.bounds.scale_min},
                                {"scale_max", s.bounds.scale_max}}}};
        *out = new bk_fit{std::move(s.params), s.grid, s.loglik, s.converged, std::move(doc)};
        return BK_OK;
    });
}

double bk_fit_loglik(const bk_fit* f) { return f ? f->loglik : 0.0; }

int bk_fit_converged(const bk_fit* f) { return f && f->converged ? 1 : 0; }

bk_status bk_fit_eval_g(const bk_fit* f, double x_star, double* out) {
    BK_REQUIRE(f && out, "null argument");
    *out = f->params.g(x_star);
    return BK_OK;
}

bk_status bk_fit_eval_h(const bk_fit* f, double x_star, double* out) {
    BK_REQUIRE(f && out, "null argument");
    *out = f->params.h(x_star);
    return BK_OK;
}

bk_status bk_fit_eval_density(const bk_fit* f, bk_density which, double v, double* out) {
    BK_REQUIRE(f && out, "null argument");
    switch (which) {
    case BK_DENSITY_DX: *out = f->params.dx(v); return BK_OK;
    case BK_DENSITY_DY: *out = f->params.dy(v); return BK_OK;
    case BK_DENSITY_DZ: *out = f->params.dz(v); return BK_OK;
    }
    return fail(BK_ERR_USAGE, "unknown density selector");
}

bk_status bk_fit_log_likelihood(const bk_fit* f, const bk_dataset* d, double* out) {
    BK_REQUIRE(f && d && out, "null argument");
    return guarded([&] {
        const auto ll = berkson::log_likelihood(f->params, d->data, f->grid);
        if (!ll) return fail(BK_ERR_NUMERICAL, "likelihood is zero or the fit is infeasible for this dataset");
        *out = *ll;
        return BK_OK;
    });
}

bk_status bk_fit_write_json(const bk_fit* f, const char* path) {
    BK_REQUIRE(f && path, "null argument");
    return guarded([&] {
        berkson::write_json(path, f->doc);
        return BK_OK;
    });
}

void bk_fit_free(bk_fit* f) { delete f; }

bk_status bk_cmd_simulate(const bk_config* cfg, const char* out_dir) {
    BK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        berkson::run_simulate(cfg->cfg, out_dir);
        return BK_OK;
    });
}

bk_status bk_cmd_fit(const bk_config* cfg, const char* input_csv, const char* out_dir) {
    BK_REQUIRE(cfg && input_csv && out_dir, "null argument");
    return guarded([&] {
        berkson::run_fit(cfg->cfg, input_csv, out_dir);
        return BK_OK;
    });
}

bk_status bk_cmd_naive(const bk_config* cfg, const char* input_csv, const char* out_dir) {
    BK_REQUIRE(cfg && input_csv && out_dir, "null argument");
    return guarded([&] {
        berkson::run_naive(cfg->cfg, input_csv, out_dir);
        return BK_OK;
    });
}

bk_status bk_cmd_select(const bk_config* cfg, const char* input_csv, const char* out_dir) {
    BK_REQUIRE(cfg && input_csv && out_dir, "null argument");
    return guarded([&] {
        berkson::run_select(cfg->cfg, input_csv, out_dir);
        return BK_OK;
    });
}

bk_status bk_cmd_replicate(const bk_config* cfg, const char* out_dir) {
    BK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        berkson::run_replicate(cfg->cfg, out_dir);
        return BK_OK;
    });
}

bk_status bk_cmd_spectral_check(const bk_config* cfg, const char* out_dir) {
    BK_REQUIRE(cfg && out_dir, "null argument");
    return guarded([&] {
        if (berkson::run_spectral_check(cfg->cfg, out_dir)) return BK_OK;
        return fail(BK_ERR_NUMERICAL, "spectral recovery missed its tolerance; see diagnostics.json");
    });
}

} // extern "C"
