/* Exercises the shared library through its C header only. */

#include "berkson/berkson.h"

#include <math.h>
#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                    \
    do {                                                                \
        if (!(cond)) {                                                  \
            fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                 \
        }                                                               \
    } while (0)

int main(int argc, char** argv) {
    const char* out_dir = argc > 1 ? argv[1] : "capi_out";
    char path[1024];
    bk_config* cfg = NULL;
    bk_dataset* d = NULL;
    bk_fit* fit = NULL;
    bk_fit* loaded = NULL;

    EXPECT(strcmp(bk_version(), "0.1.0") == 0);
    EXPECT(bk_config_create(NULL) == BK_ERR_USAGE);
    EXPECT(bk_config_create(&cfg) == BK_OK);

    EXPECT(bk_config_set(cfg, "no.such.key", "1") == BK_ERR_USAGE);
    EXPECT(strstr(bk_last_error(), "no.such.key") != NULL);
    EXPECT(bk_config_load(cfg, "/nonexistent/run.cfg") == BK_ERR_USAGE);

    {
        const double x[3] = {0.0, 1.0, 2.0}, y[3] = {1.0, 2.0, 3.0}, z[3] = {4.0, 5.0, 6.0};
        double rx, ry, rz;
        EXPECT(bk_dataset_from_arrays(x, y, z, 3, &d) == BK_OK);
        EXPECT(bk_dataset_size(d) == 3);
        EXPECT(bk_dataset_row(d, 2, &rx, &ry, &rz) == BK_OK);
        EXPECT(rx == 2.0 && ry == 3.0 && rz == 6.0);
        EXPECT(bk_dataset_row(d, 3, &rx, &ry, &rz) == BK_ERR_USAGE);
        bk_dataset_free(d);
        d = NULL;
        EXPECT(bk_dataset_from_arrays(x, y, z, 0, &d) == BK_ERR_USAGE);
    }

    EXPECT(bk_config_set(cfg, "scenario.preset", "identity_gaussian") == BK_OK);
    EXPECT(bk_config_set(cfg, "scenario.n", "300") == BK_OK);
    EXPECT(bk_config_set(cfg, "seed", "5") == BK_OK);
    EXPECT(bk_config_set(cfg, "orders", "1,1,1,2,2") == BK_OK);
    EXPECT(bk_config_set(cfg, "grid", "-5,5,0.1") == BK_OK);
    EXPECT(bk_config_set(cfg, "optimizer.f_tol", "1e-7") == BK_OK);

    EXPECT(bk_simulate(cfg, &d) == BK_OK);
    EXPECT(bk_dataset_size(d) == 300);
    snprintf(path, sizeof path, "%s/data.csv", out_dir);
    EXPECT(bk_cmd_simulate(cfg, out_dir) == BK_OK);
    {
        bk_dataset* again = NULL;
        double a[3], b[3];
        EXPECT(bk_dataset_read_csv(path, &again) == BK_OK);
        EXPECT(bk_dataset_row(d, 17, &a[0], &a[1], &a[2]) == BK_OK);
        EXPECT(bk_dataset_row(again, 17, &b[0], &b[1], &b[2]) == BK_OK);
        EXPECT(a[0] == b[0] && a[1] == b[1] && a[2] == b[2]);
        bk_dataset_free(again);
    }

    EXPECT(bk_fit_run(cfg, d, &fit) == BK_OK);
    {
        double g0, g1, f0, ll;
        EXPECT(bk_fit_eval_g(fit, 0.0, &g0) == BK_OK);
        EXPECT(bk_fit_eval_g(fit, 1.0, &g1) == BK_OK);
        EXPECT(fabs(g1 - g0 - 1.0) < 0.35);
        EXPECT(bk_fit_eval_density(fit, BK_DENSITY_DY, 0.0, &f0) == BK_OK);
        EXPECT(f0 > 0.0);
        EXPECT(bk_fit_eval_density(fit, (bk_density)7, 0.0, &f0) == BK_ERR_USAGE);
        EXPECT(bk_fit_log_likelihood(fit, d, &ll) == BK_OK);
        EXPECT(ll == bk_fit_loglik(fit));

        snprintf(path, sizeof path, "%s/fit.json", out_dir);
        EXPECT(bk_fit_write_json(fit, path) == BK_OK);
        EXPECT(bk_fit_load(path, &loaded) == BK_OK);
        EXPECT(bk_fit_loglik(loaded) == bk_fit_loglik(fit));
        EXPECT(bk_fit_converged(loaded) == bk_fit_converged(fit));
        EXPECT(bk_fit_log_likelihood(loaded, d, &ll) == BK_OK);
        EXPECT(fabs(ll - bk_fit_loglik(fit)) <= 1e-12);
    }
    EXPECT(bk_fit_load("/nonexistent/fit.json", &loaded) == BK_ERR_USAGE);

    EXPECT(bk_cmd_fit(cfg, "/nonexistent/data.csv", out_dir) == BK_ERR_USAGE);
    EXPECT(bk_cmd_spectral_check(cfg, out_dir) == BK_OK);
    EXPECT(bk_config_set(cfg, "spectral.sigma_z", "3") == BK_OK);
    EXPECT(bk_cmd_spectral_check(cfg, out_dir) == BK_ERR_NUMERICAL);

    bk_fit_free(fit);
    bk_fit_free(loaded);
    bk_dataset_free(d);
    bk_config_free(cfg);
    bk_config_free(NULL);

    if (failures) {
        fprintf(stderr, "%d check(s) failed\n", failures);
        return 1;
    }
    printf("capi: all checks passed\n");
    return 0;
}
