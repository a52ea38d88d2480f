// Command-line front end. Talks to the library only through the C API.

#include "berkson/berkson.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string config;
    std::string input;
    std::string out = ".";
    std::string seed;
    std::string threads;
    std::string orders;
    std::string grid;
    std::vector<std::string> sets;
};

int report(bk_status s) {
    if (s == BK_OK) return 0;
    std::fprintf(stderr, "berkson: %s\n", bk_last_error());
    return s == BK_ERR_USAGE ? 1 : 2;
}

using ConfigPtr = std::unique_ptr<bk_config, decltype(&bk_config_free)>;

// Defaults, then the config file, then --set, then the dedicated flags.
bk_status build_config(const Options& o, ConfigPtr& out) {
    bk_config* raw = nullptr;
    if (auto s = bk_config_create(&raw); s != BK_OK) return s;
    out.reset(raw);
    if (!o.config.empty())
        if (auto s = bk_config_load(raw, o.config.c_str()); s != BK_OK) return s;
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "berkson: --set expects key=value, got '%s'\n", kv.c_str());
            return BK_ERR_USAGE;
        }
        if (auto s = bk_config_set(raw, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != BK_OK) return s;
    }
    const std::pair<const char*, const std::string*> flags[] = {
        {"seed", &o.seed}, {"threads", &o.threads}, {"orders", &o.orders}, {"grid", &o.grid}};
    for (auto [key, value] : flags)
        if (!value->empty())
            if (auto s = bk_config_set(raw, key, value->c_str()); s != BK_OK) return s;
    return BK_OK;
}

void add_common(CLI::App* sub, Options& o, bool needs_input) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    if (needs_input) sub->add_option("--input", o.input, "CSV with columns x,y,z")->required();
    sub->add_option("--out", o.out, "output directory (created if missing)");
    sub->add_option("--seed", o.seed, "base random seed");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    sub->add_option("--orders", o.orders, "k_dx,k_dy,k_dz,k_g,k_h");
    sub->add_option("--grid", o.grid, "quadrature grid lower,upper,step or 'auto'");
    sub->add_option("--set", o.sets, "extra key=value assignment (repeatable)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sieve maximum likelihood for regression with Berkson measurement error"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bk_version());

    Options o;
    auto* simulate = app.add_subcommand("simulate", "draw a sample: data.csv, manifest.json");
    auto* fit = app.add_subcommand("fit", "sieve MLE: fit.json, curves.csv, densities.csv");
    auto* naive = app.add_subcommand("naive", "polynomial least squares of y and z on x: naive.json, curves.csv");
    auto* select = app.add_subcommand("select", "held-out likelihood order selection: selection.csv, selection.json");
    auto* replicate = app.add_subcommand("replicate", "Monte Carlo comparison with naive regression: report.csv, manifest.json");
    auto* spectral = app.add_subcommand("spectral-check", "discretized operator identity check: diagnostics.json");
    add_common(simulate, o, false);
    add_common(fit, o, true);
    add_common(naive, o, true);
    add_common(select, o, true);
    add_common(replicate, o, false);
    add_common(spectral, o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    ConfigPtr cfg(nullptr, &bk_config_free);
    if (auto s = build_config(o, cfg); s != BK_OK) return report(s);

    const char* out = o.out.c_str();
    const char* in = o.input.c_str();
    if (simulate->parsed()) return report(bk_cmd_simulate(cfg.get(), out));
    if (fit->parsed()) return report(bk_cmd_fit(cfg.get(), in, out));
    if (naive->parsed()) return report(bk_cmd_naive(cfg.get(), in, out));
    if (select->parsed()) return report(bk_cmd_select(cfg.get(), in, out));
    if (replicate->parsed()) return report(bk_cmd_replicate(cfg.get(), out));
    if (spectral->parsed()) return report(bk_cmd_spectral_check(cfg.get(), out));
    return 1;
}
