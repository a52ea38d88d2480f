#include "core/config.hpp"

#include "core/error.hpp"
#include "core/format.hpp"
#include "core/parallel.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace berkson {

namespace {

double to_double(std::string_view key, std::string_view v) {
    double d = 0.0;
    if (!parse_double(v, d)) throw UsageError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return d;
}

long long to_integer(std::string_view key, std::string_view v) {
    v = trim(v);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw UsageError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return out;
}

int to_int(std::string_view key, std::string_view v) {
    const auto x = to_integer(key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw UsageError(std::string(key) + ": value out of range");
    return static_cast<int>(x);
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    v = trim(v);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw UsageError(std::string(key) + ": expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
    std::vector<double> out;
    for (auto tok : split(v, ',')) out.push_back(to_double(key, tok));
    return out;
}

std::vector<int> to_ints(std::string_view key, std::string_view v) {
    std::vector<int> out;
    for (auto tok : split(v, ',')) out.push_back(to_int(key, tok));
    if (out.empty()) throw UsageError(std::string(key) + ": empty list");
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError(std::string(key) + ": expected true/false");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        t["seed"] = [](RunConfig& c, auto k, auto v) { c.seed = to_u64(k, v); };
        t["threads"] = [](RunConfig& c, auto k, auto v) {
            c.threads = to_int(k, v);
            if (c.threads < 0) throw UsageError("threads must be >= 0");
        };

        t["scenario.preset"] = [](RunConfig& c, auto, auto v) {
            Scenario::preset(trim(v));
            c.scenario_preset = std::string(trim(v));
        };
        t["scenario.n"] = [](RunConfig& c, auto k, auto v) {
            const auto n = to_integer(k, v);
            if (n < 1) throw UsageError("scenario.n must be >= 1");
            c.scenario_n = static_cast<std::size_t>(n);
        };
        auto dist = [](std::optional<std::string> RunConfig::*field) {
            return [field](RunConfig& c, std::string_view, std::string_view v) {
                Distribution::parse(v);
                c.*field = std::string(trim(v));
            };
        };
        t["scenario.x"] = dist(&RunConfig::scenario_x);
        t["scenario.dx"] = dist(&RunConfig::scenario_dx);
        t["scenario.dy"] = dist(&RunConfig::scenario_dy);
        t["scenario.dz"] = dist(&RunConfig::scenario_dz);
        auto fn = [](std::optional<std::string> RunConfig::*field) {
            return [field](RunConfig& c, std::string_view, std::string_view v) {
                RegressionFunction::parse(v);
                c.*field = std::string(trim(v));
            };
        };
        t["scenario.g"] = fn(&RunConfig::scenario_g);
        t["scenario.h"] = fn(&RunConfig::scenario_h);

        t["orders"] = [](RunConfig& c, auto, auto v) { c.orders = SieveOrders::parse(trim(v)); };

        t["grid"] = [](RunConfig& c, auto k, auto v) {
            if (trim(v) == "auto") {
                c.grid.mode = GridConfig::Mode::automatic;
                return;
            }
            const auto g = to_doubles(k, v);
            if (g.size() != 3) throw UsageError("grid: expected lo,hi,step");
            QuadratureGrid check(g[0], g[1], g[2]);
            c.grid.lower = g[0];
            c.grid.upper = g[1];
            c.grid.step = g[2];
            c.grid.mode = GridConfig::Mode::fixed;
        };
        t["grid.lower"] = [](RunConfig& c, auto k, auto v) { c.grid.lower = to_double(k, v); };
        t["grid.upper"] = [](RunConfig& c, auto k, auto v) { c.grid.upper = to_double(k, v); };
        t["grid.step"] = [](RunConfig& c, auto k, auto v) { c.grid.step = to_double(k, v); };
        t["grid.mode"] = [](RunConfig& c, auto, auto v) {
            v = trim(v);
            if (v == "fixed") c.grid.mode = GridConfig::Mode::fixed;
            else if (v == "auto") c.grid.mode = GridConfig::Mode::automatic;
            else throw UsageError("grid.mode: expected fixed|auto");
        };

        t["optimizer.max_iters"] = [](RunConfig& c, auto k, auto v) { c.simplex.max_iters = to_int(k, v); };
        t["optimizer.f_tol"] = [](RunConfig& c, auto k, auto v) { c.simplex.f_tol = to_double(k, v); };
        t["optimizer.x_tol"] = [](RunConfig& c, auto k, auto v) { c.simplex.x_tol = to_double(k, v); };
        t["optimizer.restarts"] = [](RunConfig& c, auto k, auto v) { c.simplex.restarts = to_int(k, v); };
        t["optimizer.step_abs"] = [](RunConfig& c, auto k, auto v) { c.simplex.step_abs = to_double(k, v); };
        t["optimizer.step_rel"] = [](RunConfig& c, auto k, auto v) { c.simplex.step_rel = to_double(k, v); };
        t["optimizer.reflection"] = [](RunConfig& c, auto k, auto v) { c.simplex.reflection = to_double(k, v); };
        t["optimizer.expansion"] = [](RunConfig& c, auto k, auto v) { c.simplex.expansion = to_double(k, v); };
        t["optimizer.contraction"] = [](RunConfig& c, auto k, auto v) { c.simplex.contraction = to_double(k, v); };
        t["optimizer.shrink"] = [](RunConfig& c, auto k, auto v) { c.simplex.shrink = to_double(k, v); };

        t["sieve.coeff_bound"] = [](RunConfig& c, auto k, auto v) {
            c.estimator.bounds.coeff_bound = to_double(k, v);
            if (!(c.estimator.bounds.coeff_bound > 0.0)) throw UsageError("sieve.coeff_bound must be positive");
        };
        t["sieve.scale_min"] = [](RunConfig& c, auto k, auto v) { c.estimator.bounds.scale_min = to_double(k, v); };
        t["sieve.scale_max"] = [](RunConfig& c, auto k, auto v) { c.estimator.bounds.scale_max = to_double(k, v); };
        t["sieve.centering"] = [](RunConfig& c, auto, auto v) { c.estimator.centering = parse_centering(trim(v)); };
        t["sieve.baseline"] = [](RunConfig& c, auto, auto v) { c.estimator.baseline = parse_baseline(trim(v)); };
        t["init.split"] = [](RunConfig& c, auto k, auto v) { c.estimator.init_split = to_double(k, v); };
        t["init.dx_fraction"] = [](RunConfig& c, auto k, auto v) { c.estimator.init_dx_fraction = to_double(k, v); };
        t["init.warm_start"] = [](RunConfig& c, auto k, auto v) { c.estimator.warm_start = to_bool(k, v); };

        t["selection.holdout"] = [](RunConfig& c, auto k, auto v) { c.holdout_fraction = to_double(k, v); };
        t["selection.partitions"] = [](RunConfig& c, auto k, auto v) { c.partitions = to_int(k, v); };
        t["selection.candidates"] = [](RunConfig& c, auto, auto v) {
            c.candidates.clear();
            for (auto tuple : split(v, ';'))
                if (!tuple.empty()) c.candidates.push_back(SieveOrders::parse(tuple));
        };
        t["selection.k_dx"] = [](RunConfig& c, auto k, auto v) { c.sel_k_dx = to_ints(k, v); };
        t["selection.k_dy"] = [](RunConfig& c, auto k, auto v) { c.sel_k_dy = to_ints(k, v); };
        t["selection.k_dz"] = [](RunConfig& c, auto k, auto v) { c.sel_k_dz = to_ints(k, v); };
        t["selection.k_g"] = [](RunConfig& c, auto k, auto v) { c.sel_k_g = to_ints(k, v); };
        t["selection.k_h"] = [](RunConfig& c, auto k, auto v) { c.sel_k_h = to_ints(k, v); };

        t["replicate.count"] = [](RunConfig& c, auto k, auto v) { c.replications = to_int(k, v); };
        t["replicate.eval_points"] = [](RunConfig& c, auto k, auto v) { c.eval_points = to_doubles(k, v); };
        t["replicate.eval_range"] = [](RunConfig& c, auto k, auto v) {
            const auto r = to_doubles(k, v);
            if (r.size() != 3 || !(r[0] < r[1]) || r[2] < 2 || r[2] != static_cast<int>(r[2]))
                throw UsageError("replicate.eval_range: expected lo,hi,count with lo < hi and count >= 2");
            const int n = static_cast<int>(r[2]);
            c.eval_points.resize(n);
            for (int i = 0; i < n; ++i) c.eval_points[i] = r[0] + (r[1] - r[0]) * i / (n - 1);
        };

        t["spectral.nodes"] = [](RunConfig& c, auto k, auto v) { c.spectral.nodes = to_int(k, v); };
        t["spectral.y_nodes"] = [](RunConfig& c, auto k, auto v) { c.spectral.y_nodes = to_int(k, v); };
        t["spectral.half_width"] = [](RunConfig& c, auto k, auto v) { c.spectral.half_width = to_double(k, v); };
        t["spectral.sigma_dx"] = [](RunConfig& c, auto k, auto v) { c.spectral.sigma_dx = to_double(k, v); };
        t["spectral.sigma_z"] = [](RunConfig& c, auto k, auto v) { c.spectral.sigma_z = to_double(k, v); };
        t["spectral.sigma_y"] = [](RunConfig& c, auto k, auto v) { c.spectral.sigma_y = to_double(k, v); };
        t["spectral.g"] = [](RunConfig& c, auto, auto v) { c.spectral.g = RegressionFunction::parse(v); };
        t["spectral.h"] = [](RunConfig& c, auto, auto v) { c.spectral.h = RegressionFunction::parse(v); };
        t["spectral.centering_tol"] = [](RunConfig& c, auto k, auto v) {
            c.spectral_options.centering_tol = to_double(k, v);
        };
        t["spectral.exhaustive"] = [](RunConfig& c, auto k, auto v) {
            c.spectral_options.exhaustive_limit = to_bool(k, v) ? 25 : 8;
        };
        return t;
    }();
    return table;
}

} // namespace

QuadratureGrid GridConfig::resolve(const Dataset& d) const {
    if (mode == Mode::automatic) return auto_grid(d);
    return fixed_grid();
}

void RunConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    const auto& t = setters();
    const auto it = t.find(key);
    if (it == t.end()) throw UsageError("unknown configuration key '" + std::string(key) + "'");
    it->second(*this, key, value);
}

void RunConfig::parse_text(std::string_view text, const std::string& origin) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        try {
            set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const UsageError& e) {
            throw UsageError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    parse_text(ss.str(), path);
}

Scenario RunConfig::scenario() const {
    Scenario sc = Scenario::preset(scenario_preset);
    if (scenario_n) sc.n = *scenario_n;
    if (scenario_x) sc.x = Distribution::parse(*scenario_x);
    if (scenario_dx) sc.dx = Distribution::parse(*scenario_dx);
    if (scenario_dy) sc.dy = Distribution::parse(*scenario_dy);
    if (scenario_dz) sc.dz = Distribution::parse(*scenario_dz);
    if (scenario_g) sc.g = RegressionFunction::parse(*scenario_g);
    if (scenario_h) sc.h = RegressionFunction::parse(*scenario_h);
    sc.seed = seed;
    sc.validate();
    return sc;
}

SelectionPlan RunConfig::selection_plan() const {
    SelectionPlan plan;
    plan.candidates = candidates.empty() ? candidate_grid(sel_k_dx, sel_k_dy, sel_k_dz, sel_k_g, sel_k_h) : candidates;
    plan.holdout_fraction = holdout_fraction;
    plan.partitions = partitions;
    plan.seed = seed;
    plan.validate();
    return plan;
}

int RunConfig::threads_for(bool parallel_command) const {
    if (threads > 0) return threads;
    return parallel_command ? resolve_threads(0) : 1;
}

std::vector<std::string> RunConfig::known_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

} // namespace berkson
