#include "core/io.hpp"

#include "core/error.hpp"
#include "core/format.hpp"

#include <fstream>
#include <sstream>

namespace berkson {

using nlohmann::json;

Dataset parse_dataset(std::string_view text, const std::string& origin) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw UsageError(origin + ": empty file");

    const auto header = split(lines.front(), ',');
    int cx = -1, cy = -1, cz = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto name = header[c];
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = name.substr(1, name.size() - 2);
        if (name == "x") cx = static_cast<int>(c);
        if (name == "y") cy = static_cast<int>(c);
        if (name == "z") cz = static_cast<int>(c);
    }
    if (cx < 0 || cy < 0 || cz < 0) {
        std::string missing;
        if (cx < 0) missing += " x";
        if (cy < 0) missing += " y";
        if (cz < 0) missing += " z";
        throw UsageError(origin + ": header is missing column(s):" + missing);
    }

    Dataset d;
    const std::pair<int, const char*> cols[] = {{cx, "x"}, {cy, "y"}, {cz, "z"}};
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto row_no = std::to_string(l);
        if (trim(lines[l]).empty()) throw UsageError(origin + ": data row " + row_no + " is blank");
        const auto cells = split(lines[l], ',');
        if (cells.size() != header.size())
            throw UsageError(origin + ": data row " + row_no + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        double v[3];
        for (int k = 0; k < 3; ++k) {
            const auto cell = cells[static_cast<std::size_t>(cols[k].first)];
            if (!parse_double(cell, v[k]))
                throw UsageError(origin + ": data row " + row_no + ", column " + cols[k].second +
                                 ": cannot parse '" + std::string(cell) + "'");
            if (!std::isfinite(v[k]))
                throw UsageError(origin + ": data row " + row_no + ", column " + cols[k].second +
                                 ": non-finite value '" + std::string(cell) + "'");
        }
        d.rows.push_back({v[0], v[1], v[2]});
    }
    if (d.rows.empty()) throw UsageError(origin + ": no data rows");
    return d;
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open dataset '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str(), path);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_dataset(const std::string& path, const Dataset& d) {
    std::string out = "x,y,z\n";
    for (const auto& r : d.rows)
        out += format_double17(r.x) + ',' + format_double17(r.y) + ',' + format_double17(r.z) + '\n';
    write_text(path, out);
}

json to_json(const DensitySieve& d) {
    return {{"scale", d.scale},
            {"coeffs", d.coeffs},
            {"baseline", std::string(to_string(d.baseline))},
            {"centering", std::string(to_string(d.centering))}};
}

json to_json(const ModelParams& p) {
    return {{"g", p.g.coeffs}, {"h", p.h.coeffs}, {"f_dx", to_json(p.dx)}, {"f_dy", to_json(p.dy)}, {"f_dz", to_json(p.dz)}};
}

json to_json(const SieveOrders& o) {
    return {{"k_dx", o.k_dx}, {"k_dy", o.k_dy}, {"k_dz", o.k_dz}, {"k_g", o.k_g}, {"k_h", o.k_h}};
}

json to_json(const QuadratureGrid& g) { return {{"lower", g.lower()}, {"upper", g.upper()}, {"step", g.step()}}; }

json fit_to_json(const FitResult& f, std::size_t n, const EstimatorOptions& opts) {
    json residuals = json::object();
    const std::pair<const char*, const DensitySieve*> dens[] = {
        {"f_dx", &f.params.dx}, {"f_dy", &f.params.dy}, {"f_dz", &f.params.dz}};
    for (auto [name, d] : dens) {
        const auto r = constraint_residuals(*d);
        residuals[name] = {{"area", r.area}, {"centering", r.centering}};
    }
    json warm = json::array();
    for (const auto& o : f.warm_path) warm.push_back(o.to_string());
    return {{"orders", to_json(f.orders)},
            {"grid", to_json(f.grid)},
            {"n", n},
            {"loglik", f.loglik},
            {"initial_loglik", f.initial_loglik},
            {"converged", f.converged},
            {"params", to_json(f.params)},
            {"bounds",
             {{"coeff_bound", opts.bounds.coeff_bound},
              {"scale_min", opts.bounds.scale_min},
              {"scale_max", opts.bounds.scale_max}}},
            {"diagnostics",
             {{"iterations", f.iterations},
              {"evaluations", f.evaluations},
              {"scale_inflations", f.inflations},
              {"warm_start_path", warm},
              {"warm_start_loglik", f.warm_path.empty() ? json(nullptr) : json(f.warm_loglik)},
              {"constraint_residuals", residuals}}}};
}

DensitySieve density_from_json(const json& j) {
    DensitySieve d;
    d.scale = j.at("scale").get<double>();
    d.coeffs = j.at("coeffs").get<std::vector<double>>();
    d.baseline = parse_baseline(j.at("baseline").get<std::string>());
    d.centering = parse_centering(j.at("centering").get<std::string>());
    return d;
}

ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.g.coeffs = j.at("g").get<std::vector<double>>();
    p.h.coeffs = j.at("h").get<std::vector<double>>();
    p.dx = density_from_json(j.at("f_dx"));
    p.dy = density_from_json(j.at("f_dy"));
    p.dz = density_from_json(j.at("f_dz"));
    return p;
}

StoredFit read_fit_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open fit file '" + path + "'");
    try {
        const json j = json::parse(in);
        StoredFit s;
        s.params = params_from_json(j.at("params"));
        const auto& o = j.at("orders");
        s.orders = {o.at("k_dx").get<int>(), o.at("k_dy").get<int>(), o.at("k_dz").get<int>(), o.at("k_g").get<int>(),
                    o.at("k_h").get<int>()};
        const auto& g = j.at("grid");
        s.grid = QuadratureGrid(g.at("lower").get<double>(), g.at("upper").get<double>(), g.at("step").get<double>());
        s.loglik = j.at("loglik").get<double>();
        s.converged = j.at("converged").get<bool>();
        const auto& b = j.at("bounds");
        s.bounds = {b.at("coeff_bound").get<double>(), b.at("scale_min").get<double>(), b.at("scale_max").get<double>()};
        validate(s.params, s.bounds);
        return s;
    } catch (const json::exception& e) {
        throw UsageError("malformed fit file '" + path + "': " + e.what());
    }
}

std::string curves_csv(const Curves& c) {
    std::string out = "x_star,g_hat,h_hat\n";
    for (std::size_t i = 0; i < c.x.size(); ++i)
        out += format_double17(c.x[i]) + ',' + format_double17(c.g[i]) + ',' + format_double17(c.h[i]) + '\n';
    return out;
}

std::string densities_csv(const DensityTraces& t) {
    std::string out = "v,f_dx,f_dy,f_dz\n";
    for (std::size_t i = 0; i < t.v.size(); ++i)
        out += format_double17(t.v[i]) + ',' + format_double17(t.dx[i]) + ',' + format_double17(t.dy[i]) + ',' +
               format_double17(t.dz[i]) + '\n';
    return out;
}

std::string selection_csv(const SelectionResult& r) {
    std::string out = "k_dx,k_dy,k_dz,k_g,k_h,mean_heldout_loglik,std_error,rank,failed_fits\n";
    for (const auto& row : r.table) {
        out += row.orders.to_string() + ',' + format_double17(row.mean) + ',' + format_double17(row.std_error) + ',' +
               std::to_string(row.rank) + ',' + std::to_string(row.failed_fits) + '\n';
    }
    return out;
}

std::string report_csv(const ReplicationReport& r) {
    std::string out =
        "x_star,true_g,robust_q05,robust_q50,robust_q95,naive_q05,naive_q50,naive_q95,"
        "true_h,robust_h_q05,robust_h_q50,robust_h_q95,naive_h_q05,naive_h_q50,naive_h_q95\n";
    for (std::size_t i = 0; i < r.eval_points.size(); ++i) {
        const double cells[] = {r.eval_points[i],     r.true_g[i],          r.robust_g_band.q05[i], r.robust_g_band.q50[i],
                                r.robust_g_band.q95[i], r.naive_g_band.q05[i], r.naive_g_band.q50[i],  r.naive_g_band.q95[i],
                                r.true_h[i],          r.robust_h_band.q05[i], r.robust_h_band.q50[i], r.robust_h_band.q95[i],
                                r.naive_h_band.q05[i], r.naive_h_band.q50[i], r.naive_h_band.q95[i]};
        bool first = true;
        for (double c : cells) {
            if (!first) out += ',';
            out += format_double17(c);
            first = false;
        }
        out += '\n';
    }
    return out;
}

} // namespace berkson
