#pragma once

#include "core/estimator.hpp"
#include "core/selection.hpp"
#include "core/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace berkson {

/// CSV with a mandatory header naming x, y and z in any order; extra columns
/// are ignored. LF or CRLF line endings. Errors cite the 1-based data row.
Dataset read_dataset(const std::string& path);
Dataset parse_dataset(std::string_view text, const std::string& origin = "<text>");
void write_dataset(const std::string& path, const Dataset& d);

nlohmann::json to_json(const DensitySieve& d);
nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const SieveOrders& o);
nlohmann::json to_json(const QuadratureGrid& g);
nlohmann::json fit_to_json(const FitResult& f, std::size_t n, const EstimatorOptions& opts);

DensitySieve density_from_json(const nlohmann::json& j);
ModelParams params_from_json(const nlohmann::json& j);

struct StoredFit {
    ModelParams params;
    SieveOrders orders;
    QuadratureGrid grid;
    double loglik = 0.0;
    bool converged = false;
    SieveBounds bounds;
};

/// Reads a fit.json and validates the parameters against the stored bounds.
StoredFit read_fit_json(const std::string& path);

void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string curves_csv(const Curves& c);
std::string densities_csv(const DensityTraces& t);
std::string selection_csv(const SelectionResult& r);
std::string report_csv(const ReplicationReport& r);

} // namespace berkson
