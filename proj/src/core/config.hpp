#pragma once

// Run configuration: flat `key = value` text with dotted section prefixes.
// Unknown keys are errors. Later assignments override earlier ones, so
// command-line flags applied after a file take precedence.

#include "core/estimator.hpp"
#include "core/selection.hpp"
#include "core/simulation.hpp"
#include "core/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace berkson {

struct GridConfig {
    enum class Mode { fixed, automatic };
    Mode mode = Mode::fixed;
    double lower = -3.0;
    double upper = 3.0;
    double step = 0.05;

    /// Fixed grid as configured, or auto_grid(d) scaled from the [-3,3]
    /// step 0.05 template for the automatic mode.
    QuadratureGrid resolve(const Dataset& d) const;
    QuadratureGrid fixed_grid() const { return QuadratureGrid(lower, upper, step); }
};

struct RunConfig {
    std::uint64_t seed = 0;
    int threads = 0;  // 0: all cores for replicate/select, 1 for fit

    std::string scenario_preset = "paper";
    std::optional<std::size_t> scenario_n;
    std::optional<std::string> scenario_x, scenario_dx, scenario_dy, scenario_dz, scenario_g, scenario_h;

    SieveOrders orders{3, 3, 3, 6, 6};
    GridConfig grid;
    SimplexOptions simplex;
    EstimatorOptions estimator;

    double holdout_fraction = 0.125;
    int partitions = 100;
    std::vector<SieveOrders> candidates;  // explicit list; overrides the per-component sets
    std::vector<int> sel_k_dx{1, 2, 3, 4}, sel_k_dy{1, 2, 3, 4}, sel_k_dz{1, 2, 3, 4};
    std::vector<int> sel_k_g{4, 5, 6, 7}, sel_k_h{4, 5, 6, 7};

    int replications = 20;
    std::vector<double> eval_points = default_eval_points();

    GaussianModelSpec spectral;
    SpectralOptions spectral_options;

    /// Throws UsageError for unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);
    /// Reads a config file; errors cite the line number.
    void load_file(const std::string& path);
    void parse_text(std::string_view text, const std::string& origin = "<text>");

    Scenario scenario() const;  // preset with explicit overrides, seed applied
    SelectionPlan selection_plan() const;
    int threads_for(bool parallel_command) const;

    static std::vector<std::string> known_keys();
};

} // namespace berkson
