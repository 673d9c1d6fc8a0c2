#pragma once

// CSV ingestion per space, JSON documents for fit/cv/jumps/simulation results, and the
// simulation config reader.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvfr/euclidean.hpp"
#include "tvfr/sim.hpp"
#include "tvfr/solver.hpp"
#include "tvfr/spd.hpp"
#include "tvfr/wasserstein.hpp"

namespace tvfr {

inline constexpr int kSchemaVersion = 1;

// Numeric CSV: comma-separated reals, one record per line. Blank lines and lines starting
// with '#' are skipped. All records must have the same number of fields.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);

// n rows × k columns.
std::vector<VecPoint> read_euclidean_csv(const std::filesystem::path& path, double scale = 1.0);

// n rows × m² columns, each a row-major m×m matrix; symmetry and positive definiteness are
// checked per row.
std::vector<SpdPoint> read_spd_csv(const std::filesystem::path& path, double scale = 1.0);

// Quantile mode: n rows × G columns of quantile values at the midpoint nodes. `grid` = 0
// accepts whatever G the file has; otherwise G must match.
std::vector<QuantilePoint> read_quantile_csv(const std::filesystem::path& path, std::size_t grid = 0,
                                             double scale = 1.0);

// Sample mode: every regular file in `dir`, in lexicographic filename order, holds the raw
// samples (comma or newline separated) of one time point.
std::vector<QuantilePoint> read_sample_dir(const std::filesystem::path& dir, std::size_t grid,
                                           double scale = 1.0);

// Space-native vectorization: a vector as is, a matrix row-major, a quantile grid as is.
std::vector<double> vectorize(const VecPoint& p);
std::vector<double> vectorize(const SpdPoint& p);
std::vector<double> vectorize(const QuantilePoint& p);

// Writes points one per row in the same format the readers accept.
template <class P>
void write_points_csv(const std::filesystem::path& path, const std::vector<P>& points);

template <class P>
nlohmann::json fit_to_json(const FitResult<P>& res, std::string_view space, std::span<const double> design) {
    nlohmann::json fitted = nlohmann::json::array();
    for (const auto& p : res.fitted) fitted.push_back(vectorize(p));
    return {{"schema_version", kSchemaVersion},
            {"space", std::string(space)},
            {"lambda", res.lambda},
            {"n", res.fitted.size()},
            {"design", std::vector<double>(design.begin(), design.end())},
            {"fitted", std::move(fitted)},
            {"breakpoints", res.step.breakpoints()},
            {"jumps", res.jumps},
            {"jump_threshold", res.jump_threshold},
            {"objective_trace", res.objective_trace},
            {"cycles_run", res.cycles_run},
            {"converged", res.converged},
            {"step_scale", res.step_scale}};
}

nlohmann::json cv_to_json(const CvResult& cv, int folds, std::uint64_t seed);

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});
SimConfig sim_config_from_json(const nlohmann::json& j);
SimConfig read_sim_config(const std::filesystem::path& path);

nlohmann::json sim_report_to_json(const SimReport& report);
void write_replicates_csv(const std::filesystem::path& path, const SimReport& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace tvfr
