#include "tvfr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tvfr {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(std::string_view field, const fs::path& path, std::size_t line) {
    field = trim(field);
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        throw InvalidInput(path.string() + ":" + std::to_string(line) + ": not a finite number: '" +
                           std::string(field) + "'");
    return v;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    return in;
}

std::string row_label(const fs::path& path, std::size_t row) {
    return path.string() + ": row " + std::to_string(row + 1);
}

}  // namespace

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = s.find(',', start);
            row.push_back(parse_real(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start),
                                     path, lineno));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(rows.front().size()) + " fields, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput("'" + path.string() + "' contains no data rows");
    return rows;
}

std::vector<VecPoint> read_euclidean_csv(const fs::path& path, double scale) {
    std::vector<VecPoint> out;
    for (const auto& row : read_csv_rows(path)) {
        VecPoint p = Eigen::Map<const Eigen::VectorXd>(row.data(), Eigen::Index(row.size())) * scale;
        EuclideanSpace{}.validate(p);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<SpdPoint> read_spd_csv(const fs::path& path, double scale) {
    const auto rows = read_csv_rows(path);
    const std::size_t cols = rows.front().size();
    const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(double(cols))));
    if (std::size_t(m * m) != cols)
        throw InvalidInput(path.string() + ": " + std::to_string(cols) + " columns is not a square number");
    std::vector<SpdPoint> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        // Row-major vectorization; the matrix is symmetric so the transpose is immaterial
        // once symmetry is confirmed.
        SpdPoint a = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                         rows[r].data(), m, m) *
                     scale;
        const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()))
            throw InvalidInput(row_label(path, r) + ": matrix is not symmetric");
        a = 0.5 * (a + a.transpose());
        try {
            validate_spd(a);
        } catch (const NotPositiveDefinite& e) {
            throw NotPositiveDefinite(row_label(path, r) + ": " + e.what());
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<QuantilePoint> read_quantile_csv(const fs::path& path, std::size_t grid, double scale) {
    const auto rows = read_csv_rows(path);
    if (grid != 0 && rows.front().size() != grid)
        throw InvalidInput(path.string() + ": quantile grid has " + std::to_string(rows.front().size()) +
                           " columns, expected " + std::to_string(grid));
    std::vector<QuantilePoint> out;
    for (const auto& row : rows) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(row.data(), Eigen::Index(row.size())) * scale;
        out.push_back(make_quantile_point(std::move(v)));
    }
    return out;
}

std::vector<QuantilePoint> read_sample_dir(const fs::path& dir, std::size_t grid, double scale) {
    if (!fs::is_directory(dir)) throw InvalidInput("'" + dir.string() + "' is not a directory");
    if (grid == 0) throw InvalidInput("sample mode needs a positive quantile grid");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InvalidInput("'" + dir.string() + "' contains no sample files");

    std::vector<QuantilePoint> out;
    for (const auto& f : files) {
        std::vector<double> samples;
        for (const auto& row : read_csv_rows(f))
            for (double v : row) samples.push_back(v * scale);
        out.push_back(quantile_from_samples(samples, grid));
    }
    return out;
}

std::vector<double> vectorize(const VecPoint& p) { return {p.data(), p.data() + p.size()}; }

std::vector<double> vectorize(const SpdPoint& p) {
    std::vector<double> out;
    out.reserve(std::size_t(p.size()));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) out.push_back(p(i, j));
    return out;
}

std::vector<double> vectorize(const QuantilePoint& p) {
    return {p.values.data(), p.values.data() + p.values.size()};
}

template <class P>
void write_points_csv(const fs::path& path, const std::vector<P>& points) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out.precision(17);
    for (const auto& p : points) {
        const auto v = vectorize(p);
        for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << v[k];
        out << '\n';
    }
    if (!out) throw InvalidInput("write to '" + path.string() + "' failed");
}

template void write_points_csv(const fs::path&, const std::vector<VecPoint>&);
template void write_points_csv(const fs::path&, const std::vector<SpdPoint>&);
template void write_points_csv(const fs::path&, const std::vector<QuantilePoint>&);

nlohmann::json cv_to_json(const CvResult& cv, int folds, std::uint64_t seed) {
    return {{"best_lambda", cv.best_lambda}, {"lambdas", cv.lambdas}, {"errors", cv.errors},
            {"folds", folds},                {"seed", seed}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base) {
    if (!j.is_object()) throw InvalidInput("solver config must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "lambda") base.lambda = value.get<double>();
        else if (key == "step_scale") base.step_scale = value.get<double>();
        else if (key == "max_cycles") base.max_cycles = value.get<int>();
        else if (key == "rel_tol") base.rel_tol = value.get<double>();
        else if (key == "window") base.window = value.get<int>();
        else if (key == "jump_merge_tol") base.jump_merge_tol = value.get<double>();
        else throw InvalidInput("unknown solver option '" + key + "'");
    }
    return base;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidInput("simulation config must be a JSON object");
    SimConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "space") c.space = parse_sim_space(value.get<std::string>());
            else if (key == "setting") c.setting = parse_setting(value.get<std::string>());
            else if (key == "n") c.n = value.get<std::size_t>();
            else if (key == "replicates") c.replicates = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "folds") c.folds = value.get<int>();
            else if (key == "quantile_grid") c.quantile_grid = value.get<std::size_t>();
            else if (key == "rise_grid") c.rise_grid = value.get<std::size_t>();
            else if (key == "threads") c.threads = value.get<unsigned>();
            else if (key == "solver") c.solver = solver_config_from_json(value, c.solver);
            else if (key == "lambda_grid") {
                for (const auto& [gk, gv] : value.items()) {
                    if (gk == "lo") c.lambda_grid.lo = gv.get<double>();
                    else if (gk == "hi") c.lambda_grid.hi = gv.get<double>();
                    else if (gk == "count") c.lambda_grid.count = gv.get<int>();
                    else if (gk == "log") c.lambda_grid.log_spaced = gv.get<bool>();
                    else if (gk == "relative") c.lambda_grid.relative = gv.get<bool>();
                    else throw InvalidInput("unknown lambda_grid option '" + gk + "'");
                }
            } else if (key == "comment") {
            } else {
                throw InvalidInput("unknown simulation option '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("simulation config: ") + e.what());
    }
    validate(c);
    return c;
}

SimConfig read_sim_config(const fs::path& path) {
    auto in = open_input(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
    return sim_config_from_json(j);
}

nlohmann::json sim_report_to_json(const SimReport& r) {
    const auto& c = r.config;
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& x : r.replicates)
        reps.push_back({{"index", x.index}, {"seed", x.seed}, {"lambda", x.lambda}, {"rise", x.rise},
                        {"jumps", x.jumps}, {"cycles", x.cycles}});
    return {{"schema_version", kSchemaVersion},
            {"config",
             {{"space", to_string(c.space)},
              {"setting", to_string(c.setting)},
              {"n", c.n},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"folds", c.folds},
              {"quantile_grid", c.quantile_grid},
              {"rise_grid", c.rise_grid},
              {"lambda_grid",
               {{"lo", c.lambda_grid.lo},
                {"hi", c.lambda_grid.hi},
                {"count", c.lambda_grid.count},
                {"log", c.lambda_grid.log_spaced},
                {"relative", c.lambda_grid.relative}}},
              {"solver",
               {{"step_scale", c.solver.step_scale},
                {"max_cycles", c.solver.max_cycles},
                {"rel_tol", c.solver.rel_tol},
                {"window", c.solver.window},
                {"jump_merge_tol", c.solver.jump_merge_tol}}}}},
            {"mean_rise", r.mean_rise},
            {"sd_rise", r.sd_rise},
            {"min_rise", r.min_rise},
            {"max_rise", r.max_rise},
            {"replicates", std::move(reps)}};
}

void write_replicates_csv(const fs::path& path, const SimReport& report) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out.precision(17);
    out << "replicate,seed,lambda,rise,jumps,cycles\n";
    for (const auto& x : report.replicates)
        out << x.index << ',' << x.seed << ',' << x.lambda << ',' << x.rise << ',' << x.jumps << ',' << x.cycles
            << '\n';
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw InvalidInput("write to '" + path.string() + "' failed");
}

}  // namespace tvfr
