#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "support/tv1d_oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = TVFR_CLI_PATH;
const fs::path kFixtures = TVFR_FIXTURE_DIR;

struct Run {
    int code = -1;
    std::string out, err;
};

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& tag) {
        path = fs::temp_directory_path() / ("tvfr_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run cli(const Workdir& w, const std::string& args) {
    const auto out = w / "stdout.txt", err = w / "stderr.txt";
    const std::string cmd = "'" + kCli.string() + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

std::vector<double> fixture_values() {
    std::vector<double> y;
    std::ifstream in(kFixtures / "euclid_steps.csv");
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') y.push_back(std::stod(line));
    return y;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_lines(const fs::path& p, const std::vector<std::string>& rows) {
    std::ofstream out(p);
    for (const auto& r : rows) out << r << '\n';
}

}  // namespace

TEST_CASE("fit matches the exact univariate solution on the fixture") {
    Workdir w("oracle");
    const auto y = fixture_values();
    REQUIRE(y.size() == 40);
    const double lambda = 0.05;
    const auto r = cli(w, "fit --space euclidean --input " + q(kFixtures / "euclid_steps.csv") + " --output " +
                              q(w / "fit.json") + " --lambda 0.05 --step-scale 1 --max-cycles 400000 --rel-tol 1e-15");
    REQUIRE(r.code == 0);
    const auto doc = read_json(w / "fit.json");
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("kind") == "fit");
    CHECK(doc.at("n") == 40);
    const auto exact = tvfr::testing::tv1d_exact(y, double(y.size()) * lambda / 2.0);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(doc.at("fitted")[i][0].get<double>() - exact[i]));
    CHECK(err < 1e-4);
    CHECK(doc.at("design").front() == 0.0);
    CHECK(doc.at("design").back() == 1.0);
}

TEST_CASE("lambda zero returns the input and round-trips through the fitted csv") {
    Workdir w("zero");
    const auto r = cli(w, "fit --space euclidean --input " + q(kFixtures / "euclid_steps.csv") + " --output " +
                              q(w / "a.json") + " --fitted-csv " + q(w / "a.csv") + " --lambda 0");
    REQUIRE(r.code == 0);
    const auto y = fixture_values();
    const auto a = read_json(w / "a.json");
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(a.at("fitted")[i][0].get<double>() == y[i]);

    const auto r2 = cli(w, "fit --space euclidean --input " + q(w / "a.csv") + " --output " + q(w / "b.json") +
                               " --fitted-csv " + q(w / "b.csv") + " --lambda 0");
    REQUIRE(r2.code == 0);
    CHECK(read_json(w / "b.json").at("fitted") == a.at("fitted"));
    CHECK(slurp(w / "b.csv") == slurp(w / "a.csv"));
}

TEST_CASE("constant input gives a constant fit in every space") {
    Workdir w("const");
    write_lines(w / "e.csv", std::vector<std::string>(12, "1.5,-2"));
    write_lines(w / "s.csv", std::vector<std::string>(12, "2,0.5,0.5,1"));
    write_lines(w / "q.csv", std::vector<std::string>(12, "-1,0,0.5,2"));
    for (const auto& [space, file] : std::vector<std::pair<std::string, std::string>>{
             {"euclidean", "e.csv"}, {"spd-ai", "s.csv"}, {"spd-le", "s.csv"}, {"wasserstein", "q.csv"}}) {
        CAPTURE(space);
        const auto r = cli(w, "fit --space " + space + " --input " + q(w / file) + " --output " + q(w / "o.json") +
                                  " --lambda 0.3 --max-cycles 50");
        REQUIRE(r.code == 0);
        const auto doc = read_json(w / "o.json");
        const auto& first = doc.at("fitted")[0];
        for (const auto& row : doc.at("fitted"))
            for (std::size_t k = 0; k < row.size(); ++k)
                CHECK(row[k].get<double>() == doctest::Approx(first[k].get<double>()).epsilon(1e-12));
        CHECK(doc.at("jumps").empty());
    }
}

TEST_CASE("cross-validation over a one-point grid selects that lambda") {
    Workdir w("cv");
    const std::string base = "cv --space euclidean --input " + q(kFixtures / "euclid_steps.csv") + " --max-cycles 200";
    const auto r = cli(w, base + " --output " + q(w / "one.json") + " --lambda-grid 0.07:0.07:1:lin");
    REQUIRE(r.code == 0);
    const auto one = read_json(w / "one.json");
    CHECK(one.at("kind") == "cv");
    CHECK(one.at("lambda") == 0.07);
    CHECK(one.at("cv").at("best_lambda") == 0.07);

    REQUIRE(cli(w, base + " --output " + q(w / "a.json") + " --lambda-grid 0.001:1:8:log --seed 11").code == 0);
    REQUIRE(cli(w, base + " --output " + q(w / "b.json") + " --lambda-grid 0.001:1:8:log --seed 11 --threads 2").code == 0);
    const auto a = read_json(w / "a.json"), b = read_json(w / "b.json");
    CHECK(a.at("cv").at("best_lambda") == b.at("cv").at("best_lambda"));
    CHECK(a.at("cv").at("errors") == b.at("cv").at("errors"));
    CHECK(a.at("cv").at("lambdas").size() == 8);
}

TEST_CASE("jump selection on a two-jump SPD series") {
    Workdir w("jumps");
    std::vector<std::string> rows;
    for (int i = 0; i < 60; ++i) {
        const double d = i < 20 ? 1.0 : (i < 40 ? 4.0 : 1.5);
        const double e = 0.01 * std::sin(3.0 * i);
        std::ostringstream s;
        s.precision(17);
        s << d + e << "," << 0.1 * e << "," << 0.1 * e << "," << d - e;
        rows.push_back(s.str());
    }
    write_lines(w / "s.csv", rows);
    const std::string base = "jumps --space spd-ai --input " + q(w / "s.csv") + " --step-scale 1 --max-cycles 3000";

    const auto r = cli(w, base + " --output " + q(w / "two.json") + " --target-jumps 2 --lambda-range 1e-4:10");
    REQUIRE(r.code == 0);
    const auto two = read_json(w / "two.json");
    CHECK(two.at("kind") == "jumps");
    CHECK(two.at("exact") == true);
    CHECK(two.at("achieved_jumps") == 2);
    CHECK(two.at("jumps") == json::array({19, 39}));

    const auto r0 = cli(w, base + " --output " + q(w / "zero.json") + " --target-jumps 0 --lambda-range 1e-4:10");
    REQUIRE(r0.code == 0);
    CHECK(read_json(w / "zero.json").at("jumps").empty());

    // Every lambda in this bracket fuses the series completely.
    const auto bad = cli(w, base + " --output " + q(w / "bad.json") + " --target-jumps 2 --lambda-range 5:10");
    CHECK(bad.code == 2);
    CHECK(bad.err.rfind("error[", 0) == 0);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
}

TEST_CASE("input and usage errors exit with code 2 and one error line") {
    Workdir w("errors");
    write_lines(w / "asym.csv", {"1,0,0,1", "2,1,0,2"});
    write_lines(w / "ok.csv", {"1", "2"});
    for (const std::string& args :
         {"fit --space spd-ai --input " + q(w / "asym.csv") + " --output " + q(w / "o.json") + " --lambda 1",
          "fit --space euclidean --input " + q(w / "missing.csv") + " --output " + q(w / "o.json") + " --lambda 1",
          "fit --space euclidean --input " + q(w / "ok.csv") + " --output " + q(w / "o.json") + " --lambda -1",
          "fit --space hyperbolic --input " + q(w / "ok.csv") + " --output " + q(w / "o.json") + " --lambda 1",
          "cv --space euclidean --input " + q(w / "ok.csv") + " --output " + q(w / "o.json") + " --lambda-grid 1:2",
          std::string("frobnicate")}) {
        CAPTURE(args);
        const auto r = cli(w, args);
        CHECK(r.code == 2);
        CHECK(r.err.rfind("error[", 0) == 0);
        CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    }
    const auto r = cli(w, "fit --space spd-ai --input " + q(w / "asym.csv") + " --output " + q(w / "o.json") + " --lambda 1");
    CHECK(r.err.find("row 2") != std::string::npos);
}

TEST_CASE("simulate smoke run is fast and independent of the worker count") {
    Workdir w("sim");
    write_lines(w / "cfg.json", {R"({"space": "spd", "setting": "I", "n": 50, "replicates": 2, "seed": 3,)",
                                 R"( "lambda_grid": {"count": 6}, "solver": {"max_cycles": 100}})"});
    const auto t0 = std::chrono::steady_clock::now();
    const auto a = cli(w, "simulate --config " + q(w / "cfg.json") + " --output " + q(w / "a") + " --parallel 1");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    REQUIRE(a.code == 0);
    CHECK(secs < 60.0);
    CHECK(a.out.rfind("spd", 0) == 0);
    const auto b = cli(w, "simulate --config " + q(w / "cfg.json") + " --output " + q(w / "b") + " --parallel 2");
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    const auto ra = read_json(w / "a" / "report.json"), rb = read_json(w / "b" / "report.json");
    CHECK(ra.at("replicates") == rb.at("replicates"));
    CHECK(ra.at("replicates").size() == 2);
    CHECK(slurp(w / "a" / "replicates.csv") == slurp(w / "b" / "replicates.csv"));
}

TEST_CASE("shipped experiment configs parse") {
    Workdir w("configs");
    int seen = 0;
    for (const auto& e : fs::directory_iterator(TVFR_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        ++seen;
        // Shrunk copy: only parsing and the plumbing are under test here.
        std::ifstream in(e.path());
        json cfg = json::parse(in);
        cfg["replicates"] = 1;
        cfg["n"] = 50;
        cfg["lambda_grid"]["count"] = 1;
        cfg["solver"]["max_cycles"] = 10;
        std::ofstream(w / "c.json") << cfg.dump();
        CAPTURE(e.path().string());
        CHECK(cli(w, "simulate --config " + q(w / "c.json") + " --output " + q(w / "out")).code == 0);
    }
    CHECK(seen == 8);
}
