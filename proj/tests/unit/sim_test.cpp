#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tvfr/rng.hpp"
#include "tvfr/sim.hpp"

using namespace tvfr;

TEST_CASE("bump function") {
    CHECK(phi(0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi(0.75) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi(0.5) == doctest::Approx(2.0 / (1.0 + std::exp(-10.0))).epsilon(1e-15));
    CHECK(phi(0.5) == doctest::Approx(1.99990920).epsilon(1e-8));
    CHECK(phi(0.0) == doctest::Approx(9.0796e-5).epsilon(1e-4));
    CHECK(phi(1.0) == doctest::Approx(phi(0.0)).epsilon(1e-12));
    CHECK_THROWS_AS(phi(-0.1), InvalidInput);
    CHECK_THROWS_AS(phi(1.1), InvalidInput);
}

TEST_CASE("thirds") {
    CHECK(third_of(0.0) == 0);
    CHECK(third_of(0.33) == 0);
    CHECK(third_of(1.0 / 3.0) == 1);
    CHECK(third_of(0.66) == 1);
    CHECK(third_of(2.0 / 3.0) == 2);
    CHECK(third_of(1.0) == 2);
}

TEST_CASE("mean functions") {
    const auto spd1 = std::get<SpdMeanFunction>(mean_function("spd", Setting::I));
    CHECK((spd1(0.5) - 2.0 * SpdPoint::Identity(3, 3)).norm() == 0.0);
    CHECK((spd1(0.1) - SpdPoint::Identity(3, 3)).norm() == 0.0);
    CHECK((spd1(0.9) - 3.0 * SpdPoint::Identity(3, 3)).norm() == 0.0);

    const auto spd2 = std::get<SpdMeanFunction>(mean_function("spd-ai", Setting::II));
    const double p0 = 2.0 / (1.0 + std::exp(10.0));
    CHECK((spd2(0.0) - (1.0 + p0) * SpdPoint::Identity(3, 3)).norm() < 1e-15);

    const auto w2 = std::get<WassMeanFunction>(mean_function("wasserstein", Setting::II, 200));
    const Wasserstein2 w(200);
    CHECK((w2(0.25).values - w.gaussian(1.0, 2.0).values).norm() < 1e-12);
    const auto w1 = std::get<WassMeanFunction>(mean_function("wasserstein", Setting::I, 200));
    CHECK(w1(0.1) == w.gaussian(0.0, 1.0));
    CHECK(w1(0.5) == w.gaussian(1.0, 1.5));
    CHECK(w1(0.9) == w.gaussian(2.0, 2.0));

    CHECK_THROWS_AS(mean_function("euclidean", Setting::I), InvalidInput);
    CHECK_THROWS_AS(parse_setting("III"), InvalidInput);
    CHECK(parse_setting("2") == Setting::II);
}

TEST_CASE("SPD generator") {
    CounterRng rng(1);
    const SpdPoint mu = 2.0 * SpdPoint::Identity(3, 3);
    CHECK((gen_spd(mu, rng, 0.0) - mu).norm() < 1e-14);
    CHECK_THROWS_AS(gen_spd(SpdPoint::Identity(2, 2), rng), InvalidInput);

    int bad = 0;
    std::vector<SpdPoint> draws;
    const SpdPoint id = SpdPoint::Identity(3, 3);
    for (int i = 0; i < 10000; ++i) {
        draws.push_back(gen_spd(id, rng));
        try {
            validate_spd(draws.back());
        } catch (const Error&) {
            ++bad;
        }
    }
    CHECK(bad == 0);
    CHECK(d_ai(spd_frechet_mean_ai(draws), id) <= 0.03);
}

TEST_CASE("SPD generator is unbiased at a non-identity mean") {
    CounterRng rng(2);
    SpdPoint mu(3, 3);
    mu << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5;
    std::vector<SpdPoint> draws;
    for (int i = 0; i < 10000; ++i) draws.push_back(gen_spd(mu, rng));
    CHECK(d_ai(spd_frechet_mean_ai(draws), mu) <= 0.03);
}

TEST_CASE("Wasserstein generator moments") {
    const Wasserstein2 w(1000);
    for (const auto& base : {w.gaussian(0.0, 1.0), w.gaussian(1.0, 2.0)}) {
        const Moments m = quantile_moments(base);
        CounterRng rng(3);
        const int draws = 100000;
        double sn = 0, sn2 = 0, ss = 0, ss2 = 0;
        int counts[5] = {0, 0, 0, 0, 0};
        for (int i = 0; i < draws; ++i) {
            const WassNoise z = draw_wass_noise(m, rng);
            sn += z.nu;
            sn2 += z.nu * z.nu;
            ss += z.sigma;
            ss2 += z.sigma * z.sigma;
            counts[z.k + 2]++;
        }
        const double mn = sn / draws, ms = ss / draws;
        const double se_n = std::sqrt((sn2 / draws - mn * mn) / draws);
        const double se_s = std::sqrt((ss2 / draws - ms * ms) / draws);
        CHECK(std::abs(mn - m.mean) <= 3.0 * se_n);
        CHECK(std::abs(ms - m.sd) <= 3.0 * se_s);
        CHECK(counts[2] == 0);
        for (int k : {0, 1, 3, 4}) CHECK(std::abs(counts[k] - draws / 4) < 1000);
    }
}

TEST_CASE("Wasserstein generator output is monotone and averages to the mean") {
    const Wasserstein2 w(1000);
    const QuantilePoint mu = w.gaussian(0.0, 1.0);
    CounterRng rng(4);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(1000);
    int bad = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        const QuantilePoint y = gen_wass(w, mu, rng);
        for (Eigen::Index k = 1; k < y.values.size(); ++k)
            if (y.values(k) < y.values(k - 1)) ++bad;
        acc += y.values;
    }
    CHECK(bad == 0);
    CHECK(w2_distance(QuantilePoint{acc / draws}, mu) <= 0.02);
    CHECK_THROWS_AS(gen_wass(w, w.gaussian(1.0, 0.0), rng), InvalidInput);
    CHECK_THROWS_AS(gen_wass(w, Wasserstein2(10).gaussian(0, 1), rng), InvalidInput);
}

TEST_CASE("RISE") {
    const SpdAffineInvariant s;
    const SpdMeanFunction truth{Setting::I};
    const StepFunction<SpdPoint> exact({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0},
                                       {SpdPoint::Identity(3, 3), 2.0 * SpdPoint::Identity(3, 3),
                                        3.0 * SpdPoint::Identity(3, 3)});
    CHECK(rise(s, exact, truth) == 0.0);

    const Wasserstein2 w(100);
    const QuantilePoint c = w.gaussian(0.5, 1.0), m = w.gaussian(0.0, 1.0);
    const StepFunction<QuantilePoint> flat({0.0, 1.0}, {c});
    auto constant_truth = [&](double) { return m; };
    CHECK(rise(w, flat, constant_truth) == doctest::Approx(w2_distance(c, m)).epsilon(1e-12));

    // Smooth truth against a coarse step fit: the quadrature is stable under refinement.
    const SpdMeanFunction smooth{Setting::II};
    std::vector<double> b = {0.0};
    std::vector<SpdPoint> v;
    for (int k = 0; k < 10; ++k) {
        v.push_back(smooth((k + 0.5) / 10.0));
        b.push_back((k + 1) / 10.0);
    }
    b.back() = 1.0;
    const StepFunction<SpdPoint> coarse(b, v);
    const double r1 = rise(s, coarse, smooth, 1001), r2 = rise(s, coarse, smooth, 10001);
    CHECK(std::abs(r1 - r2) < 1e-3 * r2);

    CHECK_THROWS_AS(rise_nodes(0), InvalidInput);
    CHECK(rise_nodes(4) == std::vector<double>{0.125, 0.375, 0.625, 0.875});
}

TEST_CASE("lambda grids") {
    LambdaGrid g;
    const auto v = lambda_values(g, 2.0);
    REQUIRE(v.size() == 20);
    CHECK(v.front() == doctest::Approx(2e-3));
    CHECK(v.back() == doctest::Approx(2.0));
    CHECK(v[1] / v[0] == doctest::Approx(v[19] / v[18]));
    g.log_spaced = false;
    g.lo = 0.0;
    g.count = 3;
    CHECK(lambda_values(g) == std::vector<double>{0.0, 0.5, 1.0});
    g.count = 1;
    CHECK(lambda_values(g) == std::vector<double>{0.0});  // a one-point grid is its lower end
    g.log_spaced = true;
    CHECK_THROWS_AS(lambda_values(g), InvalidInput);
}

TEST_CASE("simulated series are deterministic in the seed") {
    const auto a = simulate_spd_series(Setting::I, 20, 7), b = simulate_spd_series(Setting::I, 20, 7);
    const auto c = simulate_spd_series(Setting::I, 20, 8);
    REQUIRE(a.size() == 20);
    CHECK(a.design().front() == 0.0);
    CHECK(a.design().back() == 1.0);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < 20; ++i) {
        same = same && a[i] == b[i];
        differ = differ || !(a[i] == c[i]);
    }
    CHECK(same);
    CHECK(differ);
    const Wasserstein2 w(100);
    const auto wa = simulate_wass_series(w, Setting::II, 15, 3), wb = simulate_wass_series(w, Setting::II, 15, 3);
    for (std::size_t i = 0; i < 15; ++i) CHECK(wa[i] == wb[i]);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(5, 9) == derive_seed(5, 9));
    CounterRng a(11), b(11);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    CounterRng u(12);
    for (int i = 0; i < 10000; ++i) {
        const double x = u.uniform();
        CHECK((x > 0.0 && x < 1.0));
    }
}

TEST_CASE("gamma and normal draws have the right moments") {
    CounterRng rng(13);
    for (double shape : {0.3, 0.5, 2.0, 8.0}) {
        const double rate = 1.7;
        double s = 0, s2 = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double x = gamma_draw(rng, shape, rate);
            CHECK(x >= 0.0);
            s += x;
            s2 += x * x;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        const double true_var = shape / (rate * rate);
        CHECK(std::abs(mean - shape / rate) <= 4.0 * std::sqrt(true_var / n));
        CHECK(var == doctest::Approx(true_var).epsilon(0.05));
    }
    double s = 0, s2 = 0;
    for (int i = 0; i < 100000; ++i) {
        const double z = standard_normal(rng);
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / 1e5) < 4.0 / std::sqrt(1e5));
    CHECK(s2 / 1e5 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("experiment reports are deterministic and thread-independent") {
    SimConfig cfg;
    cfg.space = SimSpace::Spd;
    cfg.setting = Setting::I;
    cfg.n = 20;
    cfg.replicates = 1;
    cfg.lambda_grid.count = 4;
    cfg.solver.max_cycles = 30;
    const auto a = run_experiment(cfg), b = run_experiment(cfg);
    REQUIRE(a.replicates.size() == 1);
    CHECK(a.replicates[0].rise == b.replicates[0].rise);
    CHECK(a.replicates[0].lambda == b.replicates[0].lambda);
    CHECK(a.sd_rise == 0.0);

    cfg.replicates = 3;
    cfg.space = SimSpace::Wasserstein;
    cfg.quantile_grid = 100;
    const auto serial = run_experiment(cfg);
    cfg.threads = 3;
    const auto parallel = run_experiment(cfg);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(serial.replicates[r].rise == parallel.replicates[r].rise);
        CHECK(serial.replicates[r].seed == derive_seed(cfg.seed, r));
    }
    CHECK(serial.mean_rise == parallel.mean_rise);
    CHECK(summary_line(serial).rfind("wasserstein I  n=20", 0) == 0);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.n = 3;
    CHECK_THROWS_AS(validate(cfg), InvalidInput);
    cfg = SimConfig{};
    cfg.replicates = 0;
    CHECK_THROWS_AS(validate(cfg), InvalidInput);
    cfg = SimConfig{};
    cfg.folds = 1;
    CHECK_THROWS_AS(validate(cfg), InvalidInput);
}
