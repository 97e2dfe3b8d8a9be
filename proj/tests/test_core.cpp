#include "doctest.h"
#include "soh/core.hpp"

using namespace soh;

TEST_SUITE("core") {

TEST_CASE("make_grid sizes") {
    const Grid g = make_grid(200, 200, 0.005, 0.005);
    CHECK(g.size() == 40000);
    CHECK_FALSE(g.is_1d());
    CHECK(g.nx * g.dx == doctest::Approx(1.0));
    CHECK(g.periodic());

    const Grid g1 = make_grid(4, 1, 0.25, 1.0);
    CHECK(g1.is_1d());
    CHECK(g1.size() == 4);

    CHECK_THROWS_AS(make_grid(3, 1, 0.25, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(8, 2, 0.25, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(8, 0, 0.25, 1.0), ConfigError);
    CHECK_THROWS_AS(make_grid(8, 1, 0.0, 1.0), ConfigError);
}

TEST_CASE("wrap_index") {
    CHECK(wrap_index(-1, 200) == 199);
    CHECK(wrap_index(200, 200) == 0);
    CHECK(wrap_index(5, 200) == 5);
    for (int n : {1, 4, 7, 200})
        for (int i = -3 * n; i < 3 * n; ++i) {
            CHECK(wrap_index(i + n, n) == wrap_index(i, n));
            const int w = wrap_index(i, n);
            CHECK((w >= 0 && w < n));
        }
}

TEST_CASE("mirror_index reflects about the faces") {
    CHECK(mirror_index(-1, 10) == 0);
    CHECK(mirror_index(-2, 10) == 1);
    CHECK(mirror_index(10, 10) == 9);
    CHECK(mirror_index(11, 10) == 8);
    CHECK(mirror_index(4, 10) == 4);
}

TEST_CASE("grid index mapping") {
    const Grid g = make_grid(6, 5, 0.1, 0.2);
    CHECK(g.index(2, 3) == 3 * 6 + 2);
    CHECK(g.at(-1, -1) == g.index(5, 4));
    CHECK(g.at(6, 5) == g.index(0, 0));
    const Grid t = make_grid(6, 1, 0.1, 1.0, Boundary::transmissive, Boundary::periodic);
    CHECK(t.at(-1, 0) == t.index(0, 0));
    CHECK(t.at(6, 0) == t.index(5, 0));
    CHECK(g.x_center(0) == doctest::Approx(0.05));
    CHECK(g.y_center(4) == doctest::Approx(0.9));
}

TEST_CASE("omega_of") {
    FieldState s(make_grid(4, 1, 0.25, 1.0), 1.0);
    s.rho[0] = 0.8;
    s.q1[0] = 0.8;
    s.rho[1] = 0.5;
    s.q2[1] = 0.25;
    s.q1[2] = 0.6;
    s.q2[2] = 0.8;
    CHECK(omega_of(s, 0).x == 1.0);
    CHECK(omega_of(s, 0).y == 0.0);
    CHECK(omega_of(s, 1).x == 0.0);
    CHECK(omega_of(s, 1).y == 0.5);
    CHECK(norm(omega_of(s, 2)) == doctest::Approx(1.0).epsilon(1e-15));

    // rho * Omega / rho round-trips for unit-ish directions.
    for (double rho : {1e-6, 0.3, 0.7, 0.9999}) {
        for (double th : {0.1, 1.3, 2.9}) {
            s.rho[3] = rho;
            s.q1[3] = rho * std::cos(th);
            s.q2[3] = rho * std::sin(th);
            CHECK(omega_of(s, 3).x == doctest::Approx(std::cos(th)).epsilon(1e-15));
            CHECK(omega_of(s, 3).y == doctest::Approx(std::sin(th)).epsilon(1e-15));
        }
    }
}

TEST_CASE("params validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = [](auto mutate) {
        ModelParams q;
        mutate(q);
        return q;
    };
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.epsilon = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.beta = -1; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.rho_star = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.gamma = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.dt = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.dx = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.dy = -0.1; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.lambda = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(bad([](ModelParams& q) { q.kappa = 1.0; }).validate(), ConfigError);
    CHECK_NOTHROW(bad([](ModelParams& q) {
                      q.kappa = 1.0;
                      q.use_background = true;
                  }).validate());
}

TEST_CASE("total_mass and floor") {
    const Grid g = make_grid(4, 4, 0.25, 0.5);
    std::vector<double> rho(16, 0.5);
    CHECK(total_mass(rho, g) == doctest::Approx(0.5 * 16 * 0.125));
    rho[3] = -1.0;
    rho[4] = 0.0;
    CHECK(apply_density_floor(rho) == 2);
    CHECK(rho[3] == kDensityFloor);
    CHECK(min_value(rho) == kDensityFloor);
    std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(require_finite(bad, "x"), SolverError);
}

}  // TEST_SUITE
