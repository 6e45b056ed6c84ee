#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hotspot/flash.hpp"

using namespace hotspot;

TEST_CASE("linear buildup") {
    IncidentParams p;
    p.lambda_a = 7.0;
    p.lambda_d = 5.0;
    CHECK(vehicles_at(0.0, p) == 0.0);
    CHECK(vehicles_at(5.0, p) == doctest::Approx(10.0));
    CHECK(vehicles_at(8.0, p) == doctest::Approx(2.0 * vehicles_at(4.0, p)));
}

TEST_CASE("cumulative samples") {
    IncidentParams p;
    p.lambda_a = 2.0;
    p.lambda_d = 1.0;
    p.s_current_min = 2.0;
    CHECK(samples_received(0.0, p) == 0.0);
    CHECK(samples_received(4.0, p) == doctest::Approx(4.0));

    // Quadrature of the buildup/interval integrand matches the closed form.
    const double t_end = 7.0;
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x0 = t_end * i / n, x1 = t_end * (i + 1) / n;
        acc += 0.5 * (vehicles_at(x0, p) + vehicles_at(x1, p)) / p.s_current_min * (x1 - x0);
    }
    CHECK(acc == doctest::Approx(samples_received(t_end, p)).epsilon(1e-6));
}

TEST_CASE("closed-form detection time") {
    IncidentParams p;
    p.lambda_a = 2.0;
    p.lambda_d = 1.0;
    p.s_current_min = 2.0;
    p.n_required = 30;
    CHECK(detection_time_min(p) == doctest::Approx(std::sqrt(120.0)).epsilon(1e-12));
    // Quadrupling the rate differential halves the time.
    IncidentParams q = p;
    q.lambda_a = 5.0;
    CHECK(detection_time_min(q) == doctest::Approx(detection_time_min(p) / 2.0).epsilon(1e-12));
    // Inverse relation with the sample count.
    CHECK(samples_received(detection_time_min(p), p) ==
          doctest::Approx(static_cast<double>(p.n_required)).epsilon(1e-12));
}

TEST_CASE("detection time is monotone in the rate differential") {
    double prev = 1e300;
    for (int i = 1; i <= 20; ++i) {
        IncidentParams p;
        p.lambda_a = 5.0 + i;
        p.lambda_d = 5.0;
        const double t = detection_time_min(p);
        CHECK(t < prev);
        prev = t;
    }
}

TEST_CASE("discrete-event run tracks the fluid model at high rates") {
    IncidentParams p;
    p.lambda_a = 15.0;
    p.lambda_d = 5.0;
    p.s_current_min = 2.0;
    p.n_required = 30;
    const double closed = detection_time_min(p);
    double mean = 0.0;
    const int seeds = 16;
    for (int s = 0; s < seeds; ++s) {
        const auto r = simulate_incident(p, AlertMode::Regular, 1000 + s);
        REQUIRE(r.detected);
        mean += r.detect_min;
    }
    mean /= seeds;
    CHECK(std::abs(mean - closed) / closed < 0.2);
}

TEST_CASE("expedited alerting never loses to regular on a paired seed") {
    IncidentParams p;
    p.lambda_a = 8.0;
    p.lambda_d = 5.0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto reg = simulate_incident(p, AlertMode::Regular, seed);
        const auto exp = simulate_incident(p, AlertMode::Expedited, seed);
        REQUIRE(reg.detected);
        REQUIRE(exp.detected);
        CHECK(exp.detect_min <= reg.detect_min + 1e-12);
    }
}

TEST_CASE("no buildup means timeout") {
    IncidentParams p;
    p.lambda_a = 5.0;
    p.lambda_d = 5.0;
    p.horizon_min = 60.0;
    p.n_required = 1000;
    const auto r = simulate_incident(p, AlertMode::Regular, 3);
    CHECK_FALSE(r.detected);
    CHECK(r.samples_collected < p.n_required);
}

TEST_CASE("sweep rows pair modes per seed") {
    IncidentParams p;
    p.lambda_a = 10.0;
    p.lambda_d = 5.0;
    const auto rows = flash_sweep(p, {1, 2, 3}, Exec::Serial);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].mode == AlertMode::Regular);
    CHECK(rows[1].mode == AlertMode::Expedited);
    CHECK(rows[0].seed == rows[1].seed);
    CHECK(rows[0].closed_form_min == doctest::Approx(detection_time_min(p)));
}
