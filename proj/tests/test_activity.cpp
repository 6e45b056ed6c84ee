#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hotspot/activity.hpp"

using namespace hotspot;

namespace {

std::vector<std::array<double, 3>> flat_accel(int n, double g = 9.81) {
    return std::vector<std::array<double, 3>>(n, {0.0, 0.0, g});
}

std::vector<std::array<double, 3>> bumpy_accel(int n) {
    std::vector<std::array<double, 3>> out;
    for (int i = 0; i < n; ++i) out.push_back({0.0, 0.0, 9.81 + (i % 2 ? 1.5 : -1.5)});
    return out;
}

}  // namespace

TEST_CASE("known WiFi dominates everything") {
    SensorSnapshot s;
    s.known_wifi_visible = true;
    s.gsm_towers_in_window = 10;
    s.accel_samples = bumpy_accel(16);
    const auto v = classify_activity(s);
    CHECK_FALSE(v.driving);
    CHECK(v.reason == ActivityReason::KnownWifi);
}

TEST_CASE("tower churn above three means driving") {
    SensorSnapshot s;
    s.gsm_towers_in_window = 4;
    const auto v = classify_activity(s);
    CHECK(v.driving);
    CHECK(v.reason == ActivityReason::GsmHandoff);
    // Exactly three is not enough.
    s.gsm_towers_in_window = 3;
    CHECK_FALSE(classify_activity(s).driving);
}

TEST_CASE("still device with flat accelerometer is not driving") {
    SensorSnapshot s;
    s.gsm_towers_in_window = 1;
    s.accel_samples = flat_accel(16);
    const auto v = classify_activity(s);
    CHECK_FALSE(v.driving);
    CHECK(v.reason == ActivityReason::AccelIdle);
}

TEST_CASE("vibration near gravity reads as driving") {
    SensorSnapshot s;
    s.accel_samples = bumpy_accel(16);
    const auto v = classify_activity(s);
    CHECK(v.driving);
    CHECK(v.reason == ActivityReason::AccelDriving);
    // High variance far from gravity (free fall-ish) is not driving.
    SensorSnapshot odd;
    for (int i = 0; i < 16; ++i) odd.accel_samples.push_back({0.0, 0.0, i % 2 ? 1.0 : 4.0});
    CHECK_FALSE(classify_activity(odd).driving);
}

TEST_CASE("no accelerometer data means no evidence") {
    SensorSnapshot s;
    s.gsm_towers_in_window = 0;
    const auto v = classify_activity(s);
    CHECK_FALSE(v.driving);
    CHECK(v.reason == ActivityReason::NoEvidence);
}

TEST_CASE("deterministic and WiFi-forced") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        SensorSnapshot s;
        s.known_wifi_visible = uni(rng) < 0.3;
        s.gsm_towers_in_window = static_cast<int>(uni(rng) * 8);
        const int n = static_cast<int>(uni(rng) * 20);
        for (int k = 0; k < n; ++k)
            s.accel_samples.push_back({uni(rng), uni(rng), 9.0 + uni(rng) * 2.0});

        const auto v1 = classify_activity(s);
        const auto v2 = classify_activity(s);
        CHECK(v1.driving == v2.driving);
        CHECK(v1.reason == v2.reason);

        SensorSnapshot with_wifi = s;
        with_wifi.known_wifi_visible = true;
        CHECK_FALSE(classify_activity(with_wifi).driving);

        // Cheap evidence wins: whenever WiFi is visible the reason is WiFi,
        // and GSM outranks the accelerometer.
        if (s.known_wifi_visible) CHECK(v1.reason == ActivityReason::KnownWifi);
        else if (s.gsm_towers_in_window > 3) CHECK(v1.reason == ActivityReason::GsmHandoff);
    }
}

TEST_CASE("accelerometer stage is replaceable") {
    SensorSnapshot s;
    s.accel_samples = flat_accel(4);
    const auto always_yes = [](const std::vector<std::array<double, 3>>&,
                               const ActivityParams&) { return true; };
    const auto v = classify_activity(s, {}, always_yes);
    CHECK(v.driving);
    CHECK(v.reason == ActivityReason::AccelDriving);
}
