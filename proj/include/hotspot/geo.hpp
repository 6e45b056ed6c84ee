#pragma once

#include <cmath>
#include <stdexcept>

namespace hotspot {

// Mean Earth radius, spherical model.
inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }

/// A WGS-ish latitude/longitude pair in degrees. Ranges are enforced on
/// construction; the default is (0, 0).
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw std::invalid_argument("latitude out of range [-90,90]");
        if (!(lon >= -180.0 && lon <= 180.0))
            throw std::invalid_argument("longitude out of range [-180,180]");
    }
};

/// Great-circle distance in meters (haversine).
inline double haversine_m(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat);
    const double phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(b.lat - a.lat);
    const double dlam = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlam / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Local equirectangular projection about an origin point. Good to well under
/// a millimeter over the few hundred meters that segment snapping spans.
struct LocalFrame {
    double lat0_rad;
    double coslat0;

    explicit LocalFrame(const GeoPoint& origin)
        : lat0_rad(deg2rad(origin.lat)), coslat0(std::cos(deg2rad(origin.lat))) {}

    void to_xy(const GeoPoint& p, const GeoPoint& origin, double& x, double& y) const {
        x = deg2rad(p.lon - origin.lon) * coslat0 * kEarthRadiusM;
        y = deg2rad(p.lat - origin.lat) * kEarthRadiusM;
    }
};

}  // namespace hotspot
