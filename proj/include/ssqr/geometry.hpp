#pragma once

// Overpass geometry for one satellite and two ground stations.
//
// The Earth is a sphere of radius kEarthRadiusKm and the satellite follows a
// circular orbit, so its ground track is a great circle traversed at the
// orbital angular rate. Earth rotation during a pass is ignored.
//
// An overpass is parameterised by where the ground track crosses the great
// circle through both stations (the baseline): the signed arc offset of the
// crossing point from the baseline midpoint (positive toward station A) and
// the crossing angle, measured clockwise (seen from above) from the A->B
// direction to the direction of travel. t = 0 is the crossing instant.

#include <optional>

namespace ssqr::geo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Vec3& v);
Vec3 normalized(const Vec3& v);
/// Great-circle angle between two unit vectors, robust near 0 and pi.
double central_angle(const Vec3& a, const Vec3& b);

struct GroundStation {
    double latitude_rad = 0.0;
    double longitude_rad = 0.0;

    static GroundStation from_degrees(double lat_deg, double lon_deg);
    static GroundStation from_unit(const Vec3& u);
    Vec3 unit() const;
    /// Throws std::invalid_argument if |latitude| > pi/2. Longitude is
    /// normalised to (-pi, pi] on construction through the factories.
    void validate() const;
};

double normalize_longitude(double lon_rad);

struct OverpassSpec {
    double baseline_km = 1000.0;
    double altitude_km = 500.0;
    double offset_km = 0.0;           ///< Delta, signed, positive toward A
    double crossing_angle_rad = 0.0;  ///< phi, clockwise from A->B
    double min_elevation_rad = 0.17453292519943295;  // 10 deg

    void validate() const;
};

/// Maps phi into [0, pi] by mirror reflection across the baseline great
/// circle, which leaves every range/elevation time series unchanged.
OverpassSpec canonicalize(const OverpassSpec& spec);

// The four reference passes over a 1000 km baseline at 500 km altitude.
OverpassSpec zenith_zenith_pass();
OverpassSpec symmetric_pass();
OverpassSpec zenith_a90_pass();
OverpassSpec zenith_a45_pass();

struct LinkSample {
    double t = 0.0;
    double range_a_km = 0.0;
    double range_b_km = 0.0;
    double elevation_a_rad = 0.0;
    double elevation_b_rad = 0.0;
    bool in_view_a = false;
    bool in_view_b = false;
    // Filled by link::attach_transmittance; zero until then.
    double eta_a = 0.0;
    double eta_b = 0.0;
};

struct VisibilityWindow {
    double t_start = 0.0;
    double t_end = 0.0;

    double duration() const { return t_end - t_start; }
    bool contains(double t) const { return t >= t_start && t <= t_end; }
};

struct ElevationRange {
    double elevation_rad = 0.0;  ///< negative below the horizon
    double slant_km = 0.0;
};

double angular_rate(double altitude_km);    ///< rad/s
double orbital_period(double altitude_km);  ///< s
/// Largest Earth-central angle between sub-satellite point and station at
/// which the satellite is at or above min_elevation.
double max_central_angle(double altitude_km, double min_elevation_rad);

ElevationRange elevation_slant(const Vec3& sub_satellite, const Vec3& station, double altitude_km);
/// Same relations expressed directly in the central angle beta.
ElevationRange elevation_slant_from_angle(double beta_rad, double altitude_km);

/// A great-circle ground track together with the two stations it serves.
/// Built either from an OverpassSpec (canonical layout: baseline on the
/// equator, midpoint at longitude 0, A to the west) or from explicit vectors.
class PassGeometry {
public:
    explicit PassGeometry(const OverpassSpec& spec);
    PassGeometry(const Vec3& station_a, const Vec3& station_b, const Vec3& crossing_point,
                 const Vec3& direction, double altitude_km, double min_elevation_rad);

    const Vec3& station_a() const { return a_; }
    const Vec3& station_b() const { return b_; }
    const Vec3& crossing_point() const { return p_; }
    const Vec3& direction() const { return d_; }
    double altitude_km() const { return h_; }
    double min_elevation_rad() const { return theta_min_; }
    double angular_rate() const { return omega_; }

    Vec3 ground_track(double t) const;
    LinkSample sample(double t) const;

    /// Single-station visibility interval in time for the pass through the
    /// crossing point (nearest pass, |t| below half an orbit).
    std::optional<VisibilityWindow> station_window(const Vec3& station) const;
    std::optional<VisibilityWindow> visibility_window() const;

    double dmin_km(const Vec3& station) const;
    /// Time of closest approach to a station.
    double closest_approach_time(const Vec3& station) const;

private:
    Vec3 a_, b_, p_, d_;
    double h_;
    double theta_min_;
    double omega_;
};

Vec3 ground_track(const OverpassSpec& spec, double t);
std::optional<VisibilityWindow> visibility_window(const OverpassSpec& spec);

enum class Station { a, b };
double dmin_km(const OverpassSpec& spec, Station which);

}  // namespace ssqr::geo
