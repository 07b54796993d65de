#include "ssqr/geometry.hpp"

#include "ssqr/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ssqr::geo {

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("cannot normalise zero vector");
    return v * (1.0 / n);
}

double central_angle(const Vec3& a, const Vec3& b) {
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

double normalize_longitude(double lon) {
    double r = std::remainder(lon, kTwoPi);  // [-pi, pi]
    if (r <= -kPi) r += kTwoPi;
    return r;
}

GroundStation GroundStation::from_degrees(double lat_deg, double lon_deg) {
    GroundStation g{deg2rad(lat_deg), normalize_longitude(deg2rad(lon_deg))};
    g.validate();
    return g;
}

GroundStation GroundStation::from_unit(const Vec3& u) {
    const Vec3 n = normalized(u);
    return {std::asin(std::clamp(n.z, -1.0, 1.0)), normalize_longitude(std::atan2(n.y, n.x))};
}

Vec3 GroundStation::unit() const {
    const double c = std::cos(latitude_rad);
    return {c * std::cos(longitude_rad), c * std::sin(longitude_rad), std::sin(latitude_rad)};
}

void GroundStation::validate() const {
    if (!(std::abs(latitude_rad) <= kPi / 2.0))
        throw std::invalid_argument("latitude outside [-90, 90] deg");
    if (!std::isfinite(longitude_rad)) throw std::invalid_argument("longitude not finite");
}

void OverpassSpec::validate() const {
    if (!(baseline_km > 0.0)) throw std::invalid_argument("baseline_km must be > 0");
    if (baseline_km >= kPi * kEarthRadiusKm)
        throw std::invalid_argument("baseline_km must be shorter than half a great circle");
    if (!(altitude_km > 0.0)) throw std::invalid_argument("altitude_km must be > 0");
    if (!std::isfinite(offset_km)) throw std::invalid_argument("offset_km must be finite");
    if (!std::isfinite(crossing_angle_rad))
        throw std::invalid_argument("crossing angle must be finite");
    if (!(min_elevation_rad >= 0.0 && min_elevation_rad < kPi / 2.0))
        throw std::invalid_argument("min elevation must lie in [0, 90) deg");
}

OverpassSpec canonicalize(const OverpassSpec& spec) {
    OverpassSpec out = spec;
    double phi = std::fmod(spec.crossing_angle_rad, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    if (phi > kPi) phi = kTwoPi - phi;
    out.crossing_angle_rad = phi;
    return out;
}

OverpassSpec zenith_zenith_pass() { return {}; }

OverpassSpec symmetric_pass() {
    OverpassSpec s;
    s.crossing_angle_rad = kPi / 2.0;
    return s;
}

OverpassSpec zenith_a90_pass() {
    OverpassSpec s;
    s.offset_km = 500.0;
    s.crossing_angle_rad = kPi / 2.0;
    return s;
}

OverpassSpec zenith_a45_pass() {
    OverpassSpec s;
    s.offset_km = 500.0;
    s.crossing_angle_rad = kPi / 4.0;
    return s;
}

double angular_rate(double altitude_km) {
    const double r = kEarthRadiusKm + altitude_km;
    return std::sqrt(kEarthMuKm3PerS2 / (r * r * r));
}

double orbital_period(double altitude_km) { return kTwoPi / angular_rate(altitude_km); }

double max_central_angle(double altitude_km, double min_elevation_rad) {
    const double r = kEarthRadiusKm + altitude_km;
    return std::acos(kEarthRadiusKm * std::cos(min_elevation_rad) / r) - min_elevation_rad;
}

ElevationRange elevation_slant_from_angle(double beta, double altitude_km) {
    const double re = kEarthRadiusKm;
    const double r = re + altitude_km;
    const double cb = std::cos(beta);
    const double slant = std::sqrt(re * re + r * r - 2.0 * re * r * cb);
    const double s = std::clamp((r * cb - re) / slant, -1.0, 1.0);
    return {std::asin(s), slant};
}

ElevationRange elevation_slant(const Vec3& sub_satellite, const Vec3& station, double altitude_km) {
    if (!(altitude_km > 0.0)) throw std::invalid_argument("altitude_km must be > 0");
    return elevation_slant_from_angle(central_angle(sub_satellite, station), altitude_km);
}

namespace {

// Canonical layout: midpoint at (1,0,0), baseline along the equator, A west.
struct Layout {
    Vec3 a, b, p, d;
};

Layout canonical_layout(const OverpassSpec& spec) {
    const double half = spec.baseline_km / (2.0 * kEarthRadiusKm);
    const double lon_p = -spec.offset_km / kEarthRadiusKm;
    Layout l;
    l.a = {std::cos(half), -std::sin(half), 0.0};
    l.b = {std::cos(half), std::sin(half), 0.0};
    l.p = {std::cos(lon_p), std::sin(lon_p), 0.0};
    const Vec3 toward_b{-std::sin(lon_p), std::cos(lon_p), 0.0};
    const Vec3 clockwise = cross(toward_b, l.p);
    l.d = std::cos(spec.crossing_angle_rad) * toward_b + std::sin(spec.crossing_angle_rad) * clockwise;
    return l;
}

}  // namespace

PassGeometry::PassGeometry(const OverpassSpec& spec)
    : h_(spec.altitude_km), theta_min_(spec.min_elevation_rad), omega_(0.0) {
    spec.validate();
    const Layout l = canonical_layout(spec);
    a_ = l.a;
    b_ = l.b;
    p_ = l.p;
    d_ = l.d;
    omega_ = ssqr::geo::angular_rate(h_);
}

PassGeometry::PassGeometry(const Vec3& station_a, const Vec3& station_b, const Vec3& crossing_point,
                           const Vec3& direction, double altitude_km, double min_elevation_rad)
    : a_(normalized(station_a)),
      b_(normalized(station_b)),
      p_(normalized(crossing_point)),
      h_(altitude_km),
      theta_min_(min_elevation_rad),
      omega_(ssqr::geo::angular_rate(altitude_km)) {
    // Remove any radial component so the track is a proper great circle.
    d_ = normalized(direction - dot(direction, p_) * p_);
}

Vec3 PassGeometry::ground_track(double t) const {
    const double ang = omega_ * t;
    return std::cos(ang) * p_ + std::sin(ang) * d_;
}

LinkSample PassGeometry::sample(double t) const {
    const Vec3 s = ground_track(t);
    const ElevationRange ea = elevation_slant(s, a_, h_);
    const ElevationRange eb = elevation_slant(s, b_, h_);
    LinkSample out;
    out.t = t;
    out.range_a_km = ea.slant_km;
    out.range_b_km = eb.slant_km;
    out.elevation_a_rad = ea.elevation_rad;
    out.elevation_b_rad = eb.elevation_rad;
    out.in_view_a = ea.elevation_rad >= theta_min_;
    out.in_view_b = eb.elevation_rad >= theta_min_;
    return out;
}

double PassGeometry::closest_approach_time(const Vec3& station) const {
    return std::atan2(dot(d_, station), dot(p_, station)) / omega_;
}

// Along the track, cos(beta(t)) = c * cos(omega t - psi) with c the cosine of
// the track offset; the elevation threshold is a threshold on beta.
std::optional<VisibilityWindow> PassGeometry::station_window(const Vec3& station) const {
    const double p = dot(p_, station);
    const double q = dot(d_, station);
    const double c = std::hypot(p, q);
    const double cos_beta_max = std::cos(max_central_angle(h_, theta_min_));
    if (c < cos_beta_max || c == 0.0) return std::nullopt;
    const double psi = std::atan2(q, p);
    const double half = std::acos(std::min(1.0, cos_beta_max / c));
    return VisibilityWindow{(psi - half) / omega_, (psi + half) / omega_};
}

std::optional<VisibilityWindow> PassGeometry::visibility_window() const {
    auto wa = station_window(a_);
    auto wb = station_window(b_);
    if (!wa || !wb) return std::nullopt;
    // Bring B's interval onto the same revolution as A's.
    const double period = kTwoPi / omega_;
    const double ca = 0.5 * (wa->t_start + wa->t_end);
    const double cb = 0.5 * (wb->t_start + wb->t_end);
    const double shift = period * std::round((ca - cb) / period);
    wb->t_start += shift;
    wb->t_end += shift;
    const double start = std::max(wa->t_start, wb->t_start);
    const double end = std::min(wa->t_end, wb->t_end);
    if (!(start <= end)) return std::nullopt;
    return VisibilityWindow{start, end};
}

double PassGeometry::dmin_km(const Vec3& station) const {
    const Vec3 pole = normalized(cross(p_, d_));
    return kEarthRadiusKm * std::asin(std::min(1.0, std::abs(dot(pole, station))));
}

Vec3 ground_track(const OverpassSpec& spec, double t) { return PassGeometry(spec).ground_track(t); }

std::optional<VisibilityWindow> visibility_window(const OverpassSpec& spec) {
    return PassGeometry(spec).visibility_window();
}

double dmin_km(const OverpassSpec& spec, Station which) {
    const PassGeometry g(spec);
    return g.dmin_km(which == Station::a ? g.station_a() : g.station_b());
}

}  // namespace ssqr::geo
