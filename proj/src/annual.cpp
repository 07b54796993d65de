#include "ssqr/annual.hpp"

#include "ssqr/constants.hpp"
#include "ssqr/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ssqr::annual {

using geo::Vec3;

std::vector<NamedStation> parse_station_catalog(std::istream& in) {
    std::vector<NamedStation> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string name;
        if (!(fields >> name)) continue;
        double lat = 0.0;
        double lon = 0.0;
        std::string extra;
        if (!(fields >> lat >> lon) || (fields >> extra))
            throw std::runtime_error("station catalog line " + std::to_string(lineno) +
                                     ": expected 'name latitude_deg longitude_deg'");
        if (std::abs(lat) > 90.0)
            throw std::runtime_error("station catalog line " + std::to_string(lineno) + ": latitude out of range");
        out.push_back({name, geo::GroundStation::from_degrees(lat, lon)});
    }
    return out;
}

std::vector<NamedStation> load_station_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open station catalog " + path);
    return parse_station_catalog(in);
}

std::string default_catalog_path() { return std::string(SSQR_DATA_DIR) + "/ogs_catalog.txt"; }

const NamedStation& find_station(const std::vector<NamedStation>& catalog, const std::string& name) {
    auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& s) { return s.name == name; });
    if (it == catalog.end()) throw std::runtime_error("unknown station '" + name + "'");
    return *it;
}

OgsPair::OgsPair(NamedStation first, NamedStation second) : a_(std::move(first)), b_(std::move(second)) {
    if (geo::central_angle(a_.station.unit(), b_.station.unit()) < 1e-9)
        throw std::invalid_argument("ground stations must be distinct");
    if (geo::normalize_longitude(b_.station.longitude_rad - a_.station.longitude_rad) < 0.0) std::swap(a_, b_);
}

double OgsPair::baseline_km() const { return kEarthRadiusKm * geo::central_angle(a_.station.unit(), b_.station.unit()); }

Vec3 OgsPair::midpoint() const { return geo::normalized(a_.station.unit() + b_.station.unit()); }

double OgsPair::midpoint_longitude() const {
    const Vec3 m = midpoint();
    return std::atan2(m.y, m.x);
}

Vec3 OgsPair::pole() const { return geo::normalized(geo::cross(a_.station.unit(), b_.station.unit())); }

namespace {

constexpr Vec3 kNorth{0.0, 0.0, 1.0};

// Clockwise angle, seen from above `at`, from the A->B direction to v.
double crossing_angle(const Vec3& pole, const Vec3& at, const Vec3& v) {
    const Vec3 toward_b = geo::cross(pole, at);
    const Vec3 clockwise = geo::cross(toward_b, at);
    double phi = std::atan2(geo::dot(v, clockwise), geo::dot(v, toward_b));
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

}  // namespace

double OgsPair::crossing_angle_at_midpoint() const {
    const Vec3 m = midpoint();
    const Vec3 south = -(kNorth - geo::dot(kNorth, m) * m);
    return crossing_angle(pole(), m, south);
}

std::optional<geo::OverpassSpec> overpass_from_longitude(const OgsPair& pair, double gamma, double altitude_km,
                                                         double min_elevation_rad) {
    const double lon = pair.midpoint_longitude() + gamma;
    const Vec3 meridian{std::cos(lon), std::sin(lon), 0.0};
    // Track S(a) = cos(a) N + sin(a) E runs south along `meridian`; its
    // angular velocity vector is N x E.
    const Vec3 spin = geo::cross(kNorth, meridian);
    const Vec3 pole = pair.pole();
    const Vec3 m = pair.midpoint();

    Vec3 x = geo::cross(spin, pole);
    if (geo::norm(x) < 1e-12) {
        x = m;  // orbit plane contains the baseline
    } else {
        x = geo::normalized(x);
        if (geo::dot(x, m) < 0.0) x = -x;
    }
    const Vec3 velocity = geo::cross(spin, x);
    if (geo::norm(velocity) < 1e-12) return std::nullopt;

    geo::OverpassSpec spec;
    spec.baseline_km = pair.baseline_km();
    spec.altitude_km = altitude_km;
    spec.min_elevation_rad = min_elevation_rad;
    const double toward_b = std::atan2(geo::dot(geo::cross(m, x), pole), geo::dot(m, x));
    spec.offset_km = -kEarthRadiusKm * toward_b;
    spec.crossing_angle_rad = crossing_angle(pole, x, velocity);

    if (!geo::visibility_window(spec)) return std::nullopt;
    return spec;
}

bool night_pass_filter(const geo::OverpassSpec& spec) {
    return spec.crossing_angle_rad >= 0.0 && spec.crossing_angle_rad <= kPi;
}

double AnnualResult::quadrature_change() const {
    if (mean_per_orbit == 0.0) return 0.0;
    return std::abs(mean_per_orbit_coarse - mean_per_orbit) / mean_per_orbit;
}

double orbits_per_year(double altitude_km) { return kSecondsPerYear / geo::orbital_period(altitude_km); }

namespace {

enum Column { kDddl = 0, kEqual = 1, kOptimal = 2, kFixed = 3 };
using PerPass = std::array<double, 4>;

std::vector<PerPass> scan_longitudes(const OgsPair& pair, double altitude_km, const link::OpticsParams& optics,
                                     const rates::ProtocolParams& params, const std::array<bool, 4>& wanted,
                                     const AnnualOptions& options) {
    if (options.longitude_samples < 2 || options.longitude_samples % 2 != 0)
        throw std::invalid_argument("longitude_samples must be an even number >= 2");
    const auto k = static_cast<std::size_t>(options.longitude_samples);
    std::vector<PerPass> out(k, PerPass{});
    parallel_for(k, options.threads, [&](std::size_t i) {
        const double gamma = kTwoPi * static_cast<double>(i) / static_cast<double>(k);
        const auto spec = overpass_from_longitude(pair, gamma, altitude_km, options.min_elevation_rad);
        if (!spec) return;
        if (options.night_only && !night_pass_filter(*spec)) return;
        const rates::PassEvaluator pass(*spec, optics);
        const int n = params.memory_slots;
        if (wanted[kDddl]) out[i][kDddl] = pass.dddl_pdv(params.source_rate_dddl);
        if (wanted[kEqual]) out[i][kEqual] = pass.ssqr_pdv(n / 2, n - n / 2, params.bsm_success);
        if (wanted[kOptimal]) out[i][kOptimal] = pass.optimize_split(params).result.pdv;
        if (wanted[kFixed]) out[i][kFixed] = pass.ssqr_pdv(params.slots_a, params.slots_b, params.bsm_success);
    });
    return out;
}

AnnualResult reduce(const std::vector<PerPass>& passes, int column, double altitude_km) {
    AnnualResult r;
    r.altitude_km = altitude_km;
    r.orbits_per_year = orbits_per_year(altitude_km);
    const std::size_t k = passes.size();
    double sum = 0.0;
    double even = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
        const double v = passes[i][column];
        sum += v;
        if (i % 2 == 0) even += v;
        if (v > 0.0) {
            ++r.counted_passes;
            double g = kTwoPi * static_cast<double>(i) / static_cast<double>(k);
            if (g > kPi) g -= kTwoPi;
            if (!any) {
                r.gamma_min_rad = r.gamma_max_rad = g;
                any = true;
            }
            r.gamma_min_rad = std::min(r.gamma_min_rad, g);
            r.gamma_max_rad = std::max(r.gamma_max_rad, g);
        }
    }
    r.mean_per_orbit = sum / static_cast<double>(k);
    r.mean_per_orbit_coarse = even / static_cast<double>(k / 2);
    r.annual = r.mean_per_orbit * r.orbits_per_year;
    return r;
}

int column_for(rates::Protocol protocol, rates::AllocationPolicy policy) {
    if (protocol == rates::Protocol::dddl) return kDddl;
    switch (policy) {
        case rates::AllocationPolicy::equal:
            return kEqual;
        case rates::AllocationPolicy::optimal_static:
            return kOptimal;
        case rates::AllocationPolicy::fixed:
            return kFixed;
    }
    return kOptimal;
}

}  // namespace

AnnualResult annual_pdv(const OgsPair& pair, double altitude_km, const link::OpticsParams& optics,
                        const rates::ProtocolParams& params, rates::Protocol protocol,
                        rates::AllocationPolicy policy, const AnnualOptions& options) {
    params.validate();
    const int column = column_for(protocol, policy);
    std::array<bool, 4> wanted{};
    wanted[column] = true;
    return reduce(scan_longitudes(pair, altitude_km, optics, params, wanted, options), column, altitude_km);
}

AnnualComparison annual_comparison(const OgsPair& pair, double altitude_km, const link::OpticsParams& optics,
                                   const rates::ProtocolParams& params, const AnnualOptions& options) {
    params.validate();
    const auto passes = scan_longitudes(pair, altitude_km, optics, params, {true, true, true, false}, options);
    return {reduce(passes, kDddl, altitude_km), reduce(passes, kEqual, altitude_km),
            reduce(passes, kOptimal, altitude_km)};
}

const AnnualResult& AltitudeSweep::best() const {
    if (points.empty()) throw std::logic_error("empty altitude sweep");
    return *std::max_element(points.begin(), points.end(),
                             [](const auto& x, const auto& y) { return x.annual < y.annual; });
}

AltitudeSweep altitude_sweep(const OgsPair& pair, const std::vector<double>& altitudes_km,
                             const link::OpticsParams& optics, const rates::ProtocolParams& params,
                             rates::Protocol protocol, rates::AllocationPolicy policy, const AnnualOptions& options) {
    if (altitudes_km.empty()) throw std::invalid_argument("altitude range is empty");
    AltitudeSweep sweep;
    for (double h : altitudes_km)
        sweep.points.push_back(annual_pdv(pair, h, optics, params, protocol, policy, options));
    return sweep;
}

}  // namespace ssqr::annual
