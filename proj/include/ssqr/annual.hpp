#pragma once

// Expected annual pair distribution volume for a pair of ground stations
// served by a polar-orbit satellite (standing in for a noon-midnight
// sun-synchronous orbit). The orbit plane longitude gamma, measured from the
// baseline midpoint meridian, is taken as uniformly distributed; only the
// midnight (north-to-south) crossing of each orbit is counted.

#include "ssqr/geometry.hpp"
#include "ssqr/linkbudget.hpp"
#include "ssqr/rates.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssqr::annual {

struct NamedStation {
    std::string name;
    geo::GroundStation station;
};

/// Catalog format: one station per line, "name latitude_deg longitude_deg",
/// whitespace separated; '#' starts a comment. Throws std::runtime_error
/// naming the offending line on malformed input.
std::vector<NamedStation> parse_station_catalog(std::istream& in);
std::vector<NamedStation> load_station_catalog(const std::string& path);
std::string default_catalog_path();
const NamedStation& find_station(const std::vector<NamedStation>& catalog, const std::string& name);

/// Two stations ordered so that A lies to the west of B.
class OgsPair {
public:
    OgsPair(NamedStation first, NamedStation second);

    const NamedStation& a() const { return a_; }
    const NamedStation& b() const { return b_; }
    std::string name() const { return a_.name + "-" + b_.name; }

    double baseline_km() const;
    geo::Vec3 midpoint() const;
    double midpoint_longitude() const;
    /// Unit normal of the baseline great circle, oriented so A -> B is a
    /// positive rotation about it.
    geo::Vec3 pole() const;
    /// Crossing angle of a southbound polar track through the midpoint.
    double crossing_angle_at_midpoint() const;

private:
    NamedStation a_;
    NamedStation b_;
};

/// Overpass produced by the polar orbit whose plane contains the meridian at
/// midpoint longitude + gamma (southbound on that meridian, northbound on the
/// opposite one). Uses the baseline great-circle crossing nearest the
/// midpoint, which may lie outside the A-B segment. nullopt when the pass
/// never puts the satellite in simultaneous view of both stations.
std::optional<geo::OverpassSpec> overpass_from_longitude(const OgsPair& pair, double gamma_rad,
                                                         double altitude_km, double min_elevation_rad);

/// True iff the crossing angle lies in [0, pi], i.e. the southbound
/// (midnight) traversal for a west-to-east ordered pair.
bool night_pass_filter(const geo::OverpassSpec& spec);

struct AnnualOptions {
    int longitude_samples = 720;
    bool night_only = true;
    double min_elevation_rad = 0.17453292519943295;
    unsigned threads = 0;
};

struct AnnualResult {
    double altitude_km = 0.0;
    double mean_per_orbit = 0.0;  ///< average PDV per orbit over gamma
    double annual = 0.0;          ///< mean_per_orbit * orbits_per_year
    double orbits_per_year = 0.0;
    /// Same average from every other gamma sample; the relative gap to
    /// mean_per_orbit is the quadrature refinement check.
    double mean_per_orbit_coarse = 0.0;
    int counted_passes = 0;  ///< gamma samples with a counted nonzero pass
    double gamma_min_rad = 0.0;  ///< visible band, signed about the midpoint
    double gamma_max_rad = 0.0;

    double quadrature_change() const;
};

double orbits_per_year(double altitude_km);

AnnualResult annual_pdv(const OgsPair& pair, double altitude_km, const link::OpticsParams& optics,
                        const rates::ProtocolParams& params, rates::Protocol protocol,
                        rates::AllocationPolicy policy, const AnnualOptions& options = {});

/// DDDL, equal-split SSQR and optimal-static SSQR from one set of passes.
struct AnnualComparison {
    AnnualResult dddl;
    AnnualResult ssqr_equal;
    AnnualResult ssqr_optimal;
};

AnnualComparison annual_comparison(const OgsPair& pair, double altitude_km, const link::OpticsParams& optics,
                                   const rates::ProtocolParams& params, const AnnualOptions& options = {});

struct AltitudeSweep {
    std::vector<AnnualResult> points;
    const AnnualResult& best() const;
};

AltitudeSweep altitude_sweep(const OgsPair& pair, const std::vector<double>& altitudes_km,
                             const link::OpticsParams& optics, const rates::ProtocolParams& params,
                             rates::Protocol protocol, rates::AllocationPolicy policy,
                             const AnnualOptions& options = {});

}  // namespace ssqr::annual
