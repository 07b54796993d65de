#pragma once

// Scenario files: a JSON document with shared parameter sections and a list
// of studies. Each study may override any shared section; the override is
// merged key by key into the shared one. Every study is validated before
// any is run, and errors name the offending key path.

#include "ssqr/annual.hpp"
#include "ssqr/geometry.hpp"
#include "ssqr/linkbudget.hpp"
#include "ssqr/mcsim.hpp"
#include "ssqr/rates.hpp"
#include "ssqr/stats.hpp"
#include "ssqr/table.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ssqr::scenario {

inline constexpr const char* kVersion = "0.3.1";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedPass {
    std::string name;
    geo::OverpassSpec spec;
};

/// Resolves "zenith-zenith", "symmetric", "zenith-a-90", "zenith-a-45" for
/// the given baseline/altitude/elevation (zenith-A offsets are baseline/2).
std::optional<geo::OverpassSpec> preset_pass(const std::string& name, double baseline_km, double altitude_km,
                                             double min_elevation_rad);
std::vector<std::string> preset_names();

struct Common {
    std::string label;
    std::string kind;
    link::OpticsParams optics;
    std::optional<double> system_loss_db;  ///< pins intrinsic loss per pass altitude
    rates::ProtocolParams protocol;
    rates::AllocationPolicy allocation = rates::AllocationPolicy::optimal_static;
    nlohmann::ordered_json resolved;  ///< the merged study configuration

    link::OpticsParams optics_for(double altitude_km) const;
};

struct OverpassStudy {
    std::vector<NamedPass> passes;
    double sample_step_s = 1.0;
};

struct GeometrySweepStudy {
    geo::OverpassSpec base;
    std::vector<double> offsets_km;
    std::vector<double> crossing_angles_rad;
};

struct LossSweepStudy {
    std::vector<NamedPass> passes;
    std::vector<double> system_loss_db;
    std::vector<int> memory_slots;
};

struct AnnualStudy {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string catalog_path;
    std::vector<double> altitudes_km;
    annual::AnnualOptions options;
};

struct MonteCarloStudy {
    std::vector<NamedPass> passes;
    std::vector<int> memory_slots;
    mc::McConfig mc;
    stats::StatsOptions stats;
    int event_log_trials = 1;
};

struct CrossoverStudy {
    std::vector<NamedPass> passes;
    double loss_lo_db = 20.0;
    double loss_hi_db = 40.0;
    int max_slots = 1 << 17;
};

using StudyBody =
    std::variant<OverpassStudy, GeometrySweepStudy, LossSweepStudy, AnnualStudy, MonteCarloStudy, CrossoverStudy>;

struct Study {
    Common common;
    StudyBody body;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    std::vector<Study> studies;
};

struct RunOptions {
    std::filesystem::path output_dir;        ///< empty: default_output_dir()
    std::optional<std::uint64_t> seed;       ///< overrides the scenario seed
    std::optional<unsigned> threads;         ///< 0 = all cores
    bool quiet = false;
};

/// SSQR_OUTPUT_DIR if set, else "results".
std::filesystem::path default_output_dir();

nlohmann::ordered_json load_config(const std::filesystem::path& path);

/// Validates and resolves a configuration. Throws ConfigError.
Scenario parse_scenario(const nlohmann::ordered_json& config, const RunOptions& options = {});

struct StudyResult {
    std::string label;
    std::vector<io::ResultTable> tables;
    std::vector<std::filesystem::path> extra_files;  ///< event logs
};

/// Runs one study; event logs go under event_dir when it is nonempty.
StudyResult run_study(const Study& study, std::uint64_t seed, unsigned threads,
                      const std::filesystem::path& event_dir = {});

struct RunReport {
    std::filesystem::path directory;
    std::vector<StudyResult> studies;
    std::vector<std::filesystem::path> files;
};

/// Parses, runs every study and writes its tables plus manifest.json into
/// <output_dir>/<scenario name>/.
RunReport run_config(const nlohmann::ordered_json& config, const RunOptions& options);

}  // namespace ssqr::scenario
