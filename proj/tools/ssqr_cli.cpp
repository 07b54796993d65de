// Command-line front end. Every subcommand builds a one-study scenario and
// hands it to the same runner used for scenario files.

#include "ssqr/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>

using json = nlohmann::ordered_json;
namespace sc = ssqr::scenario;

namespace {

struct Common {
    std::string name;
    std::string output_dir;
    long long seed = -1;
    int threads = -1;
    bool quiet = false;
    bool print_config = false;
    double system_loss_db = -1.0;
    std::string allocation;
    int memory_slots = 0;
    double altitude_km = 0.0;
    double baseline_km = 0.0;
    double min_elevation_deg = -1.0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--name", c.name, "Scenario name (output subdirectory)");
    app->add_option("-o,--output-dir", c.output_dir, "Output directory (default $SSQR_OUTPUT_DIR or ./results)");
    app->add_option("--seed", c.seed, "Random seed")->check(CLI::NonNegativeNumber);
    app->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    app->add_flag("-q,--quiet", c.quiet, "No progress output");
    app->add_flag("--print-config", c.print_config, "Print the generated scenario and exit");
    app->add_option("--system-loss-db", c.system_loss_db, "Pin the zenith system loss metric");
    app->add_option("--allocation", c.allocation, "equal | optimal_static")
        ->check(CLI::IsMember({"equal", "optimal_static"}));
    app->add_option("--memory-slots", c.memory_slots, "Satellite memory slots N_sat")->check(CLI::PositiveNumber);
    app->add_option("--altitude-km", c.altitude_km, "Orbit altitude")->check(CLI::PositiveNumber);
    app->add_option("--baseline-km", c.baseline_km, "Ground-station separation")->check(CLI::PositiveNumber);
    app->add_option("--min-elevation-deg", c.min_elevation_deg, "Minimum elevation");
}

// "a:b:step" -> range object, "x,y,z" -> list, "x" -> number.
json grid_arg(const std::string& s) {
    if (s.find(':') != std::string::npos) {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ':')) v.push_back(std::stod(part));
        if (v.size() != 3) throw CLI::ValidationError("range", "expected start:stop:step, got '" + s + "'");
        return {{"start", v[0]}, {"stop", v[1]}, {"step", v[2]}};
    }
    json out = json::array();
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
    return out.size() == 1 ? out[0] : out;
}

json scenario_for(const Common& c, const std::string& kind, json study) {
    json cfg;
    cfg["name"] = c.name.empty() ? kind : c.name;
    if (c.seed >= 0) cfg["seed"] = c.seed;
    study["kind"] = kind;
    study["label"] = kind;
    json optics = json::object();
    if (c.system_loss_db >= 0) optics["system_loss_db"] = c.system_loss_db;
    json protocol = json::object();
    if (!c.allocation.empty()) protocol["allocation"] = c.allocation;
    if (c.memory_slots > 0) protocol["memory_slots"] = c.memory_slots;
    json overpass = json::object();
    if (c.altitude_km > 0) overpass["altitude_km"] = c.altitude_km;
    if (c.baseline_km > 0) overpass["baseline_km"] = c.baseline_km;
    if (c.min_elevation_deg >= 0) overpass["min_elevation_deg"] = c.min_elevation_deg;
    if (!optics.empty()) cfg["optics"] = optics;
    if (!protocol.empty()) cfg["protocol"] = protocol;
    if (!overpass.empty()) cfg["overpass"] = overpass;
    cfg["studies"] = json::array({study});
    return cfg;
}

json passes_arg(const std::vector<std::string>& names) {
    json out = json::array();
    for (const auto& n : names) out.push_back(n);
    return out;
}

int execute(const json& cfg, const Common& c) {
    if (c.print_config) {
        std::cout << cfg.dump(2) << '\n';
        return 0;
    }
    sc::RunOptions opts;
    opts.output_dir = c.output_dir;
    if (c.seed >= 0) opts.seed = static_cast<std::uint64_t>(c.seed);
    if (c.threads >= 0) opts.threads = static_cast<unsigned>(c.threads);
    opts.quiet = c.quiet;
    const auto report = sc::run_config(cfg, opts);
    if (!c.quiet) std::cerr << "results in " << report.directory.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement distribution from a single satellite: direct downlink vs. onboard repeater"};
    app.set_version_flag("--version", sc::kVersion);
    app.require_subcommand(1);

    Common common;
    std::string config_path;
    auto* run = app.add_subcommand("run", "Run every study in a scenario file");
    run->add_option("config", config_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output-dir", common.output_dir, "Output directory");
    run->add_option("--seed", common.seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
    run->add_option("--threads", common.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    run->add_flag("-q,--quiet", common.quiet, "No progress output");

    std::vector<std::string> passes;
    double step_s = 1.0;
    auto* over = app.add_subcommand("overpass", "Time series and PDV for individual passes");
    add_common(over, common);
    over->add_option("--pass", passes, "Preset: zenith-zenith, symmetric, zenith-a-90, zenith-a-45");
    over->add_option("--sample-step-s", step_s, "Time-series step")->check(CLI::PositiveNumber);

    std::string offsets;
    std::string angles;
    auto* geom = app.add_subcommand("sweep-geometry", "PDV over crossing offset and angle");
    add_common(geom, common);
    geom->add_option("--offsets-km", offsets, "start:stop:step or list");
    geom->add_option("--angles-deg", angles, "start:stop:step or list");

    std::string losses;
    std::string slot_list;
    auto* loss = app.add_subcommand("sweep-loss", "PDV against system loss metric");
    add_common(loss, common);
    loss->add_option("--pass", passes, "Pass presets");
    loss->add_option("--loss-db", losses, "start:stop:step or list");
    loss->add_option("--slots", slot_list, "Comma-separated memory capacities");

    std::vector<std::string> pairs;
    std::string altitudes;
    int samples = 720;
    std::string catalog;
    auto* ann = app.add_subcommand("annual", "Annual PDV for ground-station pairs");
    add_common(ann, common);
    ann->add_option("--pair", pairs, "Station pair as A,B (catalog names)");
    ann->add_option("--altitudes-km", altitudes, "start:stop:step or list");
    ann->add_option("--longitude-samples", samples, "Orbit-plane longitude samples")->check(CLI::PositiveNumber);
    ann->add_option("--catalog", catalog, "Station catalog file")->check(CLI::ExistingFile);

    int trials = 1000;
    int buffer = 5;
    double dt_s = 1.0;
    std::string dephasing = "0.1";
    std::string dephasing_sweep;
    int event_trials = 1;
    auto* mc = app.add_subcommand("montecarlo", "Monte Carlo memory simulation");
    add_common(mc, common);
    mc->add_option("--pass", passes, "Pass presets");
    mc->add_option("--slots", slot_list, "Comma-separated memory capacities");
    mc->add_option("--trials", trials, "Trials per pass")->check(CLI::PositiveNumber);
    mc->add_option("--buffer", buffer, "Buffer size b")->check(CLI::NonNegativeNumber);
    mc->add_option("--dt-s", dt_s, "Time step")->check(CLI::PositiveNumber);
    mc->add_option("--dephasing-time-s", dephasing, "Memory 1/e dephasing time, or inf");
    mc->add_option("--dephasing-sweep-s", dephasing_sweep, "Dephasing times for the median-fidelity sweep");
    mc->add_option("--event-log-trials", event_trials, "Trials written to the event log")
        ->check(CLI::NonNegativeNumber);

    auto* cross = app.add_subcommand("crossover", "Crossover memory capacity and system loss");
    add_common(cross, common);
    cross->add_option("--pass", passes, "Pass presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = sc::load_config(config_path);
            return execute(cfg, common);
        }
        json study = json::object();
        std::string kind;
        if (over->parsed()) {
            kind = "overpass";
            if (!passes.empty()) study["passes"] = passes_arg(passes);
            study["sample_step_s"] = step_s;
        } else if (geom->parsed()) {
            kind = "sweep-geometry";
            if (!offsets.empty()) study["offsets_km"] = grid_arg(offsets);
            if (!angles.empty()) study["crossing_angles_deg"] = grid_arg(angles);
        } else if (loss->parsed()) {
            kind = "sweep-loss";
            if (!passes.empty()) study["passes"] = passes_arg(passes);
            if (!losses.empty()) study["system_loss_db"] = grid_arg(losses);
            if (!slot_list.empty()) study["memory_slots"] = grid_arg(slot_list);
        } else if (ann->parsed()) {
            kind = "annual";
            if (!pairs.empty()) {
                json list = json::array();
                for (const auto& p : pairs) {
                    const auto comma = p.find(',');
                    if (comma == std::string::npos) throw CLI::ValidationError("--pair", "expected A,B");
                    list.push_back({p.substr(0, comma), p.substr(comma + 1)});
                }
                study["pairs"] = list;
            }
            if (!altitudes.empty()) study["altitudes_km"] = grid_arg(altitudes);
            study["longitude_samples"] = samples;
            if (!catalog.empty()) study["catalog"] = catalog;
        } else if (mc->parsed()) {
            kind = "montecarlo";
            if (!passes.empty()) study["passes"] = passes_arg(passes);
            if (!slot_list.empty()) study["memory_slots"] = grid_arg(slot_list);
            json m;
            m["trials"] = trials;
            m["buffer_size"] = buffer;
            m["dt_s"] = dt_s;
            if (dephasing == "inf")
                m["dephasing_time_s"] = "inf";
            else
                m["dephasing_time_s"] = std::stod(dephasing);
            if (!dephasing_sweep.empty()) m["dephasing_sweep_s"] = grid_arg(dephasing_sweep);
            m["event_log_trials"] = event_trials;
            study["montecarlo"] = m;
        } else {
            kind = "crossover";
            if (!passes.empty()) study["passes"] = passes_arg(passes);
        }
        // Integer lists must stay integers for memory_slots.
        if (study.contains("memory_slots")) {
            json ints = json::array();
            const auto& v = study["memory_slots"];
            if (v.is_array())
                for (const auto& x : v) ints.push_back(static_cast<long long>(x.get<double>()));
            else
                ints.push_back(static_cast<long long>(v.get<double>()));
            study["memory_slots"] = ints;
        }
        return execute(scenario_for(common, kind, study), common);
    } catch (const sc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
