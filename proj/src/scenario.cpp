#include "ssqr/scenario.hpp"

#include "ssqr/constants.hpp"
#include "ssqr/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace ssqr::scenario {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::vector<std::string> preset_names() { return {"zenith-zenith", "symmetric", "zenith-a-90", "zenith-a-45"}; }

std::optional<geo::OverpassSpec> preset_pass(const std::string& name, double baseline_km, double altitude_km,
                                             double min_elevation_rad) {
    geo::OverpassSpec s;
    s.baseline_km = baseline_km;
    s.altitude_km = altitude_km;
    s.min_elevation_rad = min_elevation_rad;
    if (name == "zenith-zenith") {
        s.offset_km = 0.0;
        s.crossing_angle_rad = 0.0;
    } else if (name == "symmetric") {
        s.offset_km = 0.0;
        s.crossing_angle_rad = kPi / 2.0;
    } else if (name == "zenith-a-90") {
        s.offset_km = baseline_km / 2.0;
        s.crossing_angle_rad = kPi / 2.0;
    } else if (name == "zenith-a-45") {
        s.offset_km = baseline_km / 2.0;
        s.crossing_angle_rad = kPi / 4.0;
    } else {
        return std::nullopt;
    }
    return s;
}

link::OpticsParams Common::optics_for(double altitude_km) const {
    if (!system_loss_db) return optics;
    return link::pin_to_system_loss(optics, altitude_km, *system_loss_db);
}

fs::path default_output_dir() {
    if (const char* env = std::getenv("SSQR_OUTPUT_DIR"); env && *env) return env;
    return "results";
}

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

namespace {

// Read-only view of a JSON object that remembers which keys were consumed,
// so that misspelt keys are reported instead of silently ignored.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(where(key) + ": " + msg);
    }
    std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf" || s == "infinity") return kInfinity;
        }
        if (v.is_null()) return kInfinity;
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }
    double positive(const std::string& key, double def) {
        const double v = number(key, def);
        if (!(v > 0.0)) fail(key, "must be > 0");
        return v;
    }
    double finite_positive(const std::string& key, double def) {
        const double v = positive(key, def);
        if (!std::isfinite(v)) fail(key, "must be finite");
        return v;
    }
    long long integer(const std::string& key, long long def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<long long>();
    }
    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }
    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }
    /// A list of numbers or {"start", "stop", "step"} (stop inclusive).
    std::vector<double> grid(const std::string& key, std::vector<double> def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_number()) fail(key, "expected a list of numbers");
                out.push_back(x.get<double>());
            }
        } else if (v.is_number()) {
            out.push_back(v.get<double>());
        } else if (v.is_object()) {
            Node r(v, where(key));
            const double start = r.number("start", kInfinity);
            const double stop = r.number("stop", kInfinity);
            const double step = r.number("step", kInfinity);
            r.finish();
            if (!std::isfinite(start) || !std::isfinite(stop)) fail(key, "range needs finite start and stop");
            if (!(step > 0.0) || !std::isfinite(step)) fail(key + ".step", "must be > 0");
            if (stop < start) fail(key, "stop must be >= start");
            const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
            if (n > 1000000) fail(key, "range has too many points");
            for (long long i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
        } else {
            fail(key, "expected a number, a list or a {start, stop, step} range");
        }
        if (out.empty()) fail(key, "must not be empty");
        return out;
    }
    std::vector<int> int_list(const std::string& key, std::vector<int> def) {
        if (!has(key)) return def;
        const auto& v = raw(key);
        std::vector<int> out;
        if (v.is_number_integer()) {
            out.push_back(v.get<int>());
        } else if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_number_integer()) fail(key, "expected a list of integers");
                out.push_back(x.get<int>());
            }
        } else {
            fail(key, "expected an integer or a list of integers");
        }
        if (out.empty()) fail(key, "must not be empty");
        return out;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!used_.count(k)) fail(k, "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

link::OpticsParams parse_optics(Node n, std::optional<double>& system_loss) {
    link::OpticsParams o;
    o.wavelength_nm = n.finite_positive("wavelength_nm", o.wavelength_nm);
    o.tx_aperture_mm = n.finite_positive("transmit_aperture_mm", o.tx_aperture_mm);
    o.beam_waist_mm = n.finite_positive("beam_waist_mm", o.beam_waist_mm);
    o.rx_aperture_mm = n.finite_positive("receive_aperture_mm", o.rx_aperture_mm);
    o.intrinsic_loss_db = n.number("intrinsic_loss_db", o.intrinsic_loss_db);
    if (!std::isfinite(o.intrinsic_loss_db) || o.intrinsic_loss_db < 0.0)
        n.fail("intrinsic_loss_db", "must be a finite value >= 0");
    o.zenith_transmittance = n.number("zenith_transmittance", o.zenith_transmittance);
    if (!(o.zenith_transmittance > 0.0 && o.zenith_transmittance <= 1.0))
        n.fail("zenith_transmittance", "must lie in (0, 1]");
    const auto clip = n.string("clipping", "aperture");
    if (clip == "aperture")
        o.clipping = link::ClippingModel::aperture;
    else if (clip == "fixed")
        o.clipping = link::ClippingModel::fixed;
    else if (clip == "none")
        o.clipping = link::ClippingModel::none;
    else
        n.fail("clipping", "expected \"aperture\", \"fixed\" or \"none\"");
    o.fixed_clipping_db = n.number("fixed_clipping_db", o.fixed_clipping_db);
    if (!std::isfinite(o.fixed_clipping_db) || o.fixed_clipping_db < 0.0)
        n.fail("fixed_clipping_db", "must be a finite value >= 0");
    if (n.has("system_loss_db")) {
        system_loss = n.number("system_loss_db", 0.0);
        if (!std::isfinite(*system_loss)) n.fail("system_loss_db", "must be finite");
    }
    n.finish();
    return o;
}

rates::AllocationPolicy parse_policy(Node& n, const std::string& key) {
    const auto s = n.string(key, "optimal_static");
    if (s == "equal") return rates::AllocationPolicy::equal;
    if (s == "optimal_static") return rates::AllocationPolicy::optimal_static;
    if (s == "fixed") return rates::AllocationPolicy::fixed;
    n.fail(key, "expected \"equal\", \"optimal_static\" or \"fixed\"");
}

rates::ProtocolParams parse_protocol(Node n, rates::AllocationPolicy& policy) {
    rates::ProtocolParams p;
    p.source_rate_dddl = n.finite_positive("source_rate_pairs_per_s", p.source_rate_dddl);
    const auto slots = n.integer("memory_slots", p.memory_slots);
    if (slots < 1 || slots > (1 << 24)) n.fail("memory_slots", "must lie in [1, 16777216]");
    p = p.with_capacity(static_cast<int>(slots));
    policy = parse_policy(n, "allocation");
    if (n.has("slots_a") || n.has("slots_b")) {
        const auto a = n.integer("slots_a", slots / 2);
        if (a < 0 || a > slots) n.fail("slots_a", "must lie in [0, memory_slots]");
        const auto b = n.integer("slots_b", slots - a);
        if (a + b != slots) n.fail("slots_b", "slots_a + slots_b must equal memory_slots");
        p.slots_a = static_cast<int>(a);
        p.slots_b = static_cast<int>(b);
    } else if (policy == rates::AllocationPolicy::fixed) {
        n.fail("allocation", "\"fixed\" needs slots_a and slots_b");
    }
    p.bsm_success = n.number("bsm_success", p.bsm_success);
    if (!(p.bsm_success > 0.0 && p.bsm_success <= 1.0)) n.fail("bsm_success", "must lie in (0, 1]");
    n.finish();
    return p;
}

struct OverpassDefaults {
    double baseline_km = 1000.0;
    double altitude_km = 500.0;
    double min_elevation_rad = deg2rad(10.0);
    double offset_km = 0.0;
    double crossing_angle_rad = 0.0;
};

OverpassDefaults parse_overpass(Node n) {
    OverpassDefaults d;
    d.baseline_km = n.finite_positive("baseline_km", d.baseline_km);
    d.altitude_km = n.finite_positive("altitude_km", d.altitude_km);
    const double el = n.number("min_elevation_deg", 10.0);
    if (!(el >= 0.0 && el < 90.0)) n.fail("min_elevation_deg", "must lie in [0, 90)");
    d.min_elevation_rad = deg2rad(el);
    d.offset_km = n.number("offset_km", 0.0);
    if (!std::isfinite(d.offset_km)) n.fail("offset_km", "must be finite");
    const double phi = n.number("crossing_angle_deg", 0.0);
    if (!std::isfinite(phi)) n.fail("crossing_angle_deg", "must be finite");
    d.crossing_angle_rad = deg2rad(phi);
    n.finish();
    return d;
}

std::vector<NamedPass> parse_passes(Node& n, const OverpassDefaults& d, std::vector<std::string> def) {
    std::vector<NamedPass> out;
    if (!n.has("passes")) {
        for (const auto& name : def) out.push_back({name, *preset_pass(name, d.baseline_km, d.altitude_km, d.min_elevation_rad)});
        return out;
    }
    const auto& v = n.raw("passes");
    if (!v.is_array() || v.empty()) n.fail("passes", "expected a nonempty list");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string key = "passes[" + std::to_string(i) + "]";
        if (v[i].is_string()) {
            const auto name = v[i].get<std::string>();
            auto spec = preset_pass(name, d.baseline_km, d.altitude_km, d.min_elevation_rad);
            if (!spec) n.fail(key, "unknown pass preset '" + name + "'");
            out.push_back({name, *spec});
        } else if (v[i].is_object()) {
            Node p(v[i], n.where(key));
            NamedPass np;
            np.name = p.string("name", "custom-" + std::to_string(i));
            np.spec.baseline_km = p.finite_positive("baseline_km", d.baseline_km);
            np.spec.altitude_km = p.finite_positive("altitude_km", d.altitude_km);
            np.spec.offset_km = p.number("offset_km", d.offset_km);
            if (!std::isfinite(np.spec.offset_km)) p.fail("offset_km", "must be finite");
            np.spec.crossing_angle_rad = deg2rad(p.number("crossing_angle_deg", rad2deg(d.crossing_angle_rad)));
            if (!std::isfinite(np.spec.crossing_angle_rad)) p.fail("crossing_angle_deg", "must be finite");
            const double el = p.number("min_elevation_deg", rad2deg(d.min_elevation_rad));
            if (!(el >= 0.0 && el < 90.0)) p.fail("min_elevation_deg", "must lie in [0, 90)");
            np.spec.min_elevation_rad = deg2rad(el);
            p.finish();
            out.push_back(np);
        } else {
            n.fail(key, "expected a preset name or an object");
        }
    }
    return out;
}

const char* clipping_name(link::ClippingModel m) {
    switch (m) {
        case link::ClippingModel::aperture:
            return "aperture";
        case link::ClippingModel::fixed:
            return "fixed";
        case link::ClippingModel::none:
            return "none";
    }
    return "none";
}

const char* policy_name(rates::AllocationPolicy p) {
    switch (p) {
        case rates::AllocationPolicy::equal:
            return "equal";
        case rates::AllocationPolicy::optimal_static:
            return "optimal_static";
        case rates::AllocationPolicy::fixed:
            return "fixed";
    }
    return "optimal_static";
}

// Writes every effective parameter back, so the embedded config does not
// depend on the defaults of the version that produced it.
void write_effective(json& resolved, const Common& c, const OverpassDefaults& d) {
    json o;
    o["wavelength_nm"] = c.optics.wavelength_nm;
    o["transmit_aperture_mm"] = c.optics.tx_aperture_mm;
    o["beam_waist_mm"] = c.optics.beam_waist_mm;
    o["receive_aperture_mm"] = c.optics.rx_aperture_mm;
    o["intrinsic_loss_db"] = c.optics.intrinsic_loss_db;
    o["zenith_transmittance"] = c.optics.zenith_transmittance;
    o["clipping"] = clipping_name(c.optics.clipping);
    o["fixed_clipping_db"] = c.optics.fixed_clipping_db;
    if (c.system_loss_db) o["system_loss_db"] = *c.system_loss_db;
    resolved["optics"] = o;
    json p;
    p["source_rate_pairs_per_s"] = c.protocol.source_rate_dddl;
    p["memory_slots"] = c.protocol.memory_slots;
    p["allocation"] = policy_name(c.allocation);
    p["slots_a"] = c.protocol.slots_a;
    p["slots_b"] = c.protocol.slots_b;
    p["bsm_success"] = c.protocol.bsm_success;
    resolved["protocol"] = p;
    json g;
    g["baseline_km"] = d.baseline_km;
    g["altitude_km"] = d.altitude_km;
    g["min_elevation_deg"] = rad2deg(d.min_elevation_rad);
    g["offset_km"] = d.offset_km;
    g["crossing_angle_deg"] = rad2deg(d.crossing_angle_rad);
    resolved["overpass"] = g;
}

const std::set<std::string> kSections = {"optics", "protocol", "overpass", "montecarlo"};
const std::set<std::string> kKinds = {"overpass", "sweep-geometry", "sweep-loss", "annual", "montecarlo", "crossover"};

mc::McConfig parse_mc(Node n, std::uint64_t seed, unsigned threads, stats::StatsOptions& st, int& event_log_trials) {
    mc::McConfig c;
    c.seed = seed;
    c.threads = threads;
    const auto trials = n.integer("trials", 1000);
    if (trials < 1 || trials > 10000000) n.fail("trials", "must lie in [1, 1e7]");
    c.trials = static_cast<int>(trials);
    const auto buffer = n.integer("buffer_size", 5);
    if (buffer < 0) n.fail("buffer_size", "must be >= 0");
    c.buffer_size = static_cast<int>(buffer);
    c.dt_s = n.finite_positive("dt_s", 1.0);
    c.memory.dephasing_time_s = n.positive("dephasing_time_s", 0.1);
    c.memory.efficiency = n.number("memory_efficiency", 1.0);
    if (!(c.memory.efficiency > 0.0 && c.memory.efficiency <= 1.0)) n.fail("memory_efficiency", "must lie in (0, 1]");
    c.coincidence_s = n.number("coincidence_s", 1e-9);
    if (!(c.coincidence_s >= 0.0 && std::isfinite(c.coincidence_s))) n.fail("coincidence_s", "must be >= 0");
    if (n.has("seed")) {
        const auto s = n.integer("seed", 0);
        if (s < 0) n.fail("seed", "must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    st.bin_s = n.finite_positive("bin_s", c.dt_s);
    const auto bins = n.integer("fidelity_bins", 50);
    if (bins < 1 || bins > 100000) n.fail("fidelity_bins", "must lie in [1, 100000]");
    st.fidelity_bins = static_cast<int>(bins);
    if (n.has("dephasing_sweep_s")) {
        st.dephasing_times_s = n.grid("dephasing_sweep_s", {});
        for (double t : st.dephasing_times_s)
            if (!(t > 0.0)) n.fail("dephasing_sweep_s", "values must be > 0");
    }
    if (n.has("infidelity_thresholds")) st.infidelity_thresholds = n.grid("infidelity_thresholds", {});
    const auto ev = n.integer("event_log_trials", 1);
    if (ev < 0) n.fail("event_log_trials", "must be >= 0");
    event_log_trials = static_cast<int>(ev);
    n.finish();
    return c;
}

Study parse_study(const json& top, const json& raw, std::size_t index, std::uint64_t seed, unsigned threads) {
    const std::string path = "studies[" + std::to_string(index) + "]";
    if (!raw.is_object()) throw ConfigError(path + ": expected an object");

    // Shared sections are defaults; the study's own sections patch them.
    json resolved = raw;
    for (const auto& sec : kSections) {
        json merged = top.contains(sec) ? top.at(sec) : json::object();
        if (!merged.is_object()) throw ConfigError(sec + ": expected an object");
        if (raw.contains(sec)) {
            if (!raw.at(sec).is_object()) throw ConfigError(path + "." + sec + ": expected an object");
            merged.merge_patch(raw.at(sec));
        }
        if (!merged.empty()) resolved[sec] = merged;
    }

    Node n(resolved, path);
    Study st;
    auto& c = st.common;
    c.kind = n.string("kind", "");
    if (c.kind.empty()) n.fail("kind", "missing study kind");
    if (!kKinds.count(c.kind)) n.fail("kind", "unknown study kind '" + c.kind + "'");
    c.label = n.string("label", c.kind + "-" + std::to_string(index));
    if (c.label.empty() || c.label.find_first_of("/\\ ") != std::string::npos)
        n.fail("label", "must be nonempty without spaces or slashes");
    const json empty = json::object();
    c.optics = parse_optics(Node(n.has("optics") ? n.raw("optics") : empty, n.where("optics")), c.system_loss_db);
    c.protocol =
        parse_protocol(Node(n.has("protocol") ? n.raw("protocol") : empty, n.where("protocol")), c.allocation);
    const auto od = parse_overpass(Node(n.has("overpass") ? n.raw("overpass") : empty, n.where("overpass")));
    const bool has_mc = n.has("montecarlo");
    const json& mcj = has_mc ? n.raw("montecarlo") : empty;

    if (c.kind == "overpass") {
        OverpassStudy s;
        s.passes = parse_passes(n, od, {"zenith-zenith"});
        s.sample_step_s = n.finite_positive("sample_step_s", 1.0);
        st.body = s;
    } else if (c.kind == "sweep-geometry") {
        GeometrySweepStudy s;
        s.base.baseline_km = od.baseline_km;
        s.base.altitude_km = od.altitude_km;
        s.base.min_elevation_rad = od.min_elevation_rad;
        s.offsets_km = n.grid("offsets_km", {});
        if (s.offsets_km.empty()) {
            for (int i = -30; i <= 30; ++i) s.offsets_km.push_back(50.0 * i);
        }
        for (double a : n.grid("crossing_angles_deg", {})) s.crossing_angles_rad.push_back(deg2rad(a));
        if (s.crossing_angles_rad.empty()) {
            for (int i = 0; i <= 36; ++i) s.crossing_angles_rad.push_back(deg2rad(5.0 * i));
        }
        st.body = s;
    } else if (c.kind == "sweep-loss") {
        LossSweepStudy s;
        s.passes = parse_passes(n, od, preset_names());
        s.system_loss_db = n.grid("system_loss_db", {});
        if (s.system_loss_db.empty()) {
            for (int i = 0; i <= 40; ++i) s.system_loss_db.push_back(20.0 + 0.5 * i);
        }
        s.memory_slots = n.int_list("memory_slots", {c.protocol.memory_slots});
        for (int m : s.memory_slots)
            if (m < 1) n.fail("memory_slots", "values must be >= 1");
        for (const auto& p : s.passes) {
            const double floor_db = link::system_loss_metric(
                [&] {
                    auto o = c.optics;
                    o.intrinsic_loss_db = 0.0;
                    return o;
                }(),
                p.spec.altitude_km);
            if (*std::min_element(s.system_loss_db.begin(), s.system_loss_db.end()) < floor_db)
                n.fail("system_loss_db", "values below the diffraction + atmosphere floor of " +
                                             io::format_real(floor_db, 4) + " dB for pass '" + p.name + "'");
        }
        st.body = s;
    } else if (c.kind == "annual") {
        AnnualStudy s;
        if (n.has("pairs")) {
            const auto& v = n.raw("pairs");
            if (!v.is_array() || v.empty()) n.fail("pairs", "expected a nonempty list of [name, name]");
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_string() || !v[i][1].is_string())
                    n.fail("pairs[" + std::to_string(i) + "]", "expected [\"station\", \"station\"]");
                s.pairs.emplace_back(v[i][0].get<std::string>(), v[i][1].get<std::string>());
            }
        } else {
            s.pairs = {{"Paris", "Nice"}, {"London", "Berlin"}, {"Seoul", "Tokyo"}, {"Madrid", "Brussels"}};
        }
        s.catalog_path = n.string("catalog", annual::default_catalog_path());
        std::vector<annual::NamedStation> catalog;
        try {
            catalog = annual::load_station_catalog(s.catalog_path);
        } catch (const std::exception& e) {
            n.fail("catalog", e.what());
        }
        for (std::size_t i = 0; i < s.pairs.size(); ++i) {
            for (const auto& name : {s.pairs[i].first, s.pairs[i].second}) {
                auto it = std::find_if(catalog.begin(), catalog.end(), [&](const auto& x) { return x.name == name; });
                if (it == catalog.end()) n.fail("pairs[" + std::to_string(i) + "]", "station '" + name + "' not in catalog");
            }
            if (s.pairs[i].first == s.pairs[i].second) n.fail("pairs[" + std::to_string(i) + "]", "stations must differ");
        }
        s.altitudes_km = n.grid("altitudes_km", {});
        if (s.altitudes_km.empty()) {
            for (int h = 200; h <= 880; h += 20) s.altitudes_km.push_back(h);
        }
        for (double h : s.altitudes_km)
            if (!(h > 0.0)) n.fail("altitudes_km", "values must be > 0");
        const auto k = n.integer("longitude_samples", 720);
        if (k < 2 || k % 2 != 0 || k > 1000000) n.fail("longitude_samples", "must be an even number >= 2");
        s.options.longitude_samples = static_cast<int>(k);
        s.options.night_only = n.boolean("night_only", true);
        s.options.min_elevation_rad = od.min_elevation_rad;
        s.options.threads = threads;
        st.body = s;
    } else if (c.kind == "montecarlo") {
        MonteCarloStudy s;
        s.passes = parse_passes(n, od, preset_names());
        s.memory_slots = n.int_list("memory_slots", {c.protocol.memory_slots});
        for (int m : s.memory_slots)
            if (m < 2) n.fail("memory_slots", "values must be >= 2");
        s.mc = parse_mc(Node(mcj, n.where("montecarlo")), seed, threads, s.stats, s.event_log_trials);
        s.mc.allocation = c.allocation;
        json m;
        m["trials"] = s.mc.trials;
        m["buffer_size"] = s.mc.buffer_size;
        m["dt_s"] = s.mc.dt_s;
        if (std::isfinite(s.mc.memory.dephasing_time_s))
            m["dephasing_time_s"] = s.mc.memory.dephasing_time_s;
        else
            m["dephasing_time_s"] = "inf";
        m["memory_efficiency"] = s.mc.memory.efficiency;
        m["coincidence_s"] = s.mc.coincidence_s;
        m["seed"] = s.mc.seed;
        m["bin_s"] = s.stats.bin_s;
        m["fidelity_bins"] = s.stats.fidelity_bins;
        if (!s.stats.dephasing_times_s.empty()) m["dephasing_sweep_s"] = s.stats.dephasing_times_s;
        if (!s.stats.infidelity_thresholds.empty()) m["infidelity_thresholds"] = s.stats.infidelity_thresholds;
        m["event_log_trials"] = s.event_log_trials;
        resolved["montecarlo"] = m;
        st.body = s;
    } else {
        CrossoverStudy s;
        s.passes = parse_passes(n, od, preset_names());
        s.loss_lo_db = n.number("loss_search_min_db", 20.0);
        s.loss_hi_db = n.number("loss_search_max_db", 40.0);
        if (!(s.loss_hi_db > s.loss_lo_db) || !std::isfinite(s.loss_hi_db))
            n.fail("loss_search_max_db", "must be finite and above loss_search_min_db");
        const auto m = n.integer("max_slots", 1 << 17);
        if (m < 2 || m > (1 << 24)) n.fail("max_slots", "must lie in [2, 16777216]");
        s.max_slots = static_cast<int>(m);
        st.body = s;
    }
    if (c.kind != "montecarlo" && raw.contains("montecarlo"))
        n.fail("montecarlo", "only valid for montecarlo studies");
    n.finish();
    if (c.kind != "montecarlo") resolved.erase("montecarlo");
    write_effective(resolved, c, od);
    c.resolved = resolved;
    return st;
}

void log_line(bool quiet, const std::string& s) {
    if (!quiet) std::cerr << s << std::endl;
}

}  // namespace

Scenario parse_scenario(const json& config, const RunOptions& options) {
    if (!config.is_object()) throw ConfigError("<root>: expected an object");
    for (const auto& [k, v] : config.items()) {
        if (k != "name" && k != "seed" && k != "threads" && k != "description" && k != "studies" && !kSections.count(k))
            throw ConfigError(k + ": unknown key");
    }
    Scenario sc;
    sc.name = config.value("name", std::string("scenario"));
    if (!config.contains("name") || !config.at("name").is_string() || sc.name.empty() ||
        sc.name.find_first_of("/\\ ") != std::string::npos)
        throw ConfigError("name: expected a nonempty string without spaces or slashes");
    if (config.contains("seed")) {
        if (!config.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        sc.seed = config.at("seed").get<std::uint64_t>();
    }
    if (options.seed) sc.seed = *options.seed;
    unsigned threads = 0;
    if (config.contains("threads")) {
        if (!config.at("threads").is_number_unsigned()) throw ConfigError("threads: expected a nonnegative integer");
        threads = config.at("threads").get<unsigned>();
    }
    if (options.threads) threads = *options.threads;
    if (!config.contains("studies")) throw ConfigError("studies: missing list of studies");
    const auto& studies = config.at("studies");
    if (!studies.is_array()) throw ConfigError("studies: expected a list");
    if (studies.empty()) throw ConfigError("studies: the study list is empty");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < studies.size(); ++i) {
        sc.studies.push_back(parse_study(config, studies[i], i, sc.seed, threads));
        if (!labels.insert(sc.studies.back().common.label).second)
            throw ConfigError("studies[" + std::to_string(i) + "].label: duplicate label '" +
                              sc.studies.back().common.label + "'");
    }
    return sc;
}

namespace {

using io::Cell;
using io::Column;
using io::ResultTable;

Cell txt(std::string s) { return Cell{std::move(s)}; }
Cell num(double v) { return Cell{v}; }
Cell cnt(long long v) { return Cell{v}; }

StudyResult run_overpass_study(const Study& st, const OverpassStudy& s) {
    const auto& c = st.common;
    ResultTable series(c.label + "_timeseries",
                       {Column::text("pass"), Column::exact("t", "s"), Column::real("range_a", "km"),
                        Column::real("range_b", "km"), Column::real("elevation_a", "deg"),
                        Column::real("elevation_b", "deg"), Column::real("loss_a", "dB"), Column::real("loss_b", "dB"),
                        Column::real("rate_dddl", "pairs/s"), Column::real("rate_link_a", "pairs/s"),
                        Column::real("rate_link_b", "pairs/s"), Column::real("rate_ssqr", "pairs/s")});
    ResultTable summary(c.label + "_summary",
                        {Column::text("pass"), Column::real("offset", "km"), Column::real("crossing_angle", "deg"),
                         Column::real("altitude", "km"), Column::exact("window_start", "s"),
                         Column::exact("window_end", "s"), Column::real("dmin_a", "km"), Column::real("dmin_b", "km"),
                         Column::exact("pdv_dddl", "pairs"), Column::exact("pdv_ssqr", "pairs"),
                         Column::exact("pdv_ssqr_equal", "pairs"), Column::integer("slots_a"),
                         Column::integer("slots_b"), Column::text("allocation")});
    for (const auto& p : s.passes) {
        const auto optics = c.optics_for(p.spec.altitude_km);
        const rates::PassEvaluator pass(p.spec, optics);
        int na = c.protocol.slots_a;
        int nb = c.protocol.slots_b;
        if (c.allocation == rates::AllocationPolicy::equal) {
            na = c.protocol.memory_slots / 2;
            nb = c.protocol.memory_slots - na;
        } else if (c.allocation == rates::AllocationPolicy::optimal_static && pass.window()) {
            const auto split = pass.optimize_split(c.protocol);
            na = split.slots_a;
            nb = split.slots_b;
        }
        const auto& w = pass.window();
        const int n = c.protocol.memory_slots;
        summary.add_row({txt(p.name), num(p.spec.offset_km), num(rad2deg(p.spec.crossing_angle_rad)),
                         num(p.spec.altitude_km), num(w ? w->t_start : std::nan("")),
                         num(w ? w->t_end : std::nan("")), num(geo::dmin_km(p.spec, geo::Station::a)),
                         num(geo::dmin_km(p.spec, geo::Station::b)), num(pass.dddl_pdv(c.protocol.source_rate_dddl)),
                         num(pass.ssqr_pdv(na, nb, c.protocol.bsm_success)),
                         num(pass.ssqr_pdv(n / 2, n - n / 2, c.protocol.bsm_success)), cnt(na), cnt(nb),
                         txt(policy_name(c.allocation))});
        if (!w) continue;
        auto params = c.protocol;
        params.slots_a = na;
        params.slots_b = nb;
        const auto steps = static_cast<long long>(std::floor(w->duration() / s.sample_step_s + 1e-9));
        for (long long i = 0; i <= steps; ++i) {
            const double t = w->t_start + s.sample_step_s * static_cast<double>(i);
            const auto ls = pass.sample(t);
            const auto r = rates::rate_sample(ls, params);
            series.add_row({txt(p.name), num(t), num(ls.range_a_km), num(ls.range_b_km),
                            num(rad2deg(ls.elevation_a_rad)), num(rad2deg(ls.elevation_b_rad)),
                            num(link::to_db(ls.eta_a)), num(link::to_db(ls.eta_b)), num(r.dddl), num(r.link_a),
                            num(r.link_b), num(r.ssqr)});
        }
    }
    return {c.label, {summary, series}, {}};
}

StudyResult run_geometry_sweep(const Study& st, const GeometrySweepStudy& s, unsigned threads) {
    const auto& c = st.common;
    struct Point {
        double offset, phi, duration = 0, dddl = 0, equal = 0, optimal = 0;
        int slots_a = 0;
    };
    std::vector<Point> pts;
    for (double d : s.offsets_km)
        for (double phi : s.crossing_angles_rad) pts.push_back({d, phi});
    const auto optics = c.optics_for(s.base.altitude_km);
    parallel_for(pts.size(), threads, [&](std::size_t i) {
        auto spec = s.base;
        spec.offset_km = pts[i].offset;
        spec.crossing_angle_rad = pts[i].phi;
        const rates::PassEvaluator pass(spec, optics);
        if (!pass.window()) return;
        const int n = c.protocol.memory_slots;
        pts[i].duration = pass.window()->duration();
        pts[i].dddl = pass.dddl_pdv(c.protocol.source_rate_dddl);
        pts[i].equal = pass.ssqr_pdv(n / 2, n - n / 2, c.protocol.bsm_success);
        const auto split = pass.optimize_split(c.protocol);
        pts[i].optimal = split.result.pdv;
        pts[i].slots_a = split.slots_a;
    });
    ResultTable t(c.label + "_grid",
                  {Column::real("offset", "km"), Column::real("crossing_angle", "deg"),
                   Column::real("window_duration", "s"), Column::exact("pdv_dddl", "pairs"),
                   Column::exact("pdv_ssqr_equal", "pairs"), Column::exact("pdv_ssqr_optimal", "pairs"),
                   Column::integer("slots_a_optimal"), Column::real("ssqr_over_dddl", ""),
                   Column::real("optimal_over_equal", "")});
    for (const auto& p : pts) {
        const double nan = std::nan("");
        t.add_row({num(p.offset), num(rad2deg(p.phi)), num(p.duration), num(p.dddl), num(p.equal), num(p.optimal),
                   cnt(p.slots_a), num(p.dddl > 0 ? p.optimal / p.dddl : nan),
                   num(p.equal > 0 ? p.optimal / p.equal : nan)});
    }
    return {c.label, {t}, {}};
}

StudyResult run_loss_sweep(const Study& st, const LossSweepStudy& s, unsigned threads) {
    const auto& c = st.common;
    ResultTable t(c.label + "_pdv",
                  {Column::text("pass"), Column::integer("memory_slots"), Column::real("system_loss", "dB"),
                   Column::exact("pdv_dddl", "pairs"), Column::exact("pdv_ssqr_optimal", "pairs"),
                   Column::integer("slots_a"), Column::real("ssqr_over_dddl", "")});
    ResultTable x(c.label + "_crossover",
                  {Column::text("pass"), Column::integer("memory_slots"), Column::real("crossover_loss", "dB")});
    struct Job {
        std::size_t pass;
        int slots;
        double loss;
        double dddl = 0, ssqr = 0;
        int slots_a = 0;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < s.passes.size(); ++p)
        for (int m : s.memory_slots)
            for (double l : s.system_loss_db) jobs.push_back({p, m, l});
    parallel_for(jobs.size(), threads, [&](std::size_t i) {
        auto& j = jobs[i];
        const auto& spec = s.passes[j.pass].spec;
        const rates::PassEvaluator pass(spec, link::pin_to_system_loss(c.optics, spec.altitude_km, j.loss));
        if (!pass.window()) return;
        const auto split = pass.optimize_split(c.protocol.with_capacity(j.slots));
        j.dddl = pass.dddl_pdv(c.protocol.source_rate_dddl);
        j.ssqr = split.result.pdv;
        j.slots_a = split.slots_a;
    });
    for (const auto& j : jobs)
        t.add_row({txt(s.passes[j.pass].name), cnt(j.slots), num(j.loss), num(j.dddl), num(j.ssqr), cnt(j.slots_a),
                   num(j.dddl > 0 ? j.ssqr / j.dddl : std::nan(""))});
    const double lo = *std::min_element(s.system_loss_db.begin(), s.system_loss_db.end());
    const double hi = *std::max_element(s.system_loss_db.begin(), s.system_loss_db.end());
    for (const auto& p : s.passes) {
        for (int m : s.memory_slots) {
            std::optional<double> xo;
            if (hi > lo) xo = rates::loss_crossover_db(p.spec, c.optics, c.protocol.with_capacity(m), lo, hi);
            x.add_row({txt(p.name), cnt(m), num(xo ? *xo : std::nan(""))});
        }
    }
    return {c.label, {t, x}, {}};
}

StudyResult run_annual(const Study& st, const AnnualStudy& s) {
    const auto& c = st.common;
    const auto catalog = annual::load_station_catalog(s.catalog_path);
    ResultTable alt(c.label + "_altitude",
                    {Column::text("pair"), Column::real("altitude", "km"), Column::exact("annual_dddl", "pairs/yr"),
                     Column::exact("annual_ssqr_equal", "pairs/yr"), Column::exact("annual_ssqr_optimal", "pairs/yr"),
                     Column::real("per_orbit_dddl", "pairs"), Column::real("orbits_per_year", "1/yr"),
                     Column::integer("counted_passes"), Column::real("quadrature_change", "")});
    ResultTable sum(c.label + "_summary",
                    {Column::text("pair"), Column::real("baseline", "km"), Column::real("crossing_angle_midpoint", "deg"),
                     Column::real("h_opt_dddl", "km"), Column::real("peak_dddl", "pairs/yr"),
                     Column::real("h_opt_ssqr_equal", "km"), Column::real("peak_ssqr_equal", "pairs/yr"),
                     Column::real("h_opt_ssqr_optimal", "km"), Column::real("peak_ssqr_optimal", "pairs/yr"),
                     Column::real("static_gain", "%"), Column::real("gamma_min", "deg"),
                     Column::real("gamma_max", "deg")});
    for (const auto& [first, second] : s.pairs) {
        const annual::OgsPair pair(annual::find_station(catalog, first), annual::find_station(catalog, second));
        std::vector<annual::AnnualComparison> rows;
        for (double h : s.altitudes_km) {
            const auto optics = c.optics_for(h);
            rows.push_back(annual::annual_comparison(pair, h, optics, c.protocol, s.options));
            const auto& r = rows.back();
            alt.add_row({txt(pair.name()), num(h), num(r.dddl.annual), num(r.ssqr_equal.annual),
                         num(r.ssqr_optimal.annual), num(r.dddl.mean_per_orbit), num(r.dddl.orbits_per_year),
                         cnt(r.dddl.counted_passes), num(r.dddl.quadrature_change())});
        }
        auto best = [&](auto member) {
            std::size_t bi = 0;
            for (std::size_t i = 1; i < rows.size(); ++i)
                if ((rows[i].*member).annual > (rows[bi].*member).annual) bi = i;
            return bi;
        };
        const auto bd = best(&annual::AnnualComparison::dddl);
        const auto be = best(&annual::AnnualComparison::ssqr_equal);
        const auto bo = best(&annual::AnnualComparison::ssqr_optimal);
        const double pe = rows[be].ssqr_equal.annual;
        const double po = rows[bo].ssqr_optimal.annual;
        sum.add_row({txt(pair.name()), num(pair.baseline_km()), num(rad2deg(pair.crossing_angle_at_midpoint())),
                     num(s.altitudes_km[bd]), num(rows[bd].dddl.annual), num(s.altitudes_km[be]), num(pe),
                     num(s.altitudes_km[bo]), num(po), num(pe > 0 ? 100.0 * (po / pe - 1.0) : std::nan("")),
                     num(rad2deg(rows[bd].dddl.gamma_min_rad)), num(rad2deg(rows[bd].dddl.gamma_max_rad))});
    }
    return {c.label, {sum, alt}, {}};
}

StudyResult run_montecarlo(const Study& st, const MonteCarloStudy& s, const fs::path& event_dir) {
    const auto& c = st.common;
    StudyResult out{c.label, {}, {}};
    ResultTable summary(c.label + "_summary",
                        {Column::text("pass"), Column::integer("memory_slots"), Column::integer("slots_a"),
                         Column::integer("slots_b"), Column::integer("trials"), Column::exact("pdv_mean", "pairs"),
                         Column::exact("pdv_sd", "pairs"), Column::exact("pdv_analytic", "pairs"),
                         Column::exact("median_wait_a", "s"), Column::exact("median_wait_b", "s"),
                         Column::real("iqr_wait_a", "s"), Column::real("iqr_wait_b", "s"),
                         Column::exact("binned_median_wait_a", "s"), Column::exact("binned_median_wait_b", "s"),
                         Column::exact("median_fidelity", ""), Column::real("min_fidelity", "")});
    ResultTable bins(c.label + "_bins",
                     {Column::text("pass"), Column::integer("memory_slots"), Column::exact("t_start", "s"),
                      Column::exact("t_end", "s"), Column::integer("swaps"), Column::real("wait_a_q1", "s"),
                      Column::real("wait_a_median", "s"), Column::real("wait_a_q3", "s"),
                      Column::real("wait_b_q1", "s"), Column::real("wait_b_median", "s"),
                      Column::real("wait_b_q3", "s"), Column::real("fidelity_q1", ""),
                      Column::real("fidelity_median", ""), Column::real("fidelity_q3", ""),
                      Column::real("pairs_mean", "pairs"), Column::real("pairs_sd", "pairs")});
    ResultTable hist(c.label + "_fidelity_hist",
                     {Column::text("pass"), Column::integer("memory_slots"), Column::exact("bin_lo", ""),
                      Column::exact("bin_hi", ""), Column::integer("count")});
    ResultTable cum(c.label + "_cumulative",
                    {Column::text("pass"), Column::integer("memory_slots"), Column::exact("infidelity", ""),
                     Column::real("pairs_per_pass", "pairs")});
    ResultTable deph(c.label + "_dephasing",
                     {Column::text("pass"), Column::integer("memory_slots"), Column::exact("dephasing_time", "s"),
                      Column::exact("fidelity_median", ""), Column::real("fidelity_q1", ""),
                      Column::real("fidelity_q3", "")});
    for (const auto& p : s.passes) {
        const auto optics = c.optics_for(p.spec.altitude_km);
        for (int m : s.memory_slots) {
            const auto params = c.protocol.with_capacity(m);
            auto params_fixed = params;
            if (c.allocation == rates::AllocationPolicy::fixed) {
                params_fixed = c.protocol;
                if (m != c.protocol.memory_slots)
                    throw ConfigError(c.label + ": fixed allocation needs memory_slots equal to protocol.memory_slots");
            }
            const mc::OverpassSimulator sim(p.spec, optics, params_fixed, s.mc);
            if (!sim.window()) {
                summary.add_row({txt(p.name), cnt(m), cnt(sim.slots_a()), cnt(sim.slots_b()), cnt(s.mc.trials),
                                 num(0), num(0), num(0), num(std::nan("")), num(std::nan("")), num(std::nan("")),
                                 num(std::nan("")), num(std::nan("")), num(std::nan("")), num(std::nan("")),
                                 num(std::nan(""))});
                continue;
            }
            stats::Accumulator acc(*sim.window(), s.stats);
            std::unique_ptr<io::EventLogWriter> log;
            std::map<int, mc::TrialRecord> pending;
            if (!event_dir.empty() && s.event_log_trials > 0) {
                const auto path = event_dir / (c.label + "_" + p.name + "_N" + std::to_string(m) + "_events.jsonl");
                log = std::make_unique<io::EventLogWriter>(path);
                out.extra_files.push_back(path);
            }
            double min_f = 1.0;
            mc::run_trials(sim, [&](mc::TrialRecord&& r) {
                acc.add(r);
                for (const auto& e : r.events)
                    if (e.bsm_success) min_f = std::min(min_f, e.fidelity);
                if (log && r.trial_id < s.event_log_trials) pending.emplace(r.trial_id, std::move(r));
            });
            // Trial order, not completion order, so logs are reproducible.
            if (log)
                for (const auto& [id, r] : pending) log->write(r);
            const auto st_ = acc.finish();
            const rates::PassEvaluator pass(p.spec, optics);
            summary.add_row({txt(p.name), cnt(m), cnt(sim.slots_a()), cnt(sim.slots_b()), cnt(st_.trials),
                             num(st_.pdv.mean), num(st_.pdv.sd),
                             num(pass.ssqr_pdv(sim.slots_a(), sim.slots_b(), params.bsm_success)),
                             num(st_.wait_a.median), num(st_.wait_b.median), num(st_.wait_a.iqr()),
                             num(st_.wait_b.iqr()), num(st_.binned_median_wait_a), num(st_.binned_median_wait_b),
                             num(st_.fidelity.median), num(st_.fidelity.count ? min_f : std::nan(""))});
            for (const auto& b : st_.bins)
                bins.add_row({txt(p.name), cnt(m), num(b.t_start), num(b.t_end),
                              cnt(static_cast<long long>(b.wait_a.count)), num(b.wait_a.q1), num(b.wait_a.median),
                              num(b.wait_a.q3), num(b.wait_b.q1), num(b.wait_b.median), num(b.wait_b.q3),
                              num(b.fidelity.q1), num(b.fidelity.median), num(b.fidelity.q3),
                              num(b.successes.mean), num(b.successes.sd)});
            const auto& h = st_.fidelity_histogram;
            for (std::size_t i = 0; i < h.counts.size(); ++i)
                hist.add_row({txt(p.name), cnt(m), num(h.edge(i)), num(h.edge(i + 1)), cnt(h.counts[i])});
            for (const auto& cp : st_.cumulative)
                cum.add_row({txt(p.name), cnt(m), num(cp.infidelity), num(cp.pairs_per_pass)});
            for (const auto& dp : st_.dephasing)
                deph.add_row({txt(p.name), cnt(m), num(dp.dephasing_time_s), num(dp.fidelity.median),
                              num(dp.fidelity.q1), num(dp.fidelity.q3)});
        }
    }
    out.tables = {summary, bins, hist, cum};
    if (!s.stats.dephasing_times_s.empty()) out.tables.push_back(deph);
    return out;
}

StudyResult run_crossover(const Study& st, const CrossoverStudy& s) {
    const auto& c = st.common;
    ResultTable t(c.label + "_crossover",
                  {Column::text("pass"), Column::exact("pdv_dddl", "pairs"), Column::integer("crossover_slots"),
                   Column::integer("slots_a"), Column::integer("slots_b"), Column::integer("nu_c", "modes/MHz"),
                   Column::real("loss_crossover", "dB")});
    for (const auto& p : s.passes) {
        const auto optics = c.optics_for(p.spec.altitude_km);
        const rates::PassEvaluator pass(p.spec, optics);
        if (!pass.window()) {
            t.add_row({txt(p.name), num(0), cnt(-1), cnt(-1), cnt(-1), cnt(-1), num(std::nan(""))});
            continue;
        }
        const auto nc = rates::crossover_capacity(pass, c.protocol, s.max_slots);
        int sa = -1;
        int sb = -1;
        if (nc) {
            const auto split = pass.optimize_split(c.protocol.with_capacity(*nc));
            sa = split.slots_a;
            sb = split.slots_b;
        }
        const auto xo = rates::loss_crossover_db(p.spec, c.optics, c.protocol, s.loss_lo_db, s.loss_hi_db);
        t.add_row({txt(p.name), num(pass.dddl_pdv(c.protocol.source_rate_dddl)), cnt(nc ? *nc : -1), cnt(sa), cnt(sb),
                   cnt(nc ? rates::nu_c(pass, c.protocol) : -1), num(xo ? *xo : std::nan(""))});
    }
    return {c.label, {t}, {}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

StudyResult run_study(const Study& study, std::uint64_t seed, unsigned threads, const fs::path& event_dir) {
    StudyResult r = std::visit(
        [&](const auto& body) -> StudyResult {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, OverpassStudy>) return run_overpass_study(study, body);
            if constexpr (std::is_same_v<T, GeometrySweepStudy>) return run_geometry_sweep(study, body, threads);
            if constexpr (std::is_same_v<T, LossSweepStudy>) return run_loss_sweep(study, body, threads);
            if constexpr (std::is_same_v<T, AnnualStudy>) return run_annual(study, body);
            if constexpr (std::is_same_v<T, MonteCarloStudy>) return run_montecarlo(study, body, event_dir);
            if constexpr (std::is_same_v<T, CrossoverStudy>) return run_crossover(study, body);
        },
        study.body);
    for (auto& t : r.tables) {
        t.set_meta("version", kVersion);
        t.set_meta("seed", std::to_string(seed));
        t.set_meta("study", study.common.kind);
        t.set_meta("config", study.common.resolved.dump());
    }
    return r;
}

RunReport run_config(const json& config, const RunOptions& options) {
    const Scenario sc = parse_scenario(config, options);
    unsigned threads = 0;
    if (config.contains("threads")) threads = config.at("threads").get<unsigned>();
    if (options.threads) threads = *options.threads;

    RunReport report;
    const fs::path root = options.output_dir.empty() ? default_output_dir() : options.output_dir;
    report.directory = root / sc.name;
    fs::create_directories(report.directory);

    json manifest;
    manifest["name"] = sc.name;
    manifest["version"] = kVersion;
    manifest["seed"] = sc.seed;
    manifest["created_utc"] = utc_timestamp();
    manifest["files"] = json::array();
    for (std::size_t i = 0; i < sc.studies.size(); ++i) {
        const auto& st = sc.studies[i];
        log_line(options.quiet, "[" + std::to_string(i + 1) + "/" + std::to_string(sc.studies.size()) + "] " +
                                    st.common.kind + " " + st.common.label);
        auto result = run_study(st, sc.seed, threads, report.directory);
        for (const auto& t : result.tables) {
            const auto path = report.directory / (t.name() + ".csv");
            io::write_table(t, path);
            report.files.push_back(path);
            manifest["files"].push_back(path.filename().string());
            log_line(options.quiet, "  wrote " + path.string());
        }
        for (const auto& f : result.extra_files) {
            report.files.push_back(f);
            manifest["files"].push_back(f.filename().string());
            log_line(options.quiet, "  wrote " + f.string());
        }
        report.studies.push_back(std::move(result));
    }
    json resolved = config;
    resolved["seed"] = sc.seed;
    manifest["config"] = resolved;
    const auto mpath = report.directory / "manifest.json";
    std::ofstream(mpath) << manifest.dump(2) << '\n';
    report.files.push_back(mpath);
    return report;
}

}  // namespace ssqr::scenario
