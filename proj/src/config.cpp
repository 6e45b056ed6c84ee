#include "hotspot/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "hotspot/errors.hpp"

namespace hotspot {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad numeric value for " + key + ": '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad integer value for " + key + ": '" + value + "'");
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void parse_flat_config(
    const std::string& path,
    const std::function<void(const std::string&, const std::string&, int)>& apply) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno);
    }
}

bool AppConfig::apply(const std::string& key, const std::string& value) {
    // Engine.
    if (key == "tau") engine.tau = parse_double(key, value);
    else if (key == "ref_divisor") engine.ref_divisor = parse_double(key, value);
    else if (key == "min_samples") engine.min_samples = static_cast<int>(parse_int(key, value));
    else if (key == "n_confirm") engine.n_confirm = static_cast<int>(parse_int(key, value));
    else if (key == "k_possible") engine.k_possible = static_cast<int>(parse_int(key, value));
    else if (key == "recent_window") engine.recent_window = static_cast<int>(parse_int(key, value));
    else if (key == "t_w_s") engine.t_w_s = parse_double(key, value);
    else if (key == "nd_min") engine.nd_min = parse_double(key, value);
    else if (key == "speed_cap_mps") engine.speed_cap_mps = parse_double(key, value);
    else if (key == "d_in_m") engine.default_d_in_m = parse_double(key, value);
    else if (key == "corr_min") engine.corr_min = parse_double(key, value);
    // Sampler.
    else if (key == "s_min_s") sampler.s_min_s = parse_double(key, value);
    else if (key == "s_max_s") sampler.s_max_s = parse_double(key, value);
    else if (key == "poll_interval_s") sampler.poll_interval_s = parse_double(key, value);
    else if (key == "expedite_ttl_s") sampler.expedite_ttl_s = parse_double(key, value);
    else if (key == "distance_mode") {
        if (value == "road") sampler.straight_line_distance = false;
        else if (value == "straight") sampler.straight_line_distance = true;
        else throw ParseError("distance_mode must be 'road' or 'straight'");
    }
    // Activity.
    else if (key == "window_s") activity_window_s = parse_double(key, value);
    else if (key == "accel_var_min") activity.accel_var_min = parse_double(key, value);
    else if (key == "gsm_tower_min") activity.gsm_tower_min = static_cast<int>(parse_int(key, value));
    // Road / trace.
    else if (key == "max_snap_m") max_snap_m = parse_double(key, value);
    else if (key == "gap_max_s") gap_max_s = parse_double(key, value);
    // Energy analysis.
    else if (key == "v_in_mps") v_in_mps = parse_double(key, value);
    else if (key == "v_out_mps") v_out_mps = parse_double(key, value);
    else if (key == "d_out_m") d_out_m = parse_double(key, value);
    else if (key == "e_in_j") e_in_j = parse_double(key, value);
    else if (key == "e_out_j") e_out_j = parse_double(key, value);
    else if (key == "battery_j") battery_j = parse_double(key, value);
    else if (key == "budget_j") budget_j = parse_double(key, value);
    // Simulation.
    else if (key == "bytes_per_sample") bytes_per_sample = parse_double(key, value);
    else if (key == "noise_sd_frac") noise_sd_frac = parse_double(key, value);
    else if (key == "horizon_s") horizon_s = parse_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "incident_crawl_mps") incident_crawl_mps = parse_double(key, value);
    else return false;
    return true;
}

void AppConfig::load_file(const std::string& path) {
    parse_flat_config(path, [this, &path](const std::string& k, const std::string& v, int line) {
        if (!apply(k, v))
            throw ParseError(path + ":" + std::to_string(line) + ": unknown key '" + k + "'");
    });
}

void AppConfig::print(std::ostream& out) const {
    out << "# engine\n";
    out << "tau = " << engine.tau << "\n";
    out << "ref_divisor = " << engine.ref_divisor << "\n";
    out << "min_samples = " << engine.min_samples << "\n";
    out << "n_confirm = " << engine.n_confirm << "\n";
    out << "k_possible = " << engine.k_possible << "\n";
    out << "recent_window = " << engine.recent_window << "\n";
    out << "t_w_s = " << engine.t_w_s << "\n";
    out << "nd_min = " << engine.nd_min << "\n";
    out << "speed_cap_mps = " << engine.speed_cap_mps << "\n";
    out << "d_in_m = " << engine.default_d_in_m << "\n";
    out << "corr_min = " << engine.corr_min << "\n";
    out << "# sampler\n";
    out << "s_min_s = " << sampler.s_min_s << "\n";
    out << "s_max_s = " << sampler.s_max_s << "\n";
    out << "poll_interval_s = " << sampler.poll_interval_s << "\n";
    out << "expedite_ttl_s = " << sampler.expedite_ttl_s << "\n";
    out << "distance_mode = " << (sampler.straight_line_distance ? "straight" : "road") << "\n";
    out << "# activity\n";
    out << "window_s = " << activity_window_s << "\n";
    out << "accel_var_min = " << activity.accel_var_min << "\n";
    out << "gsm_tower_min = " << activity.gsm_tower_min << "\n";
    out << "# road / trace\n";
    out << "max_snap_m = " << max_snap_m << "\n";
    out << "gap_max_s = " << gap_max_s << "\n";
    out << "# energy\n";
    out << "v_in_mps = " << v_in_mps << "\n";
    out << "v_out_mps = " << v_out_mps << "\n";
    out << "d_out_m = " << d_out_m << "\n";
    out << "e_in_j = " << e_in_j << "\n";
    out << "e_out_j = " << e_out_j << "\n";
    out << "battery_j = " << battery_j << "\n";
    out << "budget_j = " << budget_j << "\n";
    out << "# simulation\n";
    out << "bytes_per_sample = " << bytes_per_sample << "\n";
    out << "noise_sd_frac = " << noise_sd_frac << "\n";
    out << "horizon_s = " << horizon_s << "\n";
    out << "seed = " << seed << "\n";
    out << "incident_crawl_mps = " << incident_crawl_mps << "\n";
}

}  // namespace hotspot
