#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mixsamp/experiments.hpp"

namespace mixsamp {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double nearest_rank_percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of empty set");
    std::sort(values.begin(), values.end());
    const auto m = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * m));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

int KSpec::resolve(int dim) const {
    if (!(raw > 0)) throw std::invalid_argument("k value must be positive");
    const double k = is_fraction() ? raw * dim : raw;
    return std::clamp(static_cast<int>(std::llround(k)), 1, dim);
}

void SweepConfig::validate() const {
    chain.validate();
    pulse.validate();
    if (purity_grid.empty()) throw std::invalid_argument("config: purity_grid is empty");
    const double p_floor = 1.0 / chain.dim() - 1e-12;
    for (double p : purity_grid)
        if (p < p_floor || p > 1.0 + 1e-12)
            throw std::invalid_argument("config: purity target outside [1/N, 1]");
    if (k_values.empty()) throw std::invalid_argument("config: k_values is empty");
    for (const KSpec& k : k_values) k.resolve(chain.dim());
    if (n_observables < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (estimators.empty()) throw std::invalid_argument("config: estimators is empty");
    for (const EstimatorKind& kind : estimators) kind.validate();
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    for (double e : emax_grid)
        if (!(e >= 0)) throw std::invalid_argument("config: emax values must be >= 0");
    for (double p : residuum_purities)
        if (p < p_floor || p > 1.0 + 1e-12)
            throw std::invalid_argument("config: residuum purity outside [1/N, 1]");
}

SweepConfig default_config(bool full_scale) {
    SweepConfig config;
    config.full_scale = full_scale;
    for (const char* id : {"eigen", "eigen+ts", "eigen+ts+bg", "rp", "rp+ts", "rp+ts+bg", "obs"})
        config.estimators.push_back(EstimatorKind::parse(id));
    if (full_scale) {
        config.chain.n_spins = 10;
        config.n_observables = 200;
        config.pulse = PulseSpec::standard(170.0, 1024);
        config.purity_grid = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9, 0.99};
        config.residuum_purities = {1e-2, 5e-2, 1e-1};
    } else {
        config.chain.n_spins = 6;
        config.n_observables = 50;
        config.pulse = PulseSpec::standard(170.0, 512);
        config.purity_grid = {0.016, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9, 0.99};
        // a 1e-2 residuum panel sits below 1/N at six spins; the desk
        // default starts at the smallest feasible decade
        config.residuum_purities = {2e-2, 5e-2, 1e-1};
    }
    return config;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("config: bad number for " + key + ": " + value);
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v)) throw std::invalid_argument("config: " + key + " must be an integer");
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad seed for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: " + key + " must be true or false");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split(value, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

}  // namespace

SweepConfig parse_config_text(const std::string& text, const SweepConfig& base) {
    SweepConfig config = base;
    bool tau_or_steps_changed = false;
    bool dt_explicit = false, center_explicit = false;

    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "spins") config.chain.n_spins = parse_int(key, value);
        else if (key == "coupling_j") config.chain.coupling_j = parse_double(key, value);
        else if (key == "field_hz") config.chain.field_hz = parse_double(key, value);
        else if (key == "pulse_emax") config.pulse.e_max = parse_double(key, value);
        else if (key == "pulse_tau") {
            config.pulse.tau = parse_double(key, value);
            tau_or_steps_changed = true;
        } else if (key == "pulse_steps") {
            config.pulse.n_steps = parse_int(key, value);
            tau_or_steps_changed = true;
        } else if (key == "pulse_dt") {
            config.pulse.dt = parse_double(key, value);
            dt_explicit = true;
        } else if (key == "pulse_center") {
            config.pulse.t_center = parse_double(key, value);
            center_explicit = true;
        } else if (key == "pulse_bandwidth") config.pulse.bandwidth_fraction = parse_double(key, value);
        else if (key == "purity_grid") config.purity_grid = parse_double_list(key, value);
        else if (key == "k_values") {
            config.k_values.clear();
            for (double v : parse_double_list(key, value)) config.k_values.push_back({v});
        } else if (key == "trials") config.n_observables = parse_int(key, value);
        else if (key == "traceless_observables") config.traceless_observables = parse_bool(key, value);
        else if (key == "estimators") {
            config.estimators.clear();
            for (const std::string& id : split(value, ','))
                config.estimators.push_back(EstimatorKind::parse(id));
        } else if (key == "seed") config.master_seed = parse_u64(key, value);
        else if (key == "out") config.output_dir = value;
        else if (key == "threads") config.threads = parse_int(key, value);
        else if (key == "full_scale") config.full_scale = parse_bool(key, value);
        else if (key == "record_intermediate") config.record_intermediate = parse_bool(key, value);
        else if (key == "emax_grid") config.emax_grid = parse_double_list(key, value);
        else if (key == "residuum_purities") config.residuum_purities = parse_double_list(key, value);
        else if (key == "presets") {
            config.presets.clear();
            for (const std::string& pair : split(value, ',')) {
                const auto colon = pair.find(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("config: presets entries must be J:h_z pairs");
                config.presets.push_back({parse_double(key, trim(pair.substr(0, colon))),
                                          parse_double(key, trim(pair.substr(colon + 1)))});
            }
        } else if (key == "command" || key == "toolkit_version") {
            // manifest bookkeeping, no config effect
        } else {
            throw std::invalid_argument("config: unknown key: " + key);
        }
    }

    // Keep the grid consistent with a changed envelope unless the user
    // pinned dt / t_center explicitly (manifests always pin them).
    if (tau_or_steps_changed && !dt_explicit)
        config.pulse.dt = 6.0 * config.pulse.tau / config.pulse.n_steps;
    if (tau_or_steps_changed && !center_explicit)
        config.pulse.t_center = 3.0 * config.pulse.tau;
    return config;
}

SweepConfig load_config_file(const std::string& path, const SweepConfig& base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), base);
}

std::optional<std::string> manifest_command(const std::string& text) {
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        if (trim(line.substr(0, eq)) == "command") return trim(line.substr(eq + 1));
    }
    return std::nullopt;
}

std::string config_to_text(const SweepConfig& config, const std::string& command) {
    std::ostringstream out;
    out << "# mixsamp run manifest; feed back via --config to reproduce\n";
    out << "toolkit_version = 0.1.0\n";
    if (!command.empty()) out << "command = " << command << "\n";
    out << "spins = " << config.chain.n_spins << "\n";
    out << "coupling_j = " << format_double(config.chain.coupling_j) << "\n";
    out << "field_hz = " << format_double(config.chain.field_hz) << "\n";
    out << "pulse_emax = " << format_double(config.pulse.e_max) << "\n";
    out << "pulse_tau = " << format_double(config.pulse.tau) << "\n";
    out << "pulse_steps = " << config.pulse.n_steps << "\n";
    out << "pulse_dt = " << format_double(config.pulse.dt) << "\n";
    out << "pulse_center = " << format_double(config.pulse.t_center) << "\n";
    out << "pulse_bandwidth = " << format_double(config.pulse.bandwidth_fraction) << "\n";

    auto write_list = [&out](const char* key, const std::vector<double>& values) {
        out << key << " = ";
        for (std::size_t i = 0; i < values.size(); ++i)
            out << (i ? "," : "") << format_double(values[i]);
        out << "\n";
    };
    write_list("purity_grid", config.purity_grid);
    std::vector<double> raw_ks;
    for (const KSpec& k : config.k_values) raw_ks.push_back(k.raw);
    write_list("k_values", raw_ks);

    out << "trials = " << config.n_observables << "\n";
    out << "traceless_observables = " << (config.traceless_observables ? "true" : "false")
        << "\n";
    out << "estimators = ";
    for (std::size_t i = 0; i < config.estimators.size(); ++i)
        out << (i ? "," : "") << config.estimators[i].id();
    out << "\n";
    out << "seed = " << config.master_seed << "\n";
    out << "threads = " << config.threads << "\n";
    out << "full_scale = " << (config.full_scale ? "true" : "false") << "\n";
    out << "record_intermediate = " << (config.record_intermediate ? "true" : "false") << "\n";
    write_list("emax_grid", config.emax_grid);
    out << "presets = ";
    for (std::size_t i = 0; i < config.presets.size(); ++i)
        out << (i ? "," : "") << format_double(config.presets[i].coupling_j) << ":"
            << format_double(config.presets[i].field_hz);
    out << "\n";
    write_list("residuum_purities", config.residuum_purities);
    return out.str();
}

}  // namespace mixsamp
