#pragma once

#include "nsbiot/system.hpp"
#include "nsbiot/verify.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nsbiot {

/// Flat `key = value` text with dotted keys, `#` comments and blank lines.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    /// Throws ConfigError naming the line for malformed lines or repeated keys.
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

    // Typed accessors; each marks the key as used and throws ConfigError with
    // the key path on conversion failure.
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> get_optional_double(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;

    /// Keys never read by any accessor.
    std::vector<std::string> unused_keys() const;

private:
    const Entry* find(const std::string& key) const;
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

enum class ScenarioKind { example1_mms, example3_filter, custom };
const char* scenario_name(ScenarioKind k);

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::example1_mms;
    PhysicalParams params;
    double dt = 1e-3;
    double T = 0.01;
    NewtonConfig newton;
    int threads = 1;
    std::vector<LevelSpec> levels;

    // Example 3: refinement of the 30 x 10 base grid, material preset and
    // driving pressures.
    int refine = 1;
    std::string material = "hard";
    double p_ref = 100.0;
    double delta_p = 1e-9;

    // Custom: mesh file with both subdomains and constant boundary data.
    std::string mesh_file;
    double p_in = 0, p_out = 0, p_darcy = 0;

    InitialMode initial = InitialMode::analytic;
    double initial_p0 = 0;

    std::string out_dir = "out";
    bool vtk = true;
    int vtk_every = 1;
    bool interface_csv = true;
    double pressure_offset = 0;
};

/// Parse and check types, keys and ranges. Every problem is collected;
/// throws ConfigError with the first one (key path prefixed) when any exist.
ScenarioConfig parse_config(const ConfigFile& file);
ScenarioConfig load_config(const std::string& path);

/// Dry-run checks: parameter ranges, T = N dt, Newton settings and mesh
/// invariants (builds or loads the meshes). Returns one message per problem.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

} // namespace nsbiot
