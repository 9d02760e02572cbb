// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_CONFIG_HPP
#define THZ_CONFIG_HPP

#include "thz/harness.hpp"

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thz
{

// Configuration problem; line is 0 when no single line is to blame.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string source, int line, std::string field, const std::string &what);

    const std::string &source() const noexcept { return source_; }
    int line() const noexcept { return line_; }
    const std::string &field() const noexcept { return field_; }

private:
    std::string source_;
    int line_;
    std::string field_;
};

struct ConfigEntry
{
    std::string value;
    int line = 0; // 0 for values set by overrides
};

// Sectioned key = value text. '#' starts a comment anywhere, ';' only at the
// start of a line. Keys are unique within a section.
class ConfigDoc
{
public:
    static ConfigDoc parse(std::istream &in, const std::string &source = "<config>");
    static ConfigDoc load(const std::string &path);

    const std::string &source() const noexcept { return source_; }
    bool has_section(const std::string &section) const;
    bool has(const std::string &section, const std::string &key) const;
    const ConfigEntry *find(const std::string &section, const std::string &key) const;
    const ConfigEntry &require(const std::string &section, const std::string &key) const;
    void set(const std::string &section, const std::string &key, const std::string &value);

    double get_double(const std::string &section, const std::string &key, std::optional<double> fallback = {}) const;
    long long get_int(const std::string &section, const std::string &key,
                      std::optional<long long> fallback = {}) const;
    bool get_bool(const std::string &section, const std::string &key, std::optional<bool> fallback = {}) const;
    std::string get_string(const std::string &section, const std::string &key,
                           std::optional<std::string> fallback = {}) const;

    [[noreturn]] void fail(const std::string &section, const std::string &key, const std::string &what) const;

    // Canonical text (sections and keys sorted); parses back to the same values.
    std::string to_text() const;

    const std::map<std::string, std::map<std::string, ConfigEntry>> &sections() const noexcept { return data_; }

private:
    std::string source_;
    std::map<std::string, std::map<std::string, ConfigEntry>> data_;
};

// Comma or space separated items, each a number, "-inf", or an inclusive
// range "start:step:stop".
std::vector<double> parse_snr_grid(const std::string &text);
std::vector<DetectorKind> parse_detector_list(const std::string &text);

// Rejects unknown sections and keys, and missing required fields.
void check_schema(const ConfigDoc &doc);
SimConfig build_sim_config(const ConfigDoc &doc);
NomaSimSpec build_noma_spec(const ConfigDoc &doc);
ArrayGeometry build_geometry(const ConfigDoc &doc);

// Resolves a bundled profile name (e.g. "fig3a") to its file; other strings
// are returned unchanged.
std::string resolve_config_path(const std::string &name_or_path);

} // namespace thz

#endif
