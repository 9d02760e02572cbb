// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/config.hpp"

#include "thz/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#ifndef THZ_CONFIG_DIR
#define THZ_CONFIG_DIR "configs"
#endif

namespace thz
{

namespace
{
std::string describe(const std::string &source, int line, const std::string &field, const std::string &what)
{
    std::string out = source;
    if (line > 0)
        out += ":" + std::to_string(line);
    if (!field.empty())
        out += ": " + field;
    return out + ": " + what;
}

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string field_name(const std::string &section, const std::string &key)
{
    return "[" + section + "] " + key;
}

std::vector<std::string> tokens(const std::string &text, const char *separators = ", \t")
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text)
    {
        if (std::strchr(separators, ch))
        {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        }
        else
        {
            cur.push_back(ch);
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

double to_double(const std::string &s)
{
    const std::string l = lower(s);
    if (l == "-inf")
        return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v))
        throw std::invalid_argument(s);
    return v;
}
} // namespace

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string &what)
    : std::runtime_error(describe(source, line, field, what)), source_(std::move(source)), line_(line),
      field_(std::move(field))
{
}

// ----------------------------------------------------------------- parsing

ConfigDoc ConfigDoc::parse(std::istream &in, const std::string &source)
{
    ConfigDoc doc;
    doc.source_ = source;
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw))
    {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty() || line.front() == ';')
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ConfigError(source, lineno, "", "unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw ConfigError(source, lineno, "", "empty section name");
            doc.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, lineno, "", "expected 'key = value'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source, lineno, "", "empty key");
        if (section.empty())
            throw ConfigError(source, lineno, key, "key outside of any section");
        auto &sec = doc.data_[section];
        if (sec.count(key))
            throw ConfigError(source, lineno, field_name(section, key),
                              fmt::format("duplicate key (first set on line {})", sec[key].line));
        sec[key] = {value, lineno};
    }
    return doc;
}

ConfigDoc ConfigDoc::load(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, 0, "", "cannot open configuration file");
    return parse(in, path);
}

bool ConfigDoc::has_section(const std::string &section) const
{
    return data_.count(section) > 0;
}

bool ConfigDoc::has(const std::string &section, const std::string &key) const
{
    return find(section, key) != nullptr;
}

const ConfigEntry *ConfigDoc::find(const std::string &section, const std::string &key) const
{
    const auto s = data_.find(section);
    if (s == data_.end())
        return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

const ConfigEntry &ConfigDoc::require(const std::string &section, const std::string &key) const
{
    const ConfigEntry *e = find(section, key);
    if (!e)
        throw ConfigError(source_, 0, field_name(section, key), "missing required field");
    return *e;
}

void ConfigDoc::set(const std::string &section, const std::string &key, const std::string &value)
{
    data_[section][key] = {value, 0};
}

void ConfigDoc::fail(const std::string &section, const std::string &key, const std::string &what) const
{
    const ConfigEntry *e = find(section, key);
    throw ConfigError(source_, e ? e->line : 0, field_name(section, key), what);
}

double ConfigDoc::get_double(const std::string &section, const std::string &key, std::optional<double> fallback) const
{
    const ConfigEntry *e = find(section, key);
    if (!e)
    {
        if (fallback)
            return *fallback;
        require(section, key);
    }
    try
    {
        const double v = to_double(e->value);
        if (!std::isfinite(v))
            throw std::invalid_argument(e->value);
        return v;
    }
    catch (const std::logic_error &)
    {
        fail(section, key, "expected a finite number, got '" + e->value + "'");
    }
}

long long ConfigDoc::get_int(const std::string &section, const std::string &key, std::optional<long long> fallback) const
{
    const ConfigEntry *e = find(section, key);
    if (!e)
    {
        if (fallback)
            return *fallback;
        require(section, key);
    }
    try
    {
        std::size_t used = 0;
        const long long v = std::stoll(e->value, &used);
        if (used != e->value.size())
            throw std::invalid_argument(e->value);
        return v;
    }
    catch (const std::logic_error &)
    {
        // Allow exponent notation for whole numbers such as 1e6.
        try
        {
            const double d = to_double(e->value);
            if (std::floor(d) == d && std::abs(d) < 9.0e18)
                return static_cast<long long>(d);
        }
        catch (const std::logic_error &)
        {
        }
        fail(section, key, "expected an integer, got '" + e->value + "'");
    }
}

bool ConfigDoc::get_bool(const std::string &section, const std::string &key, std::optional<bool> fallback) const
{
    const ConfigEntry *e = find(section, key);
    if (!e)
    {
        if (fallback)
            return *fallback;
        require(section, key);
    }
    const std::string v = lower(e->value);
    if (v == "1" || v == "true" || v == "on" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "off" || v == "no")
        return false;
    fail(section, key, "expected on/off, got '" + e->value + "'");
}

std::string ConfigDoc::get_string(const std::string &section, const std::string &key,
                                  std::optional<std::string> fallback) const
{
    const ConfigEntry *e = find(section, key);
    if (!e)
    {
        if (fallback)
            return *fallback;
        require(section, key);
    }
    return e->value;
}

std::string ConfigDoc::to_text() const
{
    std::string out;
    for (const auto &[section, keys] : data_)
    {
        out += "[" + section + "]\n";
        for (const auto &[key, entry] : keys)
            out += key + " = " + entry.value + "\n";
        out += "\n";
    }
    return out;
}

// ------------------------------------------------------------------ values

std::vector<double> parse_snr_grid(const std::string &text)
{
    std::vector<double> out;
    for (const auto &tok : tokens(text))
    {
        if (tok.find(':') == std::string::npos)
        {
            out.push_back(to_double(tok));
            continue;
        }
        const auto parts = tokens(tok, ":");
        if (parts.size() != 3)
            throw std::invalid_argument("range must be start:step:stop");
        const double a = to_double(parts[0]);
        const double step = to_double(parts[1]);
        const double b = to_double(parts[2]);
        if (!std::isfinite(a) || !(step > 0.0) || !(b >= a))
            throw std::invalid_argument("range needs finite start <= stop and step > 0");
        const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 100000)
            throw std::invalid_argument("range has too many points");
        for (long long k = 0; k < count; ++k)
            out.push_back(a + static_cast<double>(k) * step);
    }
    if (out.empty())
        throw std::invalid_argument("empty SNR grid");
    return out;
}

std::vector<DetectorKind> parse_detector_list(const std::string &text)
{
    std::vector<DetectorKind> out;
    for (const auto &tok : tokens(text))
    {
        if (lower(tok) == "all")
        {
            for (DetectorKind k : kAllDetectors)
                if (std::find(out.begin(), out.end(), k) == out.end())
                    out.push_back(k);
            continue;
        }
        const DetectorKind k = parse_detector(tok);
        if (std::find(out.begin(), out.end(), k) != out.end())
            throw std::invalid_argument("detector '" + tok + "' listed twice");
        out.push_back(k);
    }
    if (out.empty())
        throw std::invalid_argument("empty detector list");
    return out;
}

// ------------------------------------------------------------------ schema

namespace
{
const std::map<std::string, std::set<std::string>> &schema()
{
    static const std::map<std::string, std::set<std::string>> s = {
        {"meta", {"name", "description"}},
        {"sweep",
         {"detectors", "snr_db", "mode", "max_trials", "min_bit_errors", "batch_trials", "seed", "workers",
          "theory_draws", "ml_cap", "rank_tolerance"}},
        {"channel",
         {"kind", "rows", "cols", "absorption_per_m", "absorption_table", "tx_gain", "rx_gain", "tx_azimuth",
          "tx_elevation", "rx_azimuth", "rx_elevation", "tuning", "tuning_z", "clusters", "rays_mean",
          "cluster_decay_s", "ray_decay_s", "cluster_rate_hz", "ray_rate_hz", "az_weight", "az_sigma1", "az_sigma2",
          "el_weight", "el_sigma1", "el_sigma2", "matrix_re", "matrix_im"}},
        {"geometry",
         {"tx_rows", "tx_cols", "rx_rows", "rx_cols", "elements_per_side", "element_spacing_m", "subarray_spacing_m",
          "carrier_hz", "distance_m"}},
        {"streams", {"sa_count"}},
        {"noma",
         {"inner_radius_m", "cell_radius_m", "inner_density", "outer_density", "pathloss_exponent",
          "sensitivity_dbm", "max_power_w", "pc_parameter", "sa_count", "sector_deg", "min_distance_m", "order_near",
          "order_far", "tune_near", "tune_far", "drop_budget"}},
    };
    return s;
}

const std::regex &stream_key()
{
    static const std::regex re(R"(s([1-9][0-9]*)\.(size|order|power|columns))");
    return re;
}
} // namespace

void check_schema(const ConfigDoc &doc)
{
    for (const auto &[section, keys] : doc.sections())
    {
        const auto it = schema().find(section);
        if (it == schema().end())
        {
            const int line = keys.empty() ? 0 : keys.begin()->second.line;
            throw ConfigError(doc.source(), line, "[" + section + "]", "unknown section");
        }
        for (const auto &[key, entry] : keys)
        {
            if (it->second.count(key))
                continue;
            if (section == "streams" && std::regex_match(key, stream_key()))
                continue;
            throw ConfigError(doc.source(), entry.line, field_name(section, key), "unknown field");
        }
    }
    if (!doc.has_section("noma") && !doc.has_section("streams"))
        throw ConfigError(doc.source(), 0, "[streams]", "missing required section ([streams] or [noma])");
    if (doc.has_section("noma") && doc.has_section("streams"))
        throw ConfigError(doc.source(), 0, "[streams]", "[streams] and [noma] are mutually exclusive");
    doc.require("sweep", "detectors");
    doc.require("sweep", "snr_db");
}

// ---------------------------------------------------------------- builders

namespace
{
template <class F> auto guarded(const ConfigDoc &doc, const std::string &section, const std::string &key, F &&fn)
{
    try
    {
        return fn();
    }
    catch (const ConfigError &)
    {
        throw;
    }
    catch (const std::exception &e)
    {
        doc.fail(section, key, e.what());
    }
}

int positive_int(const ConfigDoc &doc, const std::string &section, const std::string &key,
                 std::optional<long long> fallback = {})
{
    const long long v = doc.get_int(section, key, fallback);
    if (v < 1 || v > 1'000'000)
        doc.fail(section, key, "must be a positive count");
    return static_cast<int>(v);
}

double positive(const ConfigDoc &doc, const std::string &section, const std::string &key,
                std::optional<double> fallback = {})
{
    const double v = doc.get_double(section, key, fallback);
    if (!(v > 0.0))
        doc.fail(section, key, "must be positive");
    return v;
}

ChannelParams build_params(const ConfigDoc &doc, double carrier_hz)
{
    ChannelParams p;
    if (doc.has("channel", "absorption_per_m") && doc.has("channel", "absorption_table"))
        doc.fail("channel", "absorption_table", "conflicts with absorption_per_m");
    if (doc.has("channel", "absorption_table"))
    {
        const std::string name = doc.get_string("channel", "absorption_table");
        p.absorption_per_m = guarded(doc, "channel", "absorption_table", [&] {
            if (lower(name) == "bundled")
                return AbsorptionTable::bundled().at(carrier_hz);
            std::filesystem::path path(name);
            if (path.is_relative())
                path = std::filesystem::path(doc.source()).parent_path() / path;
            return AbsorptionTable::load(path.string()).at(carrier_hz);
        });
    }
    else
    {
        p.absorption_per_m = doc.get_double("channel", "absorption_per_m", 0.0);
    }
    p.tx_gain = doc.get_double("channel", "tx_gain", 1.0);
    p.rx_gain = doc.get_double("channel", "rx_gain", 1.0);
    p.tx_azimuth = doc.get_double("channel", "tx_azimuth", 0.0);
    p.tx_elevation = doc.get_double("channel", "tx_elevation", 0.0);
    p.rx_azimuth = doc.get_double("channel", "rx_azimuth", 0.0);
    p.rx_elevation = doc.get_double("channel", "rx_elevation", 0.0);
    guarded(doc, "channel", "tx_gain", [&] {
        p.validate();
        return 0;
    });
    return p;
}

MultipathParams build_multipath(const ConfigDoc &doc)
{
    MultipathParams mp;
    const long long clusters = doc.get_int("channel", "clusters", 4);
    if (clusters < 0)
        doc.fail("channel", "clusters", "must be >= 0");
    mp.clusters = static_cast<int>(clusters);
    mp.rays_mean = doc.get_double("channel", "rays_mean", mp.rays_mean);
    mp.cluster_decay_s = positive(doc, "channel", "cluster_decay_s", mp.cluster_decay_s);
    mp.ray_decay_s = positive(doc, "channel", "ray_decay_s", mp.ray_decay_s);
    mp.cluster_rate_hz = positive(doc, "channel", "cluster_rate_hz", mp.cluster_rate_hz);
    mp.ray_rate_hz = positive(doc, "channel", "ray_rate_hz", mp.ray_rate_hz);
    mp.azimuth_spread = {doc.get_double("channel", "az_weight", 0.5), doc.get_double("channel", "az_sigma1", 0.05),
                         doc.get_double("channel", "az_sigma2", 0.2)};
    mp.elevation_spread = {doc.get_double("channel", "el_weight", 0.5), doc.get_double("channel", "el_sigma1", 0.05),
                           doc.get_double("channel", "el_sigma2", 0.2)};
    guarded(doc, "channel", "clusters", [&] {
        mp.validate();
        return 0;
    });
    return mp;
}

ComplexMatrix build_fixed(const ConfigDoc &doc)
{
    auto rows_of = [&](const std::string &key) {
        std::vector<std::vector<double>> rows;
        for (const auto &row : tokens(doc.get_string("channel", key), ";"))
        {
            std::vector<double> r;
            for (const auto &tok : tokens(row))
                r.push_back(guarded(doc, "channel", key, [&] { return to_double(tok); }));
            rows.push_back(std::move(r));
        }
        return rows;
    };
    const auto re = rows_of("matrix_re");
    if (re.empty())
        doc.fail("channel", "matrix_re", "empty matrix");
    const std::size_t cols = re.front().size();
    std::vector<std::vector<double>> im;
    if (doc.has("channel", "matrix_im"))
        im = rows_of("matrix_im");
    ComplexMatrix h(static_cast<Eigen::Index>(re.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < re.size(); ++i)
    {
        if (re[i].size() != cols)
            doc.fail("channel", "matrix_re", "rows differ in length");
        for (std::size_t j = 0; j < cols; ++j)
        {
            double imag = 0.0;
            if (!im.empty())
            {
                if (im.size() != re.size() || im[i].size() != cols)
                    doc.fail("channel", "matrix_im", "shape differs from matrix_re");
                imag = im[i][j];
            }
            h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cd(re[i][j], imag);
        }
    }
    return h;
}

StreamPlan build_plan(const ConfigDoc &doc, int sa_count)
{
    std::map<int, std::map<std::string, const ConfigEntry *>> by_index;
    if (const auto it = doc.sections().find("streams"); it != doc.sections().end())
    {
        for (const auto &[key, entry] : it->second)
        {
            std::smatch m;
            if (std::regex_match(key, m, stream_key()))
                by_index[std::stoi(m[1])][m[2]] = &entry;
        }
    }
    if (by_index.empty())
        throw ConfigError(doc.source(), 0, "[streams] s1.size", "missing required field");

    const int n = static_cast<int>(doc.get_int("streams", "sa_count", sa_count));
    std::vector<StreamSpec> specs;
    int expected = 1;
    for (const auto &[index, fields] : by_index)
    {
        const std::string prefix = "s" + std::to_string(index) + ".";
        if (index != expected++)
            throw ConfigError(doc.source(), 0, "[streams] " + prefix + "size",
                              "stream indices must run 1, 2, ... without gaps");
        StreamSpec s;
        s.size = positive_int(doc, "streams", prefix + "size", index == 1 ? std::optional<long long>(n)
                                                                           : std::optional<long long>{});
        const int order = positive_int(doc, "streams", prefix + "order", 4);
        const double power = positive(doc, "streams", prefix + "power");
        s.constellation = guarded(doc, "streams", prefix + "order", [&] { return Constellation(order, power); });
        if (doc.has("streams", prefix + "columns"))
        {
            for (const auto &tok : tokens(doc.get_string("streams", prefix + "columns")))
            {
                const int c = guarded(doc, "streams", prefix + "columns", [&] { return std::stoi(tok); });
                s.columns.push_back(c - 1); // 1-based in the file
            }
        }
        specs.push_back(std::move(s));
    }
    return guarded(doc, "streams", "s1.size", [&] { return StreamPlan(n, std::move(specs)); });
}
} // namespace

ArrayGeometry build_geometry(const ConfigDoc &doc)
{
    ArrayGeometry g;
    g.tx_rows = positive_int(doc, "geometry", "tx_rows");
    g.tx_cols = positive_int(doc, "geometry", "tx_cols");
    g.rx_rows = positive_int(doc, "geometry", "rx_rows", g.tx_rows);
    g.rx_cols = positive_int(doc, "geometry", "rx_cols", g.tx_cols);
    g.elements_per_side = positive_int(doc, "geometry", "elements_per_side", 1);
    g.carrier_hz = positive(doc, "geometry", "carrier_hz");
    g.distance_m = positive(doc, "geometry", "distance_m", doc.has_section("noma") ? std::optional<double>(1.0)
                                                                                   : std::optional<double>{});
    g.element_spacing = positive(doc, "geometry", "element_spacing_m", g.wavelength() / 2.0);
    const bool tuned = doc.get_bool("channel", "tuning", false) ||
                       (doc.has_section("noma") && doc.get_bool("noma", "tune_near", true) &&
                        doc.get_bool("noma", "tune_far", true));
    // Tuned runs overwrite the spacing, so it is optional there.
    g.subarray_spacing = positive(doc, "geometry", "subarray_spacing_m",
                                  tuned ? std::optional<double>(g.element_spacing * g.elements_per_side)
                                        : std::optional<double>{});
    return g;
}

NomaSimSpec build_noma_spec(const ConfigDoc &doc)
{
    NomaSimSpec spec;
    const int n = positive_int(doc, "noma", "sa_count", 16);
    NomaScenario s = NomaScenario::table_defaults(n);
    s.inner_radius_m = doc.get_double("noma", "inner_radius_m", s.inner_radius_m);
    s.cell_radius_m = doc.get_double("noma", "cell_radius_m", s.cell_radius_m);
    s.inner_density = doc.get_double("noma", "inner_density", s.inner_density);
    s.outer_density = doc.get_double("noma", "outer_density", s.outer_density);
    s.pathloss_exponent = doc.get_double("noma", "pathloss_exponent", s.pathloss_exponent);
    s.sensitivity_w = dbm_to_watts(doc.get_double("noma", "sensitivity_dbm", -100.0));
    s.max_power_w = doc.get_double("noma", "max_power_w", s.max_power_w);
    s.pc_parameter = doc.get_double("noma", "pc_parameter", s.pc_parameter);
    s.sector_rad = doc.get_double("noma", "sector_deg", 10.0) * std::numbers::pi / 180.0;
    s.min_distance_m = doc.get_double("noma", "min_distance_m", s.min_distance_m);
    guarded(doc, "noma", "inner_radius_m", [&] {
        s.validate();
        return 0;
    });
    spec.scenario = s;
    spec.order_near = positive_int(doc, "noma", "order_near", 4);
    spec.order_far = positive_int(doc, "noma", "order_far", 4);
    guarded(doc, "noma", "order_near", [&] { return Constellation(spec.order_near, 1.0).order(); });
    guarded(doc, "noma", "order_far", [&] { return Constellation(spec.order_far, 1.0).order(); });
    spec.tune_near = doc.get_bool("noma", "tune_near", true);
    spec.tune_far = doc.get_bool("noma", "tune_far", true);
    const long long budget = doc.get_int("noma", "drop_budget", 100);
    if (budget < 0)
        doc.fail("noma", "drop_budget", "must be >= 0");
    spec.drop_budget = static_cast<int>(budget);
    spec.geometry = build_geometry(doc);
    spec.params = build_params(doc, spec.geometry.carrier_hz);
    if (spec.geometry.tx_count() != n)
        doc.fail("noma", "sa_count", fmt::format("must equal tx_rows * tx_cols = {}", spec.geometry.tx_count()));
    return spec;
}

SimConfig build_sim_config(const ConfigDoc &doc)
{
    check_schema(doc);
    SimConfig cfg;

    cfg.detectors = guarded(doc, "sweep", "detectors",
                            [&] { return parse_detector_list(doc.get_string("sweep", "detectors")); });
    cfg.snr_db = guarded(doc, "sweep", "snr_db", [&] { return parse_snr_grid(doc.get_string("sweep", "snr_db")); });
    cfg.mode = guarded(doc, "sweep", "mode",
                       [&] { return parse_snr_mode(doc.get_string("sweep", "mode", "transmit-normalized")); });
    const long long max_trials = doc.get_int("sweep", "max_trials", 1'000'000);
    if (max_trials < 1)
        doc.fail("sweep", "max_trials", "must be >= 1");
    cfg.max_trials = static_cast<std::uint64_t>(max_trials);
    const long long min_errors = doc.get_int("sweep", "min_bit_errors", 200);
    if (min_errors < 0)
        doc.fail("sweep", "min_bit_errors", "must be >= 0");
    cfg.min_bit_errors = static_cast<std::uint64_t>(min_errors);
    cfg.batch_trials = static_cast<std::uint64_t>(positive_int(doc, "sweep", "batch_trials", 256));
    const long long seed = doc.get_int("sweep", "seed", 1);
    if (seed < 0)
        doc.fail("sweep", "seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const long long workers = doc.get_int("sweep", "workers", 1);
    if (workers < 0 || workers > 4096)
        doc.fail("sweep", "workers", "must lie in [0, 4096]");
    cfg.workers = static_cast<unsigned>(workers);
    cfg.theory_draws = positive_int(doc, "sweep", "theory_draws", 200);
    const long long ml_cap = doc.get_int("sweep", "ml_cap", static_cast<long long>(kDefaultMlCap));
    if (ml_cap < 1)
        doc.fail("sweep", "ml_cap", "must be >= 1");
    cfg.ml_cap = static_cast<std::uint64_t>(ml_cap);
    cfg.decomposition.rank_tolerance = positive(doc, "sweep", "rank_tolerance", 1e-10);

    if (doc.has_section("noma"))
    {
        cfg.noma = build_noma_spec(doc);
    }
    else
    {
        ChannelSpec &ch = cfg.channel;
        const std::string kind = lower(doc.get_string("channel", "kind"));
        if (kind == "gaussian")
        {
            ch.kind = ChannelKind::Gaussian;
            ch.cols = positive_int(doc, "channel", "cols", doc.get_int("streams", "sa_count", 4));
            ch.rows = positive_int(doc, "channel", "rows", ch.cols);
        }
        else if (kind == "fixed")
        {
            ch.kind = ChannelKind::Fixed;
            ch.fixed = build_fixed(doc);
        }
        else if (kind == "los" || kind == "multipath")
        {
            ch.kind = kind == "los" ? ChannelKind::LineOfSight : ChannelKind::Multipath;
            ch.geometry = build_geometry(doc);
            ch.params = build_params(doc, ch.geometry.carrier_hz);
            ch.tuning = doc.get_bool("channel", "tuning", false);
            ch.tuning_z = positive_int(doc, "channel", "tuning_z", 1);
            if (ch.kind == ChannelKind::Multipath)
                ch.multipath = build_multipath(doc);
        }
        else
        {
            doc.fail("channel", "kind", "expected gaussian, los, multipath or fixed, got '" + kind + "'");
        }
        guarded(doc, "channel", "kind", [&] {
            ch.validate();
            return 0;
        });
        cfg.plan = build_plan(doc, ch.tx_count());
    }

    try
    {
        cfg.validate();
    }
    catch (const Error &e)
    {
        if (e.code() == ErrorCode::RankDeficient)
            throw;
        throw ConfigError(doc.source(), 0, "", e.what());
    }
    return cfg;
}

std::string resolve_config_path(const std::string &name_or_path)
{
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path))
        return name_or_path;
    for (const std::string &candidate : {std::string(THZ_CONFIG_DIR) + "/" + name_or_path + ".ini",
                                         std::string(THZ_CONFIG_DIR) + "/" + name_or_path})
        if (fs::exists(candidate))
            return candidate;
    return name_or_path;
}

} // namespace thz
