// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/cli.hpp"

#include "thz/analysis.hpp"
#include "thz/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <unistd.h>

namespace thz::cli
{

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::RankDeficient:
    case ErrorCode::SearchSpaceTooLarge:
    case ErrorCode::PatternExplosion: return kNumerical;
    case ErrorCode::EmptyDrop:
    case ErrorCode::BudgetExhausted: return kScenario;
    default: return kConfig;
    }
}

void write_atomic(const std::string &path, const std::string &content)
{
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + fmt::format(".tmp.{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

// ------------------------------------------------------------------- SVG

std::string render_svg(const std::vector<BerRecord> &records, const std::string &title)
{
    using Key = std::tuple<std::string, int, std::string>;
    std::map<Key, std::vector<std::pair<double, double>>> series;
    std::vector<Key> order;
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = 0.0; // log10 BER
    for (const auto &r : records)
    {
        if (!std::isfinite(r.snr_db))
            continue;
        const Key key{r.detector, r.stream, r.source};
        if (!series.count(key))
            order.push_back(key);
        series[key].emplace_back(r.snr_db, r.ber);
        xmin = std::min(xmin, r.snr_db);
        xmax = std::max(xmax, r.snr_db);
        ymin = std::min(ymin, std::floor(std::log10(std::max(r.ber, kPlotFloor))));
    }
    if (order.empty())
        raise(ErrorCode::InvalidArgument, "no finite SNR rows to plot");
    if (xmax == xmin)
    {
        xmin -= 1.0;
        xmax += 1.0;
    }
    const double ymax = 0.0;
    if (ymin == ymax)
        ymin = -1.0;

    const double W = 760, H = 500, left = 70, right = 200, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };
    static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

    std::string s;
    s += fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)", W, H,
                     W, H);
    s += "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n", left, title);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                     top, pw, ph);
    for (int d = static_cast<int>(ymin); d <= 0; ++d)
    {
        const double y = py(d);
        s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left, y,
                         left + pw, y);
        s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
                         "text-anchor=\"end\">1e{}</text>\n",
                         left - 6, y + 4, d);
    }
    for (int k = 0; k <= 5; ++k)
    {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                         "text-anchor=\"middle\">{:.4g}</text>\n",
                         px(xv), top + ph + 16, xv);
    }
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
                     "text-anchor=\"middle\">SNR (dB)</text>\n",
                     left + pw / 2, H - 10);
    s += fmt::format("<text x=\"16\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" "
                     "transform=\"rotate(-90 16 {:.2f})\" text-anchor=\"middle\">BER</text>\n",
                     top + ph / 2, top + ph / 2);

    // Zero BER sits on the floor line and is drawn as a hollow marker.
    const double floor_y = py(std::log10(kPlotFloor));
    if (ymin <= std::log10(kPlotFloor))
        s += fmt::format("<line class=\"floor\" x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#888\" "
                         "stroke-dasharray=\"4 3\"/>\n",
                         left, floor_y, left + pw, floor_y);

    for (std::size_t k = 0; k < order.size(); ++k)
    {
        auto pts = series[order[k]];
        std::sort(pts.begin(), pts.end());
        const char *color = palette[k % std::size(palette)];
        std::string poly;
        for (const auto &[x, b] : pts)
            poly += fmt::format("{:.2f},{:.2f} ", px(x), py(std::log10(std::max(b, kPlotFloor))));
        s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\" points=\"{}\"/>\n", color, poly);
        for (const auto &[x, b] : pts)
        {
            if (b < kPlotFloor)
                s += fmt::format("<circle class=\"floor-marker\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"white\" "
                                 "stroke=\"{}\"/>\n",
                                 px(x), floor_y, color);
            else
                s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", px(x),
                                 py(std::log10(b)), color);
        }
        const double ly = top + 14 + 18 * static_cast<double>(k);
        const auto &[det, stream, source] = order[k];
        s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         left + pw + 12, ly, left + pw + 34, ly, color);
        s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\">{} s{} {}</text>\n",
                         left + pw + 40, ly + 4, det, stream, source);
    }
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#555\">"
                     "hollow markers: BER 0 plotted at 1e-9</text>\n",
                     left + pw + 12, top + ph);
    s += "</svg>\n";
    return s;
}

// --------------------------------------------------------------- commands

namespace
{
struct Common
{
    std::string config;
    std::string out_dir = ".";
    std::string name;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<double> snr_min;
    std::optional<double> snr_max;
    std::optional<double> snr_step;
    std::string detectors;
    std::optional<std::uint64_t> max_trials;
    std::optional<std::uint64_t> min_errors;
};

void add_common(CLI::App *cmd, Common &c, bool sweep_overrides)
{
    cmd->add_option("--config,-c", c.config, "configuration file or bundled profile name")->required();
    cmd->add_option("--out,-o", c.out_dir, "output directory");
    cmd->add_option("--name", c.name, "output file stem (default: config file stem)");
    cmd->add_option("--seed", c.seed, "RNG seed (overrides [sweep] seed)");
    if (!sweep_overrides)
        return;
    cmd->add_option("--workers,-j", c.workers, "worker threads, 0 for all cores");
    cmd->add_option("--snr-min", c.snr_min, "first SNR point, dB");
    cmd->add_option("--snr-max", c.snr_max, "last SNR point, dB");
    cmd->add_option("--snr-step", c.snr_step, "SNR step, dB");
    cmd->add_option("--detectors", c.detectors, "comma separated detector list");
    cmd->add_option("--max-trials", c.max_trials, "trial cap per SNR point");
    cmd->add_option("--min-errors", c.min_errors, "early-stop bit error target");
}

// Loads the document and folds command-line overrides into it so that the
// manifest snapshot alone reproduces the run.
ConfigDoc load_doc(const Common &c, std::vector<std::string> &applied)
{
    ConfigDoc doc = ConfigDoc::load(resolve_config_path(c.config));
    auto put = [&](const std::string &section, const std::string &key, const std::string &value) {
        doc.set(section, key, value);
        applied.push_back("[" + section + "] " + key + " = " + value);
    };
    if (c.seed)
        put("sweep", "seed", std::to_string(*c.seed));
    if (c.workers)
        put("sweep", "workers", std::to_string(*c.workers));
    if (c.max_trials)
        put("sweep", "max_trials", std::to_string(*c.max_trials));
    if (c.min_errors)
        put("sweep", "min_bit_errors", std::to_string(*c.min_errors));
    if (!c.detectors.empty())
        put("sweep", "detectors", c.detectors);
    if (c.snr_min || c.snr_max || c.snr_step)
    {
        std::vector<double> grid;
        if (const ConfigEntry *e = doc.find("sweep", "snr_db"))
        {
            try
            {
                grid = parse_snr_grid(e->value);
            }
            catch (const std::exception &ex)
            {
                doc.fail("sweep", "snr_db", ex.what());
            }
        }
        const double lo = c.snr_min.value_or(grid.empty() ? 0.0 : grid.front());
        const double hi = c.snr_max.value_or(grid.empty() ? lo : grid.back());
        const double step = c.snr_step.value_or(grid.size() > 1 ? grid[1] - grid[0] : 1.0);
        put("sweep", "snr_db", fmt::format("{:.9g}:{:.9g}:{:.9g}", lo, step, hi));
    }
    return doc;
}

std::string stem_of(const Common &c)
{
    if (!c.name.empty())
        return c.name;
    return fs::path(resolve_config_path(c.config)).stem().string();
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::string &path, const std::string &command, const ConfigDoc &doc,
                    const std::vector<std::string> &overrides, const std::vector<std::string> &outputs,
                    std::uint64_t seed, ordered_json extra = ordered_json::object())
{
    ordered_json m;
    m["artifact"] = "thz-noma";
    m["version"] = kVersion;
    m["command"] = command;
    m["timestamp"] = utc_timestamp();
    m["seed"] = seed;
    m["config_source"] = doc.source();
    m["overrides"] = overrides;
    m["config_snapshot"] = doc.to_text();
    ordered_json cfg = ordered_json::object();
    for (const auto &[section, keys] : doc.sections())
        for (const auto &[key, entry] : keys)
            cfg[section][key] = entry.value;
    m["config"] = cfg;
    m["outputs"] = outputs;
    for (auto &[k, v] : extra.items())
        m[k] = v;
    write_atomic(path, m.dump(2) + "\n");
}

std::string csv_text(const std::vector<BerRecord> &records)
{
    std::ostringstream ss;
    write_ber_csv(ss, records);
    return ss.str();
}

int cmd_sweep(const Common &c, bool theory, std::ostream &out)
{
    std::vector<std::string> overrides;
    const ConfigDoc doc = load_doc(c, overrides);
    SimConfig cfg = build_sim_config(doc);
    // A zero-SNR point has no finite noise to draw; only theory evaluates it.
    std::vector<double> skipped;
    if (!theory)
    {
        std::erase_if(cfg.snr_db, [&](double s) {
            if (std::isfinite(s))
                return false;
            skipped.push_back(s);
            return true;
        });
        if (cfg.snr_db.empty())
            throw ConfigError(doc.source(), 0, "[sweep] snr_db", "no finite SNR point left to simulate");
    }
    const auto records = theory ? run_theory_sweep(cfg) : run_ber_sweep(cfg);

    const std::string stem = stem_of(c) + (theory ? "_theory" : "");
    const std::string csv = (fs::path(c.out_dir) / (stem + ".csv")).string();
    const std::string manifest = (fs::path(c.out_dir) / (stem + ".manifest.json")).string();
    write_atomic(csv, csv_text(records));
    write_manifest(manifest, theory ? "theory" : "simulate", doc, overrides, {csv}, cfg.seed,
                   {{"records", records.size()},
                    {"workers", resolve_workers(cfg.workers)},
                    {"skipped_snr_points", skipped.size()}});
    if (!skipped.empty())
        out << fmt::format("skipped {} non-finite SNR point(s); simulate needs finite noise\n", skipped.size());
    out << fmt::format("wrote {} ({} rows)\nwrote {}\n", csv, records.size(), manifest);
    return kOk;
}

int cmd_channel_info(const Common &c, std::ostream &out)
{
    std::vector<std::string> overrides;
    const ConfigDoc doc = load_doc(c, overrides);
    const SimConfig cfg = build_sim_config(doc);
    if (cfg.noma)
        raise(ErrorCode::InvalidArgument, "channel-info needs a single-user [channel] configuration");

    std::vector<std::pair<std::string, std::string>> rows;
    auto add = [&](const std::string &k, const std::string &v) { rows.emplace_back(k, v); };
    for (const auto &[section, keys] : doc.sections())
        for (const auto &[key, entry] : keys)
            add("input." + section + "." + key, entry.value);

    const ChannelSpec &spec = cfg.channel;
    add("channel.kind", std::string(to_string(spec.kind)));
    if (spec.kind == ChannelKind::LineOfSight || spec.kind == ChannelKind::Multipath)
    {
        const ArrayGeometry g = spec.effective_geometry();
        const double lambda = g.wavelength();
        add("wavelength_m", fmt::format("{:.9g}", lambda));
        add("absorption_per_m", fmt::format("{:.9g}", spec.params.absorption_per_m));
        for (int z : {1, 3, 5})
            add(fmt::format("delta_opt_z{}_m", z),
                fmt::format("{:.9g}", optimal_sa_separation(g.distance_m, lambda, g.tx_cols, z)));
        add("subarray_spacing_m", fmt::format("{:.9g}", g.subarray_spacing));
        add("tuning", spec.tuning ? "on" : "off");
        add("rayleigh_distance_m", fmt::format("{:.9g}", rayleigh_distance(g.subarray_spacing, g.tx_cols, lambda)));
    }
    const ChannelRealization ch = draw_channel(cfg, 0);
    add("channel.provenance", ch.provenance);
    add("rows", std::to_string(ch.h.rows()));
    add("cols", std::to_string(ch.h.cols()));
    add("frobenius_norm", fmt::format("{:.9g}", ch.h.norm()));
    const Eigen::JacobiSVD<ComplexMatrix> svd(ch.h);
    const auto &sv = svd.singularValues();
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        add(fmt::format("singular_value_{}", k + 1), fmt::format("{:.9g}", sv(k)));
    add("condition_number", fmt::format("{:.9g}", condition_number(ch.h)));

    std::string csv = "quantity,value\n";
    for (const auto &[k, v] : rows)
    {
        out << fmt::format("{:<32} {}\n", k, v);
        csv += k + "," + (v.find(',') == std::string::npos ? v : "\"" + v + "\"") + "\n";
    }
    const std::string path = (fs::path(c.out_dir) / (stem_of(c) + "_channel.csv")).string();
    write_atomic(path, csv);
    out << "wrote " << path << "\n";
    return kOk;
}

int cmd_noma_plan(const Common &c, std::ostream &out)
{
    std::vector<std::string> overrides;
    const ConfigDoc doc = load_doc(c, overrides);
    const SimConfig cfg = build_sim_config(doc);
    if (!cfg.noma)
        raise(ErrorCode::InvalidArgument, "noma-plan needs a [noma] section");
    const NomaSetup setup = noma_setup(cfg);
    std::ostringstream ss;
    write_cluster_csv(ss, setup.plan);

    const std::string stem = stem_of(c) + "_pairs";
    const std::string csv = (fs::path(c.out_dir) / (stem + ".csv")).string();
    const std::string manifest = (fs::path(c.out_dir) / (stem + ".manifest.json")).string();
    write_atomic(csv, ss.str());
    write_manifest(manifest, "noma-plan", doc, overrides, {csv}, cfg.seed,
                   {{"pairs", setup.plan.pairs.size()}, {"redraws", setup.redraws},
                    {"per_sa_budget_w", cfg.noma->scenario.per_sa_budget()}});
    out << fmt::format("{} pairs (redraws: {}), per-SA budget {:.9g} W\n", setup.plan.pairs.size(), setup.redraws,
                       cfg.noma->scenario.per_sa_budget());
    out << ss.str();
    out << fmt::format("wrote {}\nwrote {}\n", csv, manifest);
    return kOk;
}

std::string rational_text(const Rational &r)
{
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return fmt::format("{}/{}", r.numerator(), r.denominator());
}

int cmd_complexity(const std::vector<int> &ns, long long order, long long streams, long long frames,
                   const std::string &out_dir, std::ostream &out)
{
    std::string csv = "n,item,rad,rml,flops\n";
    out << fmt::format("J = {}, |S| = {}, |X| = {}\n", frames, streams, order);
    for (int n : ns)
    {
        out << fmt::format("\nN = {}\n", n);
        for (int e = 1; e <= 3; ++e)
        {
            const auto p = flops_epsilon(e, n);
            out << fmt::format("  eps{}: {} RAD + {} RML = {} flops\n", e, rational_text(p.rad), rational_text(p.rml),
                               rational_text(p.flops()));
            csv += fmt::format("{},eps{},{},{},{}\n", n, e, rational_text(p.rad), rational_text(p.rml),
                               rational_text(p.flops()));
        }
        const Rational frac = multiplication_saving_fraction(n);
        const double pct = 100.0 * boost::rational_cast<double>(frac);
        out << fmt::format("  product-phase multiplication saving: {} = {:.1f}%\n", rational_text(frac), pct);
        csv += fmt::format("{},mult_saving,,,{}\n", n, rational_text(frac));
        for (const auto &row : savings_table(frames, streams, n, order))
        {
            out << fmt::format("  {:<10} QRD {} flops, puncturing {} flops, saves {} flops\n", row.transition,
                               rational_text(row.qrd.flops()), rational_text(row.puncturing.flops()),
                               rational_text(row.savings_flops));
            csv += fmt::format("{},{}_qrd,{},{},{}\n", n, row.transition, rational_text(row.qrd.rad),
                               rational_text(row.qrd.rml), rational_text(row.qrd.flops()));
            csv += fmt::format("{},{}_puncturing,{},{},{}\n", n, row.transition, rational_text(row.puncturing.rad),
                               rational_text(row.puncturing.rml), rational_text(row.puncturing.flops()));
            csv += fmt::format("{},{}_savings,,,{}\n", n, row.transition, rational_text(row.savings_flops));
        }
    }
    if (!out_dir.empty())
    {
        const std::string path = (fs::path(out_dir) / "complexity.csv").string();
        write_atomic(path, csv);
        out << "\nwrote " << path << "\n";
    }
    return kOk;
}

int cmd_plot(const std::string &csv_path, std::string svg_path, const std::string &title, std::ostream &out)
{
    std::ifstream in(csv_path);
    if (!in)
        throw ConfigError(csv_path, 0, "", "cannot open CSV");
    const auto records = read_ber_csv(in);
    if (records.empty())
        throw ConfigError(csv_path, 0, "", "CSV has no data rows");
    if (svg_path.empty())
        svg_path = fs::path(csv_path).replace_extension(".svg").string();
    write_atomic(svg_path, render_svg(records, title.empty() ? fs::path(csv_path).stem().string() : title));
    out << "wrote " << svg_path << "\n";
    return kOk;
}
} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"thzsim: THz UM-MIMO superposition coding and NOMA link simulator", "thzsim"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common sim, theory, info, noma;
    add_common(app.add_subcommand("simulate", "Monte Carlo BER sweep"), sim, true);
    add_common(app.add_subcommand("theory", "closed-form BER curves"), theory, true);
    add_common(app.add_subcommand("channel-info", "geometry and conditioning report"), info, false);
    add_common(app.add_subcommand("noma-plan", "user drop, pairing and power allocation"), noma, false);

    std::vector<int> ns{4, 8, 16, 32};
    long long order = 16, streams = 3, frames = 100;
    std::string cx_out;
    auto *cx = app.add_subcommand("complexity", "flop-count model and savings table");
    cx->add_option("--n", ns, "SA counts")->delimiter(',');
    cx->add_option("--order", order, "constellation size |X|");
    cx->add_option("--streams", streams, "stream count |S|");
    cx->add_option("--frames", frames, "frame count J");
    cx->add_option("--out,-o", cx_out, "directory for complexity.csv");

    std::string plot_csv, plot_svg, plot_title;
    auto *pl = app.add_subcommand("plot", "render a BER CSV to SVG");
    pl->add_option("--csv", plot_csv, "input CSV")->required();
    pl->add_option("--out,-o", plot_svg, "output SVG (default: CSV path with .svg)");
    pl->add_option("--title", plot_title, "chart title");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success &)
    {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        if (argc > 1 && std::string(argv[1]) == "--version")
            out << kVersion << "\n";
        return kOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << "\n";
        return kConfig;
    }

    const auto *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try
    {
        if (name == "simulate")
            return cmd_sweep(sim, false, out);
        if (name == "theory")
            return cmd_sweep(theory, true, out);
        if (name == "channel-info")
            return cmd_channel_info(info, out);
        if (name == "noma-plan")
            return cmd_noma_plan(noma, out);
        if (name == "complexity")
            return cmd_complexity(ns, order, streams, frames, cx_out, out);
        if (name == "plot")
            return cmd_plot(plot_csv, plot_svg, plot_title, out);
    }
    catch (const ConfigError &e)
    {
        err << "config error: " << e.what() << "\n";
        return kConfig;
    }
    catch (const Error &e)
    {
        const int code = exit_code(e.code());
        err << (code == kNumerical ? "numerical error: " : code == kScenario ? "scenario error: " : "error: ")
            << e.what() << "\n";
        return code;
    }
    catch (const std::exception &e)
    {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    err << "unknown command\n";
    return kConfig;
}

} // namespace thz::cli
