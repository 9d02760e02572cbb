// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "support.hpp"
#include "thz/config.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace thz;

namespace
{

ConfigDoc doc_of(const std::string &text)
{
    std::istringstream in(text);
    return ConfigDoc::parse(in, "test.ini");
}

// Field and line of the ConfigError thrown by fn.
std::pair<std::string, int> config_error_of(const std::function<void()> &fn)
{
    try
    {
        fn();
    }
    catch (const ConfigError &e)
    {
        return {e.field(), e.line()};
    }
    FAIL("expected a ConfigError");
    return {};
}

const char *kMinimal = R"(
[channel]
kind = gaussian
rows = 3
cols = 2

[streams]
s1.size = 2
s1.order = 4
s1.power = 1
s2.size = 1
s2.order = 16
s2.power = 50

[sweep]
detectors = PNC, SSD
snr_db = 0, 10
)";

} // namespace

TEST_CASE("grammar")
{
    const auto doc = doc_of("# heading\n; full-line comment\n[a]\nx = 1 # trailing\n  y=two words  \n\n[b]\nx=3\n");
    CHECK(doc.get_int("a", "x") == 1);
    CHECK(doc.get_string("a", "y") == "two words");
    CHECK(doc.get_double("b", "x") == 3.0);
    CHECK(doc.find("a", "y")->line == 5);
    CHECK(doc.get_int("a", "missing", 7) == 7);
    CHECK(doc.get_bool("a", "flag", true));
    CHECK(doc_of("[a]\nflag = off\n").get_bool("a", "flag") == false);

    const auto again = doc_of(doc.to_text());
    CHECK(again.get_string("a", "y") == "two words");
    CHECK(again.get_int("b", "x") == 3);

    CHECK(config_error_of([] { doc_of("[a\n"); }).second == 1);
    CHECK(config_error_of([] { doc_of("[a]\nnovalue\n"); }).second == 2);
    CHECK(config_error_of([] { doc_of("x = 1\n"); }).first == "x");
    CHECK(config_error_of([] { doc_of("[a]\nx = 1\nx = 2\n"); }) == std::pair<std::string, int>{"[a] x", 3});
    CHECK(config_error_of([] { doc_of("[a]\nx = 1.5\n").get_int("a", "x"); }).first == "[a] x");
    CHECK(config_error_of([] { doc_of("[a]\nx = nan\n").get_double("a", "x"); }).first == "[a] x");
    CHECK(config_error_of([] { doc_of("[a]\n").require("a", "x"); }).first == "[a] x");
}

TEST_CASE("SNR grids")
{
    CHECK(parse_snr_grid("0, 5 10") == std::vector<double>{0, 5, 10});
    CHECK(parse_snr_grid("30:5:45") == std::vector<double>{30, 35, 40, 45});
    CHECK(parse_snr_grid("0:0.1:0.3").size() == 4);
    const auto g = parse_snr_grid("-inf, 0:10:20");
    REQUIRE(g.size() == 4);
    CHECK(std::isinf(g[0]));
    CHECK(g[0] < 0);
    CHECK(g[3] == 20.0);
    CHECK_THROWS(parse_snr_grid(""));
    CHECK_THROWS(parse_snr_grid("1:2"));
    CHECK_THROWS(parse_snr_grid("5:-1:0"));
    CHECK_THROWS(parse_snr_grid("-inf:1:3"));
    CHECK_THROWS(parse_snr_grid("ten"));
}

TEST_CASE("detector lists")
{
    CHECK(parse_detector_list("pnc,SSD") == std::vector<DetectorKind>{DetectorKind::PNC, DetectorKind::SSD});
    CHECK(parse_detector_list("all").size() == std::size(kAllDetectors));
    CHECK(parse_detector_list("NC all").front() == DetectorKind::NC);
    CHECK(parse_detector_list("NC all").size() == std::size(kAllDetectors));
    CHECK_THROWS(parse_detector_list("NC, nc"));
    CHECK_THROWS(parse_detector_list(" , "));
    CHECK_THROWS(parse_detector_list("ZF"));
}

TEST_CASE("schema")
{
    const auto ok = doc_of(kMinimal);
    CHECK_NOTHROW(check_schema(ok));
    const auto cfg = build_sim_config(ok);
    CHECK(cfg.channel.rows == 3);
    CHECK(cfg.plan->size() == 2);
    CHECK(cfg.plan->stream(1).constellation.order() == 16);
    CHECK(cfg.plan->stream(1).constellation.power() == 50.0);
    CHECK(cfg.detectors.size() == 2);

    CHECK(config_error_of([] { check_schema(doc_of(std::string(kMinimal) + "[extra]\nx = 1\n")); }).first ==
          "[extra]");
    const auto typo = config_error_of([] {
        auto text = std::string(kMinimal);
        text.replace(text.find("rows = 3"), 8, "rowz = 3");
        check_schema(doc_of(text));
    });
    CHECK(typo.first == "[channel] rowz");
    CHECK(typo.second == 4);
    CHECK(config_error_of([] { check_schema(doc_of("[streams]\ns1.size=1\n[sweep]\nsnr_db = 1\n")); }).first ==
          "[sweep] detectors");
    CHECK(config_error_of([] { check_schema(doc_of("[sweep]\ndetectors = NC\nsnr_db = 1\n")); }).first ==
          "[streams]");
    CHECK(config_error_of([] { check_schema(doc_of("[streams]\ns1.bits = 2\n")); }).first == "[streams] s1.bits");
}

TEST_CASE("builder errors name their field")
{
    auto with = [](const std::string &from, const std::string &to) {
        auto text = std::string(kMinimal);
        text.replace(text.find(from), from.size(), to);
        return doc_of(text);
    };
    CHECK(config_error_of([&] { build_sim_config(with("s1.order = 4", "s1.order = 8")); }).first ==
          "[streams] s1.order");
    CHECK(config_error_of([&] { build_sim_config(with("kind = gaussian", "kind = rician")); }).first ==
          "[channel] kind");
    CHECK(config_error_of([&] { build_sim_config(with("detectors = PNC, SSD", "detectors = PNC, PNC")); }).first ==
          "[sweep] detectors");
    CHECK(config_error_of([&] { build_sim_config(with("snr_db = 0, 10", "snr_db = 10, 0")); }).second == 0);
    CHECK(config_error_of([&] { build_sim_config(with("s1.power = 1\n", "")); }).first == "[streams] s1.power");
    CHECK(config_error_of([&] { build_sim_config(with("[sweep]", "[sweep]\nmax_trials = 0")); }).first ==
          "[sweep] max_trials");
}

TEST_CASE("fixed matrices")
{
    const auto doc = doc_of(R"(
[channel]
kind = fixed
matrix_re = 1 0.5 ; 0 2
matrix_im = 0 0 ; 0 -1
[streams]
s1.size = 2
s1.order = 2
s1.power = 1
[sweep]
detectors = NC
snr_db = 0
)");
    const auto cfg = build_sim_config(doc);
    REQUIRE(cfg.channel.fixed.rows() == 2);
    CHECK(cfg.channel.fixed(0, 1) == cd(0.5, 0.0));
    CHECK(cfg.channel.fixed(1, 1) == cd(2.0, -1.0));
}

TEST_CASE("bundled profiles build")
{
    for (const char *name : {"fig3a", "fig4a", "fig4b", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "fig7c", "fig7d",
                             "table1"})
    {
        CAPTURE(name);
        const auto path = resolve_config_path(name);
        REQUIRE(std::filesystem::exists(path));
        const auto doc = ConfigDoc::load(path);
        CHECK_NOTHROW(check_schema(doc));
        const auto cfg = build_sim_config(doc);
        CHECK((cfg.plan.has_value() != cfg.noma.has_value()));
        CHECK_FALSE(cfg.detectors.empty());
    }
    CHECK(resolve_config_path("no/such/file.ini") == "no/such/file.ini");
    CHECK(config_error_of([] { ConfigDoc::load("no/such/file.ini"); }).second == 0);
}
