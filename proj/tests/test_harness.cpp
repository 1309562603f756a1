#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "poisbound/coupling.hpp"
#include "poisbound/experiment.hpp"
#include "poisbound/report.hpp"

using namespace poisbound;

TEST_CASE("config parsing") {
    const Config cfg = Config::parse_text(
        "# comment line\n"
        "experiment = runs   # trailing comment\n"
        "n=12\n"
        "p = 0.3\n"
        "\n"
        "grid = 0.5, 1, 2.5\n");
    CHECK(cfg.get_string("experiment") == "runs");
    CHECK(cfg.get_u64("n") == 12);
    CHECK(cfg.get_double("p") == Catch::Approx(0.3).margin(1e-15));
    CHECK(cfg.get_double_list("grid", {}) == std::vector<double>{0.5, 1.0, 2.5});
    CHECK(cfg.get_u64("missing", 7) == 7);
    CHECK(cfg.get_string("missing", "x") == "x");
    CHECK(cfg.has("n"));
    CHECK_FALSE(cfg.has("missing"));
}

TEST_CASE("config errors carry usable diagnostics") {
    CHECK_THROWS_AS(Config::parse_text("novalue\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_text("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse_text("=3\n"), ConfigError);
    const Config cfg = Config::parse_text("n=abc\nx=1.5\n");
    CHECK_THROWS_AS(cfg.get_u64("n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_double("n"), ConfigError);
    CHECK_THROWS_AS(cfg.get_string("absent"), ConfigError);
    try {
        require(false, "k <= n");
        FAIL("require did not throw");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("precondition violated: k <= n") !=
              std::string::npos);
    }
    CHECK_NOTHROW(require(true, "anything"));
}

TEST_CASE("exit code convention") {
    CHECK(kExitPass == 0);
    CHECK(kExitRuntime == 1);
    CHECK(kExitConfig == 2);
    CHECK(kExitBoundFailure == 3);
}

TEST_CASE("doubles render with 17 significant digits and round-trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789, -2.5e300}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv writer pads rows to the header width") {
    CsvWriter w({"a", "b", "c"});
    w.row().cell(std::string("x")).cell(0.5).cell(true);
    w.row().cell(std::uint64_t{7});
    CHECK(w.str() == "a,b,c\nx,0.5,1\n7,,\n");
}

TEST_CASE("bound reports serialize losslessly to JSON") {
    BoundReport r;
    r.theorem = "exact_coupling";
    r.distance = "tv";
    r.terms = {{"min(1,lambda)", 0.5}, {"E|Z|", 0.25}};
    r.bound = 0.125;
    r.exact_lhs = 0.1;
    r.finish();
    const nlohmann::json j = to_json(r);
    CHECK(j["theorem"] == "exact_coupling");
    CHECK(j["distance"] == "tv");
    CHECK(j["terms"]["E|Z|"] == 0.25);
    CHECK(j["bound"] == 0.125);
    CHECK(j["exact_lhs"] == 0.1);
    CHECK(j["satisfied"] == true);
    // Round trip through text.
    const nlohmann::json back = nlohmann::json::parse(j.dump());
    CHECK(back == j);

    BoundReport empty;
    empty.theorem = "t";
    empty.distance = "d";
    const nlohmann::json je = to_json(empty);
    CHECK_FALSE(je.contains("exact_lhs"));
    CHECK_FALSE(je.contains("satisfied"));
}
