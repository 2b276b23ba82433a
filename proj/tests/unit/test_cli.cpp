#include "cli.hpp"

#include "hyperwalk/errors.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace hyperwalk;
using cli::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hyperwalk_cli_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    for (const auto& d : diags)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

const json kFree2 = {{"type", "free"}, {"rank", 2}};

} // namespace

TEST_SUITE("cli") {

TEST_CASE("group objects") {
    CHECK(cli::parse_group(kFree2) == GroupSpec::free(2));
    CHECK(cli::parse_group({{"type", "abelian"}, {"rank", 3}}) == GroupSpec::free_abelian(3));
    CHECK(cli::parse_group({{"type", "free_product"}, {"orders", {2, 3}}}) == GroupSpec::free_product({2, 3}));
    CHECK(cli::parse_group({{"type", "lamplighter"}}) == GroupSpec::lamplighter());
    CHECK(cli::parse_group({{"type", "direct_product"}, {"factors", {kFree2, {{"type", "abelian"}, {"rank", 1}}}}}) ==
          GroupSpec::direct_product(GroupSpec::free(2), GroupSpec::free_abelian(1)));
    CHECK(cli::parse_group({{"type", "free"}, {"rank", 2}, {"extra", {"ab"}}}) == GroupSpec::free(2).with_extra({"ab"}));
    CHECK_THROWS_AS(cli::parse_group({{"type", "heisenberg"}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_group({{"type", "free"}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_group({{"type", "free"}, {"rank", 0}}), InvalidInput);
}

TEST_CASE("config documents") {
    const auto c = cli::parse_config({{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", 2}}}, {"seed", 5}});
    CHECK(c.command == "ball");
    CHECK(c.seed == 5u);
    CHECK(c.threads == 1);
    CHECK_THROWS_AS(cli::parse_config({{"group", kFree2}, {"command", "ball"}, {"colour", 1}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_config({{"group", kFree2}, {"command", "teleport"}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_config({{"group", kFree2}, {"command", "ball"}, {"seed", -1}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_config({{"group", kFree2}, {"command", "ball"}, {"threads", 0}}), InvalidInput);
    CHECK_THROWS_AS(cli::parse_config(json::array()), InvalidInput);
}

TEST_CASE("validation diagnostics") {
    const auto diags = [](json doc) { return cli::validate(doc); };
    CHECK(diags({{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", 3}}}}).empty());
    CHECK(mentions(diags({{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", 3}, {"depth", 1}}}}),
                   "unknown parameter 'depth'"));
    CHECK(mentions(diags({{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", "3"}}}}), "integer"));
    CHECK(mentions(diags({{"group", kFree2}, {"command", "ball"}}), "needs parameter 'radius'"));
    CHECK(mentions(diags({{"group", kFree2}, {"command", "bigons"}, {"params", {{"L_max", 3}}}}), "needs a seed"));
    CHECK(mentions(diags({{"group", {{"type", "abelian"}, {"rank", 2}}}, {"command", "green"}}), "recurrent"));
    const auto pi = diags({{"group", {{"type", "abelian"}, {"rank", 2}}}, {"command", "pi"}, {"seed", 1}});
    CAPTURE(pi);
    CHECK(pi.empty());
    CHECK(mentions(diags({{"group", kFree2},
                          {"command", "bypass"},
                          {"params", {{"z", "aa"}, {"r", 1}, {"epsilon", 0.5}}}}),
                   "min mu"));
    CHECK(mentions(diags({{"group", kFree2}, {"measure", {{"a", "1/2"}, {"A", "1/6"}, {"b", "1/6"}, {"B", "1/6"}}},
                          {"command", "ball"}, {"params", {{"radius", 1}}}}),
                   "measure"));
    CHECK(mentions(diags({{"group", {{"type", "free"}}}, {"command", "ball"}}), "rank"));
}

TEST_CASE("measures from numbers and fractions") {
    const json doc = {{"group", kFree2},
                      {"measure", {{"a", 0.375}, {"A", "3/8"}, {"b", 0.125}, {"B", "1/8"}}},
                      {"command", "green"},
                      {"params", {{"radius", 5}, {"rho_plus", 0.9}}}};
    const auto out = scratch("measure");
    const auto r = cli::run(cli::parse_config(doc), out);
    CHECK(r.exit_code == 0);
    CHECK(r.report["measure"]["a"] == "3/8");
    CHECK(r.report["measure"]["B"] == "1/8");
}

TEST_CASE("run writes reports and tables") {
    const auto out = scratch("ball");
    const auto r = cli::run(cli::parse_config({{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", 2}}}}), out);
    CHECK(r.exit_code == 0);
    CHECK(r.report["status"] == "ok");
    CHECK(r.report["result"]["size"] == 17);
    CHECK(std::filesystem::exists(out / "report.json"));
    CHECK(slurp(out / "vertices.csv").rfind("id,normal_form,distance\r\n", 0) == 0);
    const auto stored = json::parse(slurp(out / "report.json"));
    CHECK(cli::strip_timestamp(stored) == cli::strip_timestamp(r.report));
    CHECK(stored.contains("timestamp"));
    CHECK_FALSE(cli::strip_timestamp(stored).contains("timestamp"));
}

TEST_CASE("exit codes") {
    SUBCASE("invalid input") {
        const auto r = cli::run(cli::parse_config({{"group", {{"type", "abelian"}, {"rank", 2}}}, {"command", "green"}}),
                                scratch("recurrent"));
        CHECK(r.exit_code == 2);
        CHECK(r.report["status"] == "invalid");
    }
    SUBCASE("word outside the ball") {
        const auto r = cli::run(cli::parse_config({{"group", kFree2},
                                                   {"command", "green"},
                                                   {"params", {{"radius", 2}, {"z", "abab"}, {"rho_plus", 0.9}}}}),
                                scratch("outside"));
        CHECK(r.exit_code == 3);
        CHECK(r.report["status"] == "partial");
    }
    SUBCASE("bad word") {
        const auto r = cli::run(
            cli::parse_config({{"group", kFree2}, {"command", "green"}, {"params", {{"radius", 2}, {"z", "xyz"}}}}),
            scratch("badword"));
        CHECK(r.exit_code == 2);
    }
    SUBCASE("memory budget") {
        const auto r = cli::run(cli::parse_config({{"group", {{"type", "free"}, {"rank", 6}}},
                                                   {"command", "ball"},
                                                   {"params", {{"radius", 14}, {"write_csv", false}, {"memory_cap_mb", 16}}}}),
                                scratch("budget"));
        CHECK(r.exit_code == 3);
        CHECK(r.report["status"] == "partial");
    }
}

TEST_CASE("explicit pi intervals") {
    const auto r = cli::run(cli::parse_config({{"group", {{"type", "abelian"}, {"rank", 2}}},
                                               {"command", "pi"},
                                               {"params", {{"x", "AAA"}, {"y", "e"}, {"z", "aaa"}, {"working_radius", 8}}}}),
                            scratch("pi"));
    CHECK(r.exit_code == 0);
    CHECK(r.report["result"]["pi"] == 4.0);
    CHECK(r.report["result"]["status"] == "bypass");
}

TEST_CASE("criteria command") {
    const auto r = cli::run(cli::parse_config({{"group", kFree2},
                                               {"command", "criteria"},
                                               {"params", {{"A", 2}, {"a", 0.5}, {"B", 4}, {"b", 0.25}, {"r", 1}}}}),
                            scratch("criteria"));
    CHECK(r.exit_code == 0);
    CHECK(r.report["result"]["n"] == 15);
    CHECK(r.report["result"]["checks"]["k_range"] == true);
}

TEST_CASE("config hash ignores threads and output") {
    json doc = {{"group", kFree2}, {"command", "ball"}, {"params", {{"radius", 2}}}};
    const auto a = cli::config_hash(cli::parse_config(doc));
    doc["threads"] = 4;
    doc["output"] = "elsewhere";
    CHECK(cli::config_hash(cli::parse_config(doc)) == a);
    doc["params"]["radius"] = 3;
    CHECK(cli::config_hash(cli::parse_config(doc)) != a);
}

TEST_CASE("reports are reproducible across runs and thread counts") {
    const json doc = {{"group", kFree2},
                      {"command", "report"},
                      {"seed", 11},
                      {"params", {{"green_radius", 6}, {"pi_r", {2}}, {"pi_samples", 3}, {"bigon_L", 4}, {"decay_r", {1}}}}};
    auto config = cli::parse_config(doc);
    const auto one = cli::run(config, scratch("rep1"));
    const auto again = cli::run(config, scratch("rep2"));
    config.threads = 8;
    const auto eight = cli::run(config, scratch("rep8"));
    CHECK(one.exit_code == 0);
    CHECK(cli::strip_timestamp(one.report).dump() == cli::strip_timestamp(again.report).dump());
    CHECK(cli::strip_timestamp(one.report).dump() == cli::strip_timestamp(eight.report).dump());
    CHECK(slurp(scratch("x").parent_path() / "hyperwalk_cli_rep1" / "criteria.csv") ==
          slurp(scratch("x").parent_path() / "hyperwalk_cli_rep8" / "criteria.csv"));
}

}
