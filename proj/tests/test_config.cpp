#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"
#include "voterlab/config.hpp"
#include "voterlab/json_io.hpp"
#include "voterlab/suites.hpp"

using namespace voterlab;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_tables(const SuiteResult& a, const SuiteResult& b)
{
    if (a.tables.size() != b.tables.size() || a.pass != b.pass) return false;
    for (std::size_t i = 0; i < a.tables.size(); ++i)
        if (a.tables[i].name != b.tables[i].name || a.tables[i].rows != b.tables[i].rows) return false;
    return true;
}

}  // namespace

TEST_SUITE("config")
{
    TEST_CASE("key-value parsing")
    {
        const auto c = parse_config_text("# header\nfamily = complete   # trailing\nsizes = [8, 16]\n\nlabel = \"a#b\"\nflag = true\n",
                                         "test.cfg");
        CHECK(c.get<std::string>("family") == "complete");
        CHECK(c.get<std::vector<int>>("sizes") == std::vector<int>{8, 16});
        CHECK(c.get<std::string>("label") == "a#b");
        CHECK(c.get<bool>("flag"));
        CHECK(c.line_of("sizes") == 3);
        CHECK(c.get_or<int>("absent", 7) == 7);
    }

    TEST_CASE("errors name the key or line")
    {
        const auto c = parse_config_text("replicas = 10\n", "x.cfg");
        CHECK_THROWS_WITH_AS(c.get<int>("family"), "x.cfg: missing required key 'family'", ConfigError);
        CHECK_THROWS_WITH_AS(c.require({"replicas", "sizes"}), "x.cfg: missing required key 'sizes'", ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("a = 1\nthis line is wrong\n", "y.cfg"), "y.cfg:2: expected 'key = value'", ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("a = 1\na = 2\n", "y.cfg"), "y.cfg:2: duplicate key 'a'", ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("\n\nsizes = [1, 2\n", "y.cfg"),
                             "y.cfg:3: value for key 'sizes' is neither JSON nor a bare word", ConfigError);
        CHECK_THROWS_AS(parse_config_text("a =\n"), ConfigError);
        const auto bad_type = parse_config_text("\nreplicas = \"many\"\n", "z.cfg");
        CHECK_THROWS_AS(bad_type.get<int>("replicas"), ConfigError);
        CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), ConfigError);
    }

    TEST_CASE("config hash tracks content, not layout")
    {
        const auto a = parse_config_text("x = 1\ny = [1,2]\n");
        const auto b = parse_config_text("  y   =   [1, 2]   # comment\n\nx=1\n");
        const auto c = parse_config_text("x = 2\ny = [1,2]\n");
        CHECK(a.hash() == b.hash());
        CHECK(a.hash() != c.hash());
        CHECK(a.hash().size() == 16);
        CHECK(fnv1a_hex("") == "cbf29ce484222325");
        CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    }

    TEST_CASE("JSON round trips")
    {
        const auto k = voterlab::testing::cycle(5);
        const auto back = kernel_from_json(kernel_to_json(k));
        CHECK(back.matrix() == k.matrix());

        TypeSpace space({"a", "b", "c"}, {{0, 1, 2}, {1, 0, 1.5}, {2, 1.5, 0}});
        const MutationMeasure mu({0.1, 0.0, 0.4});
        const auto j = type_space_to_json(space, mu);
        const auto space2 = type_space_from_json(j);
        CHECK(space2.labels() == space.labels());
        CHECK(space2.distance(1, 2) == 1.5);
        CHECK(mutation_from_json(j, space2).weights() == mu.weights());

        const FiniteMeasure lambda({0.25, 0.0, 0.75});
        const auto mj = measure_to_json(lambda, space);
        CHECK(mj.size() == 2);
        CHECK(measure_from_json(mj, space).weights == lambda.weights);
        CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"zz": 1})"), space), std::out_of_range);
    }

    TEST_CASE("CSV cells")
    {
        CHECK(csv_cell(Json(nullptr)).empty());
        CHECK(csv_cell(Json(3)) == "3");
        CHECK(csv_cell(Json(0.1)) == "0.10000000000000001");
        CHECK(csv_cell(Json(true)) == "true");
        CHECK(csv_cell(Json("a,b")) == "\"a,b\"");
    }

    TEST_CASE("suites are deterministic and thread-count independent")
    {
        const auto config = parse_config_text("instances = 40\nbound_instances = 1\nbound_replicas = 10000\nmax_sites = 5\n", "d.cfg");
        SuiteOptions serial{3, Parallelism::serial(), std::nullopt};
        SuiteOptions parallel{3, Parallelism{4}, std::nullopt};
        const auto a = run_suite("duality", config, serial);
        const auto b = run_suite("duality", config, serial);
        const auto c = run_suite("duality", config, parallel);
        CHECK(a.pass);
        CHECK(same_tables(a, b));
        CHECK(same_tables(a, c));

        const auto sweep = parse_config_text("family = complete\nsizes = [8, 16]\nreplicas = 200\nfv_replicas = 1000\n"
                                             "time_grid = [0, 0.5, 1]\nassert_convergence = false\n",
                                             "s.cfg");
        CHECK(same_tables(run_suite("sweep", sweep, serial), run_suite("sweep", sweep, parallel)));
    }

    TEST_CASE("reports and CSV files")
    {
        const auto config = parse_config_text("instances = 20\nmax_sites = 4\nbound_checks = 1\nbound_replicas = 200\n", "g.cfg");
        SuiteOptions options{9, Parallelism::serial(), std::nullopt};
        const auto result = run_suite("generators", config, options);
        CHECK(result.pass);
        const auto dir = std::filesystem::temp_directory_path() / "voterlab_report_test";
        std::filesystem::remove_all(dir);
        emit_report(result, config, options, dir);
        const auto report = Json::parse(slurp(dir / "report.json"));
        CHECK(report.at("suite") == "generators");
        CHECK(report.at("seed") == 9);
        CHECK(report.at("pass") == true);
        CHECK(report.at("config_hash") == config.hash());
        for (const auto& table : result.tables) CHECK(std::filesystem::exists(dir / (table.name + ".csv")));
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("suite dispatch")
    {
        const auto config = parse_config_text("suite = meeting\ninstances = 1\n", "m.cfg");
        CHECK_THROWS_AS(run_suite("duality", config, {}), ConfigError);
        CHECK_THROWS_AS(run_suite("nonsense", parse_config_text(""), {}), std::invalid_argument);
        CHECK_THROWS_AS(run_suite("meeting", parse_config_text("family = complete\n"), {}), ConfigError);
        CHECK(suite_names().size() == 5);
    }
}
