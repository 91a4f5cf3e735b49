// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include <ffgp/config.hpp>
#include <ffgp/report.hpp>

using namespace ffgp;
namespace fs = std::filesystem;

namespace {

auto scratch(std::string const& name) -> fs::path
{
    auto const dir = fs::temp_directory_path() / "ffgp_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the command-line tool and returns its exit status.
auto cli(std::string const& args, std::string const& capture = "") -> int
{
    auto cmd = std::string(FFGP_CLI_PATH) + " " + args;
    cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture + " 2>&1";
    auto const status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

auto slurp(fs::path const& p) -> std::string
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(fs::path const& p, std::string const& text) { std::ofstream(p) << text; }

} // namespace

TEST(KeyValues, CommentsAndWhitespace)
{
    auto const kv = parse_key_values("# header\n a = 1 \n\nb=two # trailing\n");
    EXPECT_EQ(kv.size(), 2U);
    EXPECT_EQ(kv.at("a"), "1");
    EXPECT_EQ(kv.at("b"), "two");
    EXPECT_THROW((void)parse_key_values("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW((void)parse_key_values("just words\n"), ConfigError);
}

TEST(RunConfigFrom, KnownKeysAndErrors)
{
    auto const c = run_config_from(parse_key_values("n_replicas = 32\nscheme = linear\nswap_partner = best\n"
                                                    "threshold_mse = 1e-6\nadaptive = true\n"));
    EXPECT_EQ(c.ladder.n_replicas, 32);
    EXPECT_EQ(c.ladder.scheme, LadderScheme::Linear);
    EXPECT_EQ(c.swap_partner, SwapPartner::Best);
    EXPECT_EQ(c.threshold_mse, 1e-6);
    EXPECT_TRUE(c.ladder.adaptive);
    EXPECT_THROW((void)run_config_from(parse_key_values("n_replica = 3\n")), ConfigError);
    EXPECT_THROW((void)run_config_from(parse_key_values("n_replicas = three\n")), ConfigError);
    EXPECT_THROW((void)run_config_from(parse_key_values("t_min = 10\nt_max = 1\n")), ConfigError);
    EXPECT_THROW((void)run_config_from(parse_key_values("k_min = 5\nk_max = 4\n")), ConfigError);
}

TEST(DataConfigFrom, DefaultsAndErrors)
{
    auto const c = data_config_from({});
    EXPECT_EQ(c.k_box, 10);
    EXPECT_EQ(c.spec.n_atoms, 10);
    EXPECT_THROW((void)data_config_from(parse_key_values("k_box = 0\n")), ConfigError);
    EXPECT_THROW((void)data_config_from(parse_key_values("r_hi = 5\n")), ConfigError);
}

TEST(Report, HistoryRowFormat)
{
    HistoryRow row;
    row.generation = 3;
    row.best_fitness_overall = -0.1;
    row.best_mse_so_far = 0.1;
    row.best_tree_infix = "R + 1";
    auto const line = format_history_row(row);
    EXPECT_EQ(line.substr(0, 2), "3,");
    EXPECT_NE(line.find("-0.10000000000000001"), std::string::npos);
    EXPECT_EQ(line.substr(line.size() - 6), ",R + 1");
    std::size_t commas = 0;
    for (auto ch : std::string(history_header)) {
        commas += ch == ',' ? 1 : 0;
    }
    EXPECT_EQ(commas, 9U);
}

TEST(Equivalence, ExactFormAndZero)
{
    BoxSpec const spec;
    auto const exact = check_equivalence(parse_infix("4*(1/R^12) - 4*(1/R^6)"), spec, 1001, 1e-12);
    EXPECT_TRUE(exact.verdict);
    EXPECT_EQ(exact.r.front(), 0.7);
    EXPECT_EQ(exact.r.back(), 2.0);
    auto const zero = check_equivalence(ExprTree::constant(0), spec, 1001, 1e-9);
    EXPECT_FALSE(zero.verdict);
    EXPECT_NEAR(zero.max_rel_error, 1.0, 1e-12);
    auto const blowup = check_equivalence(parse_infix("1/(R-1)"), spec, 1001, 1e-9);
    EXPECT_FALSE(blowup.verdict);
    EXPECT_FALSE(blowup.diagnostic.empty());
}

TEST(Equivalence, ExpandedFormReducesToLennardJones)
{
    auto const t = parse_infix("((R^(-13) - R^(-7))*(R^1 + 19*R))/(abs(0/R) + abs(5)*1)");
    EXPECT_TRUE(check_equivalence(t, BoxSpec {}, 1001, 1e-9).verdict);
}

TEST(Cli, CountSpace)
{
    auto const dir = scratch("count");
    EXPECT_EQ(cli("count-space --m 5 --k 4 --p 20", (dir / "out.txt").string()), 0);
    EXPECT_EQ(slurp(dir / "out.txt"), "2861137380483970656642000000000000000\n");
    EXPECT_EQ(cli("count-space --m 2 --k 2 --p 1", (dir / "out.txt").string()), 0);
    EXPECT_EQ(slurp(dir / "out.txt"), "2048\n");
    EXPECT_EQ(cli("count-space --m 1 --k 1 --p 0", (dir / "out.txt").string()), 0);
    EXPECT_EQ(slurp(dir / "out.txt"), "4\n");
    EXPECT_EQ(cli("count-space --m 0"), 2);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(cli(""), 2);
    EXPECT_EQ(cli("no-such-command"), 2);
    EXPECT_EQ(cli("check-equiv --tree '((R'"), 2);
}

TEST(Cli, CheckEquivExitCodes)
{
    auto const dir = scratch("equiv");
    EXPECT_EQ(cli("check-equiv --tree '4*(1/R^12) - 4*(1/R^6)' --tol 1e-12"), 0);
    EXPECT_EQ(cli("check-equiv --tree 0"), 1);
    write(dir / "tree.txt", "((R^(-13) - R^(-7))*(R^1 + 19*R))/(abs(0/R) + abs(5)*1)\n");
    EXPECT_EQ(cli("check-equiv --tree-file " + (dir / "tree.txt").string() + " --report " + (dir / "rep.json").string()),
        0);
    EXPECT_NE(slurp(dir / "rep.json").find("\"verdict\": true"), std::string::npos);
}

TEST(Cli, GenDataIsByteIdenticalAndValidated)
{
    auto const dir = scratch("gen");
    auto const a = (dir / "a.json").string();
    auto const b = (dir / "b.json").string();
    EXPECT_EQ(cli("gen-data --out " + a + " --seed 5"), 0);
    EXPECT_EQ(cli("gen-data --out " + b + " --seed 5"), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    write(dir / "bad.cfg", "k_box = 0\n");
    EXPECT_EQ(cli("gen-data --config " + (dir / "bad.cfg").string() + " --out " + (dir / "c.json").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "c.json"));
    write(dir / "unknown.cfg", "boxes = 3\n");
    EXPECT_EQ(cli("gen-data --config " + (dir / "unknown.cfg").string() + " --out " + (dir / "c.json").string()), 2);
}

TEST(Cli, RunPlantedConvergesAtGenerationZero)
{
    auto const dir = scratch("planted");
    auto const data = (dir / "data.json").string();
    ASSERT_EQ(cli("gen-data --out " + data), 0);
    write(dir / "run.cfg", "n_replicas = 4\npopulation_size = 50\nmax_generations = 10\nplant_exact = true\nworkers = 1\n");
    EXPECT_EQ(cli("run --config " + (dir / "run.cfg").string() + " --dataset " + data + " --out-dir " +
                  (dir / "out").string()),
        0);
    auto const history = slurp(dir / "out" / "history.csv");
    EXPECT_EQ(history.substr(0, history.find('\n')), history_header);
    auto const result = nlohmann::json::parse(slurp(dir / "out" / "result.json"));
    EXPECT_EQ(result.at("generation_found"), 0);
    EXPECT_LE(-result.at("best_fitness").get<double>(), 1e-9);
    EXPECT_TRUE(result.contains("config"));
    EXPECT_TRUE(result.contains("best_tree_infix"));
}

TEST(Cli, RunHistoryIsMonotone)
{
    auto const dir = scratch("monotone");
    auto const data = (dir / "data.json").string();
    ASSERT_EQ(cli("gen-data --out " + data), 0);
    write(dir / "run.cfg", "n_replicas = 4\npopulation_size = 60\nmax_generations = 20\nworkers = 2\n");
    ASSERT_EQ(cli("run --config " + (dir / "run.cfg").string() + " --dataset " + data + " --out-dir " +
                  (dir / "out").string()),
        0);
    std::istringstream lines(slurp(dir / "out" / "history.csv"));
    std::string line;
    std::getline(lines, line);
    double prev = std::numeric_limits<double>::infinity();
    int rows = 0;
    while (std::getline(lines, line)) {
        std::vector<std::string> fields;
        std::istringstream f(line);
        std::string field;
        while (std::getline(f, field, ',')) {
            fields.push_back(field);
        }
        auto const mse = std::stod(fields.at(2));
        EXPECT_LE(mse, prev);
        prev = mse;
        ++rows;
    }
    EXPECT_EQ(rows, 21);
}

TEST(Cli, MissingDatasetLeavesNoOutputs)
{
    auto const dir = scratch("missing");
    EXPECT_EQ(cli("run --dataset " + (dir / "nope.json").string() + " --out-dir " + (dir / "out").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
    EXPECT_EQ(cli("run --out-dir " + (dir / "out").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "out"));
}
