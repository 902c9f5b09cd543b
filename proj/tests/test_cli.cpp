// SPDX-License-Identifier: MIT
#include "kal/cli.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace kal;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "kahlerlab");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("catalog lists examples, targets and checks")
{
    const Run r = cli({"catalog", "list"});
    CHECK(r.code == 0);
    CHECK(r.out.find("conj-curve") != std::string::npos);
    CHECK(r.out.find("cp{m}-K{value}") != std::string::npos);
    CHECK(r.out.find("delta-kappa-wolfson") != std::string::npos);
}

TEST_CASE("verify exits 0 on passes and emits parseable sorted JSON")
{
    const Run r = cli({"verify", "--checks", "delta-kappa-wolfson", "--example", "conj-curve?k=2", "--points", "3"});
    CHECK(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["summary"]["pass"] == 3);
    CHECK(j["results"].size() == 3);
    CHECK(j["meta"]["seed"] == 1);
    CHECK(j["meta"]["fd"]["order"] == 4);
    CHECK(j["results"][0]["verdict"] == "pass");
    CHECK(r.out.find("\"check_id\"") < r.out.find("\"verdict\""));
}

TEST_CASE("second order stencils are selectable")
{
    const Run r = cli({"verify", "--checks", "nabla-pullback", "--example", "conj-curve", "--points", "1", "--fd-order",
                       "2", "--fd-step", "1e-4"});
    CHECK(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["meta"]["fd"]["order"] == 2);
    CHECK(j["results"][0]["oracle"]["fd_order"] == 2);
}

TEST_CASE("identical runs produce byte-identical JSON")
{
    const std::vector<std::string> args = {"verify", "--checks", "*", "--example", "product-conj", "--points", "2",
                                           "--seed", "9"};
    const Run a = cli(args), b = cli(args);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    const Run c = cli({"verify", "--checks", "*", "--example", "product-conj", "--points", "2", "--seed", "10"});
    CHECK(c.out != a.out);
}

TEST_CASE("an impossible tolerance fails with exit code 1 and shows the residual")
{
    const Run r = cli({"verify", "--checks", "weitzenbock", "--example", "conj-curve", "--points", "2", "--tol",
                       "1e-300", "--format", "table"});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(r.out.find("e-") != std::string::npos);
    CHECK(r.out.find("fail 2") != std::string::npos);
}

TEST_CASE("CSV has a header and one row per point")
{
    const Run r = cli({"verify", "--checks", "nabla-pullback", "--example", "product-conj", "--points", "4", "--format",
                       "csv"});
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 5);
    CHECK(r.out.rfind("check_id,example,point,verdict", 0) == 0);
}

TEST_CASE("configuration errors exit with code 2")
{
    CHECK(cli({"verify", "--checks", "nope-*", "--example", "conj-curve"}).code == 2);
    CHECK(cli({"verify", "--checks", "*", "--example", "nope"}).code == 2);
    CHECK(cli({"verify", "--checks", "*", "--example", "conj-curve?k=9"}).code == 2);
    CHECK(cli({"verify", "--checks", "*", "--example", "conj-curve", "--fd-order", "3"}).code == 2);
    CHECK(cli({"verify", "--checks", "*", "--example", "conj-curve", "--points", "0"}).code == 2);
    CHECK(cli({"verify", "--checks", "*", "--example", "conj-curve", "--out", "/nonexistent/dir/x.json"}).code == 2);
    CHECK(cli({"verify", "--example", "conj-curve"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"angles", "--example", "conj-curve", "--at", "0.1"}).code == 2);
    CHECK(cli({"angles", "--example", "conj-curve", "--at", "0.1,x"}).code == 2);
    CHECK(cli({"flow", "--example", "conj-curve"}).code == 2);
}

TEST_CASE("angles subcommand reports the spectrum")
{
    const Run r = cli({"angles", "--example", "conj-curve?k=2", "--at", "0.3,0"});
    CHECK(r.code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["cos"][0].get<double>() - 8.0 / 17.0) < 1e-10);
}

TEST_CASE("verify and flow write to --out")
{
    const std::string path = "cli_test_out.json";
    const Run r = cli({"verify", "--checks", "nabla-pullback", "--example", "conj-curve", "--points", "1", "--out", path});
    CHECK(r.code == 0);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(nlohmann::json::parse(ss.str())["summary"]["pass"] == 1);
    std::remove(path.c_str());

    const Run f = cli({"flow", "--example", "torus-graph", "--eps", "0.1", "--grid", "8", "--steps", "20", "--format",
                       "csv"});
    CHECK(f.code == 0);
    CHECK(count_lines(f.out) >= 2);
}
