#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pdm/cli.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "pdmctl");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = pdm::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("pdmctl_test_" + name);
}

} // namespace

TEST_CASE("validate") {
    const auto ok = run({"validate", "builtin:monitoring"});
    CHECK(ok.code == 0);
    CHECK(ok.out == "OK\n");

    const auto path = temp_file("cycle.pdm");
    std::ofstream(path) << "root: A\nop: id=X out=A in=B cost=1 time=1 prob=0\nop: id=Y out=B in=A cost=1 time=1 prob=0\n";
    const auto bad = run({"validate", path.string()});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("cycle") != std::string::npos);
    std::filesystem::remove(path);

    CHECK(run({"validate", "/nonexistent.pdm"}).code == 1);
}

TEST_CASE("enumerate") {
    const auto r = run({"enumerate", "builtin:mortgage"});
    CHECK(r.code == 0);
    CHECK(r.out == "ops;total_cost;total_time\n"
                   "Op01,Op02,Op05,Op06,Op08,Op09,Op10;13;5\n"
                   "Op03,Op10;12;5\n"
                   "Op04,Op07;3;2\n");
    CHECK(run({"enumerate", "builtin:monitoring", "--cap", "3"}).code == 1);
    CHECK(run({"enumerate", "builtin:monitoring", "--cap", "0"}).code == 2);
}

TEST_CASE("plan with forced failures") {
    const auto r = run({"plan", "builtin:mortgage", "--heuristic", "rank_ext_cost", "--fail", "Op07", "--fail", "Op08"});
    CHECK(r.code == 0);
    CHECK(r.out.find("status: root_produced") != std::string::npos);
    // With E lost, the plan falls back to the forms; once F is lost too, G is pointless.
    const auto line = r.out.find(";Op08;0;");
    REQUIRE(line != std::string::npos);
    const auto eol = r.out.find('\n', line);
    const auto row = r.out.substr(line, eol - line);
    CHECK(row.find("Op09") != std::string::npos);
    CHECK(row.find("Op10") == std::string::npos);
    CHECK(r.out.find("total_cost: 13.000000") != std::string::npos);

    CHECK(run({"plan", "builtin:mortgage", "--heuristic", "rank_cost", "--fail", "Op99"}).code == 1);
}

TEST_CASE("usage errors") {
    CHECK(run({"simulate", "builtin:mortgage", "--heuristic", "bogus"}).code == 2);
    CHECK(run({"simulate", "builtin:mortgage", "--heuristic", "rank_cost", "--setting", "weird"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"validate"}).code == 2);
    CHECK(run({"report", "--unknown-flag"}).code == 2);
}

TEST_CASE("simulate") {
    const auto r = run({"simulate", "builtin:monitoring", "--heuristic", "rank_cost", "--cases", "200", "--seed", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("cases: 200") != std::string::npos);
    CHECK(r.out.find("note: time defaults to cost") != std::string::npos);

    const auto traces = temp_file("traces.csv");
    const auto t = run({"simulate", "builtin:mortgage", "--heuristic", "random", "--cases", "20", "--setting",
                        "uniform", "--traces", traces.string()});
    CHECK(t.code == 0);
    std::ifstream in(traces);
    std::string header;
    std::getline(in, header);
    CHECK(header == "instance;planner;step;op;success;cum_cost;cum_time;status");
    std::filesystem::remove(traces);
}

TEST_CASE("report is reproducible") {
    const auto a = temp_file("a.csv");
    const auto b = temp_file("b.csv");
    CHECK(run({"report", "--models", "mortgage,monitoring", "--cases", "150", "--seed", "2", "--out", a.string()})
              .code == 0);
    CHECK(run({"report", "--models", "mortgage,monitoring", "--cases", "150", "--seed", "2", "--threads", "3",
               "--out", b.string()})
              .code == 0);
    const auto slurp = [](const std::filesystem::path &p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const auto text = slurp(a);
    CHECK_FALSE(text.empty());
    CHECK(text == slurp(b));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}
