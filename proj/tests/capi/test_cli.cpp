#include "doctest.h"
#include "json.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kCli = SMARTSIZER_CLI;
const std::string kFixtures = SMARTSIZER_FIXTURE_DIR;

struct Run {
    int code = -1;
    std::string out;  // stdout followed by stderr
};

Run run(const std::string& args) {
    const std::string cmd = "'" + kCli + "' " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path scratch() {
    auto dir = std::filesystem::temp_directory_path() / "smartsizer_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("power report") {
    const auto r = run("power --sigma " + kFixtures + "/extend/sigma_aipw.csv --theta " + kFixtures +
                       "/extend/theta_aipw.csv --direction lower --delta-min 2 --n 250 --reps 20000");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["exclusion_indices"] == nlohmann::json::array({6, 8}));
    CHECK(j["power"].get<double>() == doctest::Approx(0.46).epsilon(0.1));
    CHECK(j["manifest"]["command"] == "power");
    CHECK(j["manifest"]["generator"] == "mt19937_64+boost-ziggurat");
}

TEST_CASE("size with inline effects writes to a file") {
    const auto out = scratch() / "size.json";
    const auto r = run("size --sigma " + kFixtures + "/extend/sigma_aipw.csv --delta 0.5,0 --delta-min 0.5 --out " +
                       out.string());
    CHECK(r.code == 2);  // two entries against an 8x8 matrix
    CHECK(r.out.find("error: code=") == 0);
    std::ofstream(scratch() / "i2.csv") << "1,0\n0,1\n";
    const auto ok = run("size --sigma " + (scratch() / "i2.csv").string() +
                        " --delta 0.5,0 --delta-min 0.5 --reps 100000 --out " + out.string());
    REQUIRE(ok.code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["n"].get<int>() >= 49);
    CHECK(j["n"].get<int>() <= 51);
}

TEST_CASE("exit codes") {
    const auto missing = run("power --sigma /nonexistent.csv --delta 0,1 --delta-min 1 --n 10");
    CHECK(missing.code == 2);
    CHECK(missing.out.find("code=io_error") != std::string::npos);
    CHECK(missing.out.find("exit=2") != std::string::npos);

    std::ofstream(scratch() / "bad.csv") << "1,2\n2,1\n";
    const auto npd = run("power --sigma " + (scratch() / "bad.csv").string() + " --delta 0,1 --delta-min 1 --n 10");
    CHECK(npd.code == 2);
    CHECK(npd.out.find("not_positive_definite") != std::string::npos);

    std::ofstream(scratch() / "i2.csv") << "1,0\n0,1\n";
    const auto empty = run("size --sigma " + (scratch() / "i2.csv").string() + " --delta 0,0.1 --delta-min 1");
    CHECK(empty.code == 3);
    CHECK(empty.out.find("empty_exclusion_set") != std::string::npos);

    CHECK(run("power --bogus").code == 2);
    CHECK(run("").code != 0);
}

TEST_CASE("project writes a matrix and a report") {
    const auto m = scratch() / "proj.csv";
    const auto r = run("project --sigma " + kFixtures + "/designs/sigma_true_design2.csv --structure block --out " +
                       m.string());
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"].contains("rho2"));
    CHECK(j["manifest"]["params"]["block_start"] == 2);
    CHECK(std::filesystem::exists(m));
}

TEST_CASE("simulate and sweep produce CSV") {
    const auto csv = scratch() / "sim.csv";
    const auto r = run("simulate --design 1 --n-grid 50,100 --reps 20 --critical-reps 2000 --out " + csv.string());
    REQUIRE(r.code == 0);
    const std::string text = slurp(csv);
    CHECK(text.rfind("n,power,mc_se,usable", 0) == 0);
    CHECK(std::filesystem::exists(csv.string() + ".manifest.json"));

    std::ofstream(scratch() / "sweep.json")
        << R"({"template":"exchangeable","dim":4,"params":{"sigma2":1,"rho":0.5},
              "axes":[{"name":"rho","lower":0,"upper":0.5,"steps":2}],
              "effects":{"uniform":0.25,"best":1},"n":150,"reps":5000})";
    const auto s = run("sweep --spec " + (scratch() / "sweep.json").string() + " --out " +
                       (scratch() / "sweep.csv").string());
    REQUIRE(s.code == 0);
    CHECK(slurp(scratch() / "sweep.csv").rfind("rho,power,mc_se,feasible", 0) == 0);
}

TEST_CASE("power curve over an n grid") {
    const auto csv = scratch() / "curve.csv";
    const auto r = run("power --sigma " + kFixtures + "/designs/sigma_true_design1.csv --theta " +
                       "1.3125,0.8125,1.1875,0.6875 --delta-min 0.5 --n-grid 50..500 --reps 20000 --out " +
                       csv.string());
    REQUIRE(r.code == 0);
    const std::string text = slurp(csv);
    CHECK(text.rfind("n,power,mc_se,band_lower,band_upper\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
    CHECK(run("power --sigma " + kFixtures + "/designs/sigma_true_design1.csv --theta 1,2,3,4 --delta-min 1")
              .code == 2);
}
