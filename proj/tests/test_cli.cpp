// Exercises the command-line driver: artifact formats, exit codes, and
// byte-identical reruns.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "honeycomb/trees.hpp"

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HONEYCOMB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("bands artifact has the documented format and is reproducible") {
    const fs::path d = fresh_dir("hc_cli_bands");
    REQUIRE(run_cli("bands --path gamma-to-K --n 20 --output-dir " + d.string()) == 0);
    const std::string first = slurp(d / "bands.csv");
    std::istringstream in(first);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "k_x,k_y,e1,e2,e3,e4");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
    }
    CHECK(rows == 20);
    REQUIRE(run_cli("bands --path gamma-to-K --n 20 --output-dir " + d.string()) == 0);
    CHECK(slurp(d / "bands.csv") == first);
}

TEST_CASE("fermi artifact lists eight points with tiny residuals") {
    const fs::path d = fresh_dir("hc_cli_fermi");
    REQUIRE(run_cli("fermi --epsilon 0.1 --output-dir " + d.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(d / "fermi.json"));
    REQUIRE(j.at("points").size() == 8);
    for (const auto& pt : j.at("points")) {
        CHECK(pt.at("residual").get<double>() <= 1e-10);
        CHECK((pt.at("omega") == 1 || pt.at("omega") == -1));
    }
}

TEST_CASE("tree counts in the artifact match the library") {
    const fs::path d = fresh_dir("hc_cli_trees");
    REQUIRE(run_cli("trees --n 4 --span 3 --output-dir " + d.string()) == 0);
    std::istringstream in(slurp(d / "trees.csv"));
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "n,trees,shapes");
    for (int n = 1; n <= 4; ++n) {
        REQUIRE(std::getline(in, line));
        std::ostringstream want;
        want << n << ',' << honeycomb::enumerate_trees(n, -2, 1).size() << ','
             << honeycomb::branching_tree_count(n);
        CHECK(line == want.str());
    }
}

TEST_CASE("regime scan artifact is deterministic with a header row") {
    const fs::path d = fresh_dir("hc_cli_regimes");
    REQUIRE(run_cli("regimes --regime III0 --output-dir " + d.string()) == 0);
    const std::string first = slurp(d / "regimes.csv");
    CHECK(first.rfind("rho,error\n", 0) == 0);
    REQUIRE(run_cli("regimes --regime III0 --output-dir " + d.string()) == 0);
    CHECK(slurp(d / "regimes.csv") == first);
}

TEST_CASE("grassmann artifact depends only on the seed") {
    const fs::path d = fresh_dir("hc_cli_grassmann");
    REQUIRE(run_cli("grassmann --samples 6 --seed 11 --output-dir " + d.string()) == 0);
    const std::string a = slurp(d / "grassmann.csv");
    REQUIRE(run_cli("grassmann --samples 6 --seed 11 --output-dir " + d.string()) == 0);
    CHECK(slurp(d / "grassmann.csv") == a);
    REQUIRE(run_cli("grassmann --samples 6 --seed 12 --output-dir " + d.string()) == 0);
    CHECK(slurp(d / "grassmann.csv") != a);
}

TEST_CASE("invalid configuration fails fast with exit code 2") {
    const fs::path d = fresh_dir("hc_cli_bad");
    {
        std::ofstream out(d / "bad.json");
        out << R"({"epsilon": 0.1, "bogus": 3})";
    }
    CHECK(run_cli("fermi --config " + (d / "bad.json").string()) == 2);
    {
        std::ofstream out(d / "good.json");
        out << R"({"epsilon": 0.12, "seed": 5, "output-dir": ")" << d.string() << R"("})";
    }
    CHECK(run_cli("fermi --config " + (d / "good.json").string()) == 0);
    CHECK(run_cli("regimes --regime IV") == 2);
    CHECK(run_cli("nonsense") == 2);
    CHECK(run_cli("fermi --epsilon 3.0") == 2);
}

TEST_CASE("scales artifact reports the threshold chain") {
    const fs::path d = fresh_dir("hc_cli_scales");
    REQUIRE(run_cli("scales --epsilon 0.1 --M 8 --output-dir " + d.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(d / "scales.json"));
    CHECK(j.at("M") == 8);
    CHECK(j.at("h0bar").get<int>() >= j.at("h1").get<int>());
    CHECK(j.at("h1").get<int>() >= j.at("h1bar").get<int>());
    CHECK(j.at("h1bar").get<int>() >= j.at("h2").get<int>());
    CHECK(j.at("h2").get<int>() >= j.at("h2bar").get<int>());
    CHECK(!j.at("scales").empty());
}
