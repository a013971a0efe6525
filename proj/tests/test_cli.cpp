#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsedom/cli.hpp"

using namespace sparsedom;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path dir;
    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("sparsedom_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* log_text = nullptr) {
    std::ostringstream log, err;
    const int code = run_command_line(args, log, err);
    if (log_text) *log_text = log.str() + err.str();
    return code;
}

} // namespace

TEST_CASE("flag parsing and config files") {
    TempDir tmp;
    const std::string config_path = tmp.path("run.conf");
    {
        std::ofstream config(config_path);
        config << "# comment line\n"
               << "q = 2\n"
               << "n = 4,8\n"
               << "r = 1\n";
    }
    const ExperimentConfig parsed = parse_command_line(
        {"sharpness", "--config", config_path, "--q", "4", "--out", tmp.path("x.csv")});
    CHECK(parsed.subcommand == "sharpness");
    CHECK(parsed.get("q", "") == "4"); // flags win over the file
    CHECK(parsed.get("r", "") == "1");
    CHECK(parsed.get_int_list("n", "") == std::vector<long long>{4, 8});

    CHECK_THROWS_AS(parse_command_line({"mystery"}), ConfigError);
    CHECK_THROWS_AS(parse_command_line({"sharpness", "--q"}), ConfigError);
    CHECK_THROWS_AS(parse_command_line({"sharpness", "oops"}), ConfigError);
}

TEST_CASE("integer list parsing handles ranges") {
    ExperimentConfig config;
    config.subcommand = "sharpness";
    config.values["n"] = "4..7,16";
    CHECK(config.get_int_list("n", "") == std::vector<long long>{4, 5, 6, 7, 16});
    config.values["n"] = "bogus";
    CHECK_THROWS_AS(config.get_int_list("n", ""), ConfigError);
}

TEST_CASE("sharpness subcommand writes the expected table") {
    TempDir tmp;
    const std::string out = tmp.path("sharp.csv");
    const int code = run({"sharpness", "--r", "1", "--q", "2", "--n", "4,8,16,32", "--seed", "7",
                          "--out", out});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("n,q,r,C_star,slope") != std::string::npos);
    CHECK(text.find("config_hash=") != std::string::npos);
    // frozen oracle: 4-point fit of the exact chain formula
    CHECK(text.find("0.3972844") != std::string::npos);
}

TEST_CASE("identical configurations reproduce identical bytes") {
    TempDir tmp;
    const std::string out = tmp.path("a.csv");
    std::string first;
    for (int round = 0; round < 2; ++round) {
        const int code = run({"dominate-check", "--depth", "4", "--dim", "2", "--seed", "42",
                              "--measure", "random", "--deterministic", "--out", out});
        CHECK(code == 0);
        if (round == 0) first = slurp(out);
    }
    CHECK(slurp(out) == first);
    CHECK(first.find("cell,numerator,denominator,ratio") != std::string::npos);
    CHECK(first.find("config_hash=") != std::string::npos);
}

TEST_CASE("dominate-check reports success in its comment") {
    TempDir tmp;
    const std::string out = tmp.path("dom.csv");
    std::string log;
    const int code = run({"dominate-check", "--depth", "5", "--q", "1", "--norm", "lp:1", "--dim",
                          "1", "--seed", "11", "--out", out},
                         &log);
    CHECK(code == 0);
    CHECK(log.find("constant=") != std::string::npos);
    const std::string text = slurp(out);
    CHECK(text.find("sparse=yes") != std::string::npos);
}

TEST_CASE("randomized subcommands demand a seed") {
    TempDir tmp;
    std::string log;
    CHECK(run({"probe-norm", "--out", tmp.path("p.csv")}, &log) == 2);
    CHECK(log.find("seed") != std::string::npos);
    CHECK(run({"convexity", "--out", tmp.path("c.csv")}) == 2);
    CHECK(run({"cz-check", "--out", tmp.path("z.csv")}) == 2);
    CHECK(run({"dominate-check", "--out", tmp.path("d.csv")}) == 2);
}

TEST_CASE("config errors name the offending key") {
    TempDir tmp;
    std::string log;
    CHECK(run({"sharpness", "--n", "4..2", "--out", tmp.path("s.csv")}, &log) == 2);
    CHECK(log.find("'n'") != std::string::npos);
    CHECK(run({"weights-scan", "--family", "cubic", "--seed", "3"}, &log) == 2);
    CHECK(run({"probe-norm", "--seed", "1", "--mode", "sideways"}, &log) == 2);
    CHECK(run({"cz-check", "--seed", "1", "--count", "0"}, &log) == 2);
}

TEST_CASE("convexity and probe-norm emit single-row tables") {
    TempDir tmp;
    const std::string conv = tmp.path("conv.csv");
    CHECK(run({"convexity", "--norm", "lp:2", "--q", "2", "--dim", "4", "--samples", "200",
               "--seed", "5", "--out", conv}) == 0);
    CHECK(slurp(conv).find("lp:2,2,4,200,5,1") != std::string::npos);

    const std::string probe = tmp.path("probe.csv");
    CHECK(run({"probe-norm", "--depth", "4", "--operator", "maximal", "--p", "2", "--samples",
               "16", "--seed", "5", "--out", probe, "--witness-out", tmp.path("w.csv")}) == 0);
    CHECK(slurp(probe).find("maximal,2,strong,") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path("w.csv")));
}

TEST_CASE("cz-check passes on a small corpus") {
    TempDir tmp;
    const std::string out = tmp.path("cz.csv");
    const int code = run({"cz-check", "--depth", "3", "--dim", "2", "--count", "25", "--seed",
                          "21", "--out", out});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("instance,lambda,pointwise_ok,weak_b_ok,g2_ok,g1_ratio") != std::string::npos);
    CHECK(text.find(",0,") == std::string::npos); // no failed booleans
    // weak-from-strong probe ratios are recorded in the comment line
    CHECK(text.find("weak1_over_strong2=") != std::string::npos);
    CHECK(text.find("weak1_over_strong4=") != std::string::npos);

    // non-uniform measures are supported with a small tolerance
    const std::string rough = tmp.path("cz_rough.csv");
    CHECK(run({"cz-check", "--depth", "4", "--dim", "2", "--count", "50", "--measure", "random",
               "--tolerance", "1e-9", "--seed", "1", "--out", rough}) == 0);
}

TEST_CASE("weights-scan emits the documented columns") {
    TempDir tmp;
    const std::string out = tmp.path("w.csv");
    const int code = run({"weights-scan", "--depth", "12", "--p", "2", "--q", "2", "--t", "1..8",
                          "--samples", "4", "--seed", "9", "--out", out});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("t,Ap,Ainf,Ainf_dual,norm_lb,predicted_exponent,fitted_slope") !=
          std::string::npos);

    // weak and weak-(1,1) modes run with their documented predictions
    const std::string weak_out = tmp.path("weak.csv");
    CHECK(run({"weights-scan", "--depth", "10", "--p", "2", "--q", "2", "--t", "1..8", "--mode",
               "weak", "--samples", "2", "--seed", "9", "--out", weak_out}) == 0);
    const std::string weak1_out = tmp.path("weak1.csv");
    CHECK(run({"weights-scan", "--depth", "10", "--p", "1", "--q", "1", "--t", "1..8", "--mode",
               "weak1", "--samples", "2", "--seed", "9", "--out", weak1_out}) == 0);
    CHECK(slurp(weak1_out).find(",1,") != std::string::npos); // predicted exponent 1
}

TEST_CASE("sparse-build dumps the family with witnesses") {
    TempDir tmp;
    const std::string out = tmp.path("fam.csv");
    const int code = run({"sparse-build", "--depth", "4", "--dim", "2", "--seed", "33",
                          "--measure", "random", "--out", out});
    CHECK(code == 0);
    const std::string text = slurp(out);
    CHECK(text.find("cube,parent,tau,witness_mass,cube_mass") != std::string::npos);
    CHECK(text.find("0:0,none,") != std::string::npos); // the root member
}

TEST_CASE("measure and function files round trip") {
    TempDir tmp;
    const GridSpec grid(1, 3);
    const DyadicMeasure mu = random_measure(grid, 999, 0.3);
    const std::string mpath = tmp.path("measure.csv");
    write_measure_csv(mpath, mu);
    const DyadicMeasure back = read_measure_csv(mpath, grid);
    CHECK(back.cell_masses() == mu.cell_masses());

    const SimpleFunction f = random_function(grid, 3, 998);
    const std::string fpath = tmp.path("function.csv");
    write_function_csv(fpath, f);
    const SimpleFunction fback = read_function_csv(fpath, grid);
    CHECK(fback.raw() == f.raw());
    CHECK(fback.dim() == 3);

    // file-backed inputs drive the runner without a seed
    const std::string out = tmp.path("dom.csv");
    const int code = run({"dominate-check", "--depth", "3", "--dim", "3", "--measure",
                          "file:" + mpath, "--function", "file:" + fpath, "--out", out});
    CHECK(code == 0);
}
