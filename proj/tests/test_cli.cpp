#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "idsm/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using namespace idsm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
    const fs::path p = fs::temp_directory_path() / ("idsm_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(IDSM_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_text(int iterations, double epsilon, const std::string& truth = "square 0.3 0.2 0.2 -0.7") {
    return "model.kind = eit\n"
           "domain.a = 1\n"
           "domain.b = 0.8\n"
           "mesh.h = 0.1\n"
           "mesh.h_fine = 0.05\n"
           "truth.count = 1\n"
           "truth.shape.0 = " + truth + "\n"
           "sources.count = 2\n"
           "sources.0 = x1\n"
           "sources.1 = x2\n"
           "noise.epsilon = " + std::to_string(epsilon) + "\n"
           "noise.seed = 5\n"
           "idsm.iterations = " + std::to_string(iterations) + "\n";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.cfg";
    write_text(p, text);
    return p;
}

int count_files(const fs::path& dir, const std::string& prefix) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind(prefix, 0) == 0) ++n;
    return n;
}

}  // namespace

TEST_CASE("generate writes one directory per pair") {
    const fs::path dir = scratch("generate");
    const fs::path cfg = write_config(dir, config_text(3, 0.0));
    REQUIRE(run("generate --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
    CHECK(fs::exists(dir / "b" / "mesh.txt"));
    CHECK(fs::exists(dir / "b" / "truth_conductivity.csv"));
    CHECK(count_files(dir / "b", "pair_") == 2);
    // Noise-free data: the measurement is the exact trace.
    for (const char* p : {"pair_0", "pair_1"})
        CHECK(read_text(dir / "b" / p / "measurement.csv") == read_text(dir / "b" / p / "exact.csv"));
}

TEST_CASE("reconstruct writes K iterates and reruns are byte-identical") {
    for (int k : {1, 11}) {
        INFO("K = " << k);
        const fs::path dir = scratch(k == 1 ? "k1" : "k11");
        const fs::path cfg = write_config(dir, config_text(k, 0.1));
        const std::string c = " --config " + cfg.string();
        REQUIRE(run("generate" + c + " --out " + (dir / "b").string()) == 0);
        REQUIRE(run("reconstruct" + c + " --bundle " + (dir / "b").string() + " --out " + (dir / "r1").string()) == 0);
        REQUIRE(run("reconstruct" + c + " --bundle " + (dir / "b").string() + " --out " + (dir / "r2").string()) == 0);
        CHECK(count_files(dir / "r1", "u_") == k);
        CHECK(read_text(dir / "r1" / "summary.txt") == read_text(dir / "r2" / "summary.txt"));
        CHECK(read_text(dir / "r1" / "u_01.csv") == read_text(dir / "r2" / "u_01.csv"));
    }
}

TEST_CASE("seed override changes the noise") {
    const fs::path dir = scratch("seed");
    const fs::path cfg = write_config(dir, config_text(1, 0.1));
    const std::string c = "generate --config " + cfg.string();
    REQUIRE(run(c + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run(c + " --seed 6 --out " + (dir / "b").string()) == 0);
    REQUIRE(run(c + " --seed 5 --out " + (dir / "c").string()) == 0);
    CHECK(read_text(dir / "a" / "pair_0" / "measurement.csv") != read_text(dir / "b" / "pair_0" / "measurement.csv"));
    CHECK(read_text(dir / "a" / "pair_0" / "measurement.csv") == read_text(dir / "c" / "pair_0" / "measurement.csv"));
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    const fs::path cfg = write_config(dir, config_text(2, 0.1));
    const std::string c = " --config " + cfg.string();
    REQUIRE(run("generate" + c + " --out " + (dir / "b").string()) == 0);

    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("generate --config " + (dir / "missing.cfg").string()) == 2);

    write_text(dir / "bad.cfg", "model.kind = wave\n");
    CHECK(run("generate --config " + (dir / "bad.cfg").string()) == 2);

    // sigma0 + u* < 0 is inadmissible for the forward solve.
    write_text(dir / "neg.cfg", config_text(2, 0.1, "square 0.3 0.2 0.2 -1.5"));
    CHECK(run("generate --config " + (dir / "neg.cfg").string() + " --out " + (dir / "neg").string()) == 3);

    SUBCASE("corrupt bundle") {
        const fs::path m = dir / "b" / "pair_1" / "measurement.csv";
        const std::string text = read_text(m);
        write_text(m, text.substr(0, text.size() / 2));
        CHECK(run("reconstruct" + c + " --bundle " + (dir / "b").string() + " --out " + (dir / "r").string()) == 4);
    }
    SUBCASE("bundle on a different mesh") {
        std::string other = config_text(2, 0.1);
        other.replace(other.find("mesh.h = 0.1"), 12, "mesh.h = 0.12");
        write_text(dir / "other.cfg", other);
        CHECK(run("reconstruct --config " + (dir / "other.cfg").string() + " --bundle " + (dir / "b").string()) == 4);
    }
    SUBCASE("plot") {
        CHECK(run("plot --field " + (dir / "b" / "truth_conductivity.csv").string() + " --mesh " +
                  (dir / "b" / "mesh.txt").string() + " --config " + cfg.string() + " --out " + (dir / "t.ppm").string()) == 0);
        CHECK(read_text(dir / "t.ppm").rfind("P6\n800 640\n255\n", 0) == 0);
        CHECK(run("plot --field " + (dir / "b" / "truth_conductivity.csv").string() + " --mesh " +
                  (dir / "nomesh.txt").string()) == 2);
    }
}

TEST_CASE("compare on a zero-inclusion bundle") {
    const fs::path dir = scratch("zero");
    std::string text = config_text(3, 0.1);
    text.replace(text.find("truth.count = 1"), 15, "truth.count = 0");
    text.erase(text.find("truth.shape.0"), text.find('\n', text.find("truth.shape.0")) - text.find("truth.shape.0") + 1);
    const fs::path cfg = write_config(dir, text);
    REQUIRE(run("generate --config " + cfg.string() + " --out " + (dir / "b").string()) == 0);
    REQUIRE(run("compare --config " + cfg.string() + " --bundle " + (dir / "b").string() + " --out " + (dir / "c").string()) == 0);
    const std::string report = read_text(dir / "c" / "report.txt");
    auto value = [&](const std::string& key) {
        const auto at = report.find(key + " = ");
        REQUIRE(at != std::string::npos);
        return std::stod(report.substr(at + key.size() + 3));
    };
    // Data come from the fine mesh, so the iterates carry a discretization-level residue.
    MESSAGE("dsm " << value("dsm.l2_error") << " idsm " << value("idsm.l2_error"));
    CHECK(value("dsm.l2_error") <= 1e-2);
    CHECK(value("idsm.l2_error") <= 1e-2);
}
