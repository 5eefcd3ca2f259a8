#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gibbsinv/errors.hpp"
#include "gibbsinv/io.hpp"

using namespace gibbsinv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gibbsinv_test_io";
    fs::create_directories(dir);
    return dir / name;
}

RadialFunction sample(int d = 1) {
    auto f = RadialFunction::zeros(d, 0.05, 3.0, 0.0);
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i)) / 3.0;
    return f.with_values(v);
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_double(kInf) == "inf");
    CHECK(format_double(-kInf) == "-inf");
    CHECK(parse_double("inf") == kInf);
    CHECK(parse_double(format_double(0.1)) == 0.1);
    CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("radial CSV round trip") {
    const auto phi = g_to_phi(sample().with_core(-1.0));
    const fs::path p = scratch("phi.csv");
    write_radial_csv(p, phi, "phi");
    CHECK(fs::exists(scratch("phi.json")));
    const auto back = read_radial_csv(p);
    CHECK(back.core_value() == kInf);
    CHECK(back.same_grid(phi));
    for (std::size_t i = 0; i < phi.size(); ++i) CHECK(back[i] == phi[i]);

    std::ifstream in(p);
    std::string header, core;
    std::getline(in, header);
    std::getline(in, core);
    CHECK(header == "r,phi");
    CHECK(core == "0.5,inf");

    const auto f3 = sample(3);
    write_radial_csv(scratch("f3.csv"), f3);
    CHECK(read_radial_csv(scratch("f3.csv")).dim() == 3);
}

TEST_CASE("grid inferred without a sidecar") {
    const auto f = sample().with_core(-1e-6);
    const fs::path p = scratch("bare.csv");
    write_radial_csv(p, f);
    fs::remove(scratch("bare.json"));
    const auto back = read_radial_csv(p);
    CHECK(back.same_grid(f));
    CHECK(back.core_value() == -1e-6);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
}

TEST_CASE("grid mismatch") {
    const auto f = sample();
    const fs::path p = scratch("short.csv");
    write_radial_csv(p, f);
    // sidecar claims a longer grid than the rows provide
    std::ofstream(scratch("short.json")) << R"({"d": 1, "delta": 0.05, "r_max": 4.0})";
    CHECK_THROWS_AS(read_radial_csv(p), GridMismatch);
    std::ofstream(scratch("short.json")) << R"({"d": 1, "delta": 0.1, "r_max": 2.0})";
    CHECK_THROWS_AS(read_radial_csv(p), GridMismatch);
}

TEST_CASE("file digest") {
    const fs::path a = scratch("a.txt"), b = scratch("b.txt");
    std::ofstream(a) << "hello";
    std::ofstream(b) << "hellp";
    CHECK(file_digest(a).size() == 16);
    CHECK(file_digest(a) == file_digest(a));
    CHECK(file_digest(a) != file_digest(b));
    std::ofstream(a, std::ios::trunc);
    CHECK(file_digest(a) == "cbf29ce484222325");  // FNV-1a offset basis for empty input
}
