#include "gibbsinv/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "gibbsinv/errors.hpp"

namespace gibbsinv {

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("not a number: '" + s + "'");
    return v;
}

void write_radial_csv(const std::filesystem::path& csv, const RadialFunction& f,
                      const std::string& column) {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv.string());
    out << "r," << column << "\n";
    out << format_double(0.5) << "," << format_double(f.core_value()) << "\n";
    for (std::size_t i = 0; i < f.size(); ++i)
        out << format_double(f.bin_center(i)) << "," << format_double(f[i]) << "\n";

    nlohmann::ordered_json side;
    side["d"] = f.dim();
    side["delta"] = f.delta();
    side["r_max"] = f.r_max();
    side["core_value"] = format_double(f.core_value());
    side["column"] = column;
    std::ofstream js(std::filesystem::path(csv).replace_extension(".json"));
    js << side.dump(2) << "\n";
}

RadialFunction read_radial_csv(const std::filesystem::path& csv, int dim) {
    std::ifstream in(csv);
    if (!in) throw Error("cannot read " + csv.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> radii, values;
    bool have_core = false;
    double core = 0.0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(csv.string() + ":" + std::to_string(lineno) + ": expected r,value");
        const double r = parse_double(line.substr(0, comma));
        auto rest = line.substr(comma + 1);
        if (auto c2 = rest.find(','); c2 != std::string::npos) rest = rest.substr(0, c2);
        const double v = parse_double(rest);
        if (r < 1.0) {
            // several core rows: keep the one farthest from zero
            if (!have_core || std::abs(v) > std::abs(core)) core = v;
            have_core = true;
        } else {
            radii.push_back(r);
            values.push_back(v);
        }
    }

    const auto sidecar = std::filesystem::path(csv).replace_extension(".json");
    double delta = 0.0, r_max = 0.0;
    if (std::filesystem::exists(sidecar)) {
        std::ifstream js(sidecar);
        const auto side = nlohmann::json::parse(js);
        dim = side.at("d").get<int>();
        delta = side.at("delta").get<double>();
        r_max = side.at("r_max").get<double>();
    } else {
        if (radii.size() < 2) throw Error(csv.string() + ": need two bins or a sidecar to infer the grid");
        delta = radii[1] - radii[0];
        r_max = radii.back() + 0.5 * delta;
        // snap to the nearest round values so bin_count is stable
        delta = std::round(delta * 1e9) / 1e9;
        r_max = std::round(r_max * 1e9) / 1e9;
    }
    RadialFunction f = RadialFunction::zeros(dim, delta, r_max, core);
    if (f.size() != values.size()) {
        std::ostringstream msg;
        msg << csv.string() << ": " << values.size() << " bins, grid expects " << f.size();
        throw GridMismatch(msg.str());
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (std::abs(radii[i] - f.bin_center(i)) > 1e-6 * delta) {
            std::ostringstream msg;
            msg << csv.string() << ": row " << i << " at r = " << radii[i] << " is not bin center "
                << f.bin_center(i);
            throw GridMismatch(msg.str());
        }
    }
    return f.with_values(std::move(values));
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace gibbsinv
