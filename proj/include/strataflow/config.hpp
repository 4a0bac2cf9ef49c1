#pragma once

#include <string>
#include <vector>

#include "strataflow/profiles.hpp"

namespace strataflow {

// `poly(c0, c1, ...)` or `table(path.csv)`.
struct ProfileSpec {
    enum class Kind { Poly, Table };
    Kind kind = Kind::Poly;
    std::vector<double> coeffs;
    std::string path;

    bool operator==(const ProfileSpec&) const = default;
};

struct RunConfig {
    double g = 1.0;
    double c = 1.0;
    double p0 = -1.0;
    ProfileSpec rho{ProfileSpec::Kind::Poly, {1.0}, {}};
    ProfileSpec beta{ProfileSpec::Kind::Poly, {0.0}, {}};
    FloorMode floor = FloorMode::Strict;

    int Nq = 64;
    int Np = 64;
    int sturm_np = 512;
    int sweep_points = 64;
    double lambda_hi = 0.0;  // 0: automatic

    double newton_rtol = 1e-10;
    double newton_steptol = 1e-12;
    int newton_max_iter = 30;
    double laminar_rtol = 1e-13;

    int steps = 25;
    double ds = 0.0;      // 0: 0.02 d
    double ds_min = 0.0;  // 0: ds / 64
    double ds_max = 0.0;  // 0: ds
    double s0 = 0.0;      // 0: 1e-2 d
    int direction = 1;
    double delta = 0.0;   // 0: 1e-3 min H_p
    int snapshot_every = 5;

    int threads = 0;
    std::string output = "out";
    bool force = false;

    // Directory that relative table paths resolve against; not serialized.
    std::string base_dir;

    bool operator==(const RunConfig& o) const;
};

// Throws ParseError with "line L, column C: ..." on malformed input.
RunConfig parse_config(const std::string& text, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);
// Canonical text form; every real is written with 17 significant digits.
std::string serialize_config(const RunConfig& cfg);

Profile1D load_profile(const ProfileSpec& spec, const std::string& base_dir);
ProfileBundle make_bundle(const RunConfig& cfg);

// Copy with table paths made absolute, for embedding in artifacts.
RunConfig with_absolute_paths(const RunConfig& cfg);

}  // namespace strataflow
