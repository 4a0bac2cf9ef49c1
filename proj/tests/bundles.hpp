#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "strataflow/profiles.hpp"

namespace testing_bundles {

using strataflow::FloorMode;
using strataflow::Profile1D;
using strataflow::ProfileBundle;

struct Named {
    std::string name;
    ProfileBundle bundle;
};

inline ProfileBundle constant_density(double g = 1.0, double p0 = -1.0) {
    return ProfileBundle({g, 1.0, p0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
}

// Fixed set used by the bifurcation checks.
inline std::vector<Named> regression() {
    std::vector<Named> r;
    r.push_back({"constant g=1", constant_density(1.0)});
    r.push_back({"constant g=9.81 p0=-2", constant_density(9.81, -2.0)});
    r.push_back({"constant vorticity", ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.3}))});
    r.push_back({"linear rho 0.2", ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.2}), Profile1D::poly({0.0}),
                                                 FloorMode::Relaxed)});
    r.push_back({"linear rho 0.05 g=4", ProfileBundle({4.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.05}),
                                                      Profile1D::poly({0.0}), FloorMode::Relaxed)});
    r.push_back({"quadratic rho with vorticity",
                 ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.1, 0.1}), Profile1D::poly({0.1, 0.2}),
                               FloorMode::Relaxed)});
    return r;
}

// Stratified bundles with sup |rho'| in {0.05, 0.2, 0.5}.
inline std::vector<Named> stratified(FloorMode floor) {
    std::vector<Named> r;
    auto add = [&](const char* name, std::vector<double> rho) {
        r.push_back({name, ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly(std::move(rho)), Profile1D::poly({0.0}), floor)});
    };
    add("linear 0.05", {1.0, -0.05});
    add("linear 0.2", {1.0, -0.2});
    add("linear 0.5", {1.0, -0.5});
    add("quadratic 0.2", {1.0, -0.1, 0.05});   // rho' = -0.1 + 0.1 p
    add("quadratic 0.5", {1.0, -0.2, 0.15});   // rho' = -0.2 + 0.3 p
    return r;
}

inline std::vector<unsigned long long> read_seeds(const std::string& path) {
    std::ifstream in(path);
    std::vector<unsigned long long> seeds;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        unsigned long long s;
        if (ss >> s) seeds.push_back(s);
    }
    return seeds;
}

// One admissible bundle per seed: constant, linear or quadratic density with a linear
// Bernoulli function.
inline ProfileBundle random_bundle(unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double g = 0.5 * std::pow(40.0, U(rng));
    const double p0 = -(0.5 + 1.5 * U(rng));
    const double rho0 = 0.8 + 0.4 * U(rng);
    const int kind = int(rng() % 3);
    std::vector<double> rho{rho0};
    if (kind >= 1) {
        const double slope = 0.5 * U(rng);
        rho.push_back(-slope);
        if (kind == 2) {
            // rho' = -slope + 2 b p stays nonpositive for b >= 0
            rho.push_back(0.5 * slope * U(rng) / std::fabs(p0));
        }
    }
    std::vector<double> beta{U(rng) - 0.5, U(rng) - 0.5};
    return ProfileBundle({g, 1.0, p0}, Profile1D::poly(rho), Profile1D::poly(beta));
}

}  // namespace testing_bundles
