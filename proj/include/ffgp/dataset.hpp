// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_DATASET_HPP
#define FFGP_DATASET_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "random.hpp"

namespace ffgp {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Atom placement gave up: the spec cannot be packed within the proposal budget.
class InfeasibleSpec : public DatasetError {
public:
    using DatasetError::DatasetError;
};

// Training-box geometry in reduced units (lengths in sigma, energies in epsilon).
struct BoxSpec {
    int n_atoms { 10 };
    double box_length { 3.0 };
    double d_min { 0.5 };
    double r_lo { 0.7 };
    double r_hi { 2.0 };
    double epsilon { 1.0 };
    double sigma { 1.0 };

    void validate() const
    {
        if (n_atoms < 1) {
            throw DatasetError("box spec: n_atoms must be at least 1");
        }
        if (!(d_min > 0 && d_min <= r_lo && r_lo < r_hi)) {
            throw DatasetError("box spec: need 0 < d_min <= r_lo < r_hi");
        }
        if (!(r_hi < box_length)) {
            throw DatasetError("box spec: r_hi must be below box_length for single-shell image enumeration");
        }
        if (!(epsilon > 0 && sigma > 0) || !std::isfinite(epsilon) || !std::isfinite(sigma)) {
            throw DatasetError("box spec: epsilon and sigma must be positive and finite");
        }
    }

    friend auto operator==(BoxSpec const&, BoxSpec const&) -> bool = default;
};

using Vec3 = std::array<double, 3>;

struct AtomBox {
    std::vector<Vec3> coordinates;

    friend auto operator==(AtomBox const&, AtomBox const&) -> bool = default;
};

struct TrainingCase {
    std::vector<double> distances;
    double target_energy { 0.0 };

    friend auto operator==(TrainingCase const&, TrainingCase const&) -> bool = default;
};

struct Dataset {
    BoxSpec spec;
    std::uint64_t seed { 0 };
    std::vector<AtomBox> boxes;
    std::vector<TrainingCase> cases;

    [[nodiscard]] auto box_count() const noexcept -> std::size_t { return cases.size(); }

    [[nodiscard]] auto mean_distance_count() const noexcept -> double
    {
        if (cases.empty()) {
            return 0.0;
        }
        std::size_t total = 0;
        for (auto const& c : cases) {
            total += c.distances.size();
        }
        return static_cast<double>(total) / static_cast<double>(cases.size());
    }

    friend auto operator==(Dataset const&, Dataset const&) -> bool = default;
};

inline constexpr int placement_attempts = 100000;

inline auto minimum_image_distance(Vec3 const& a, Vec3 const& b, double box_length) -> double
{
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        auto d = b[k] - a[k];
        d -= box_length * std::round(d / box_length);
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Rejection sampling: atoms are placed in order; each proposal draws x, y, z
// uniformly in [0, L) and is rejected if any already-placed atom is closer
// than d_min under the minimum-image convention.
inline auto place_atoms(BoxSpec const& spec, Rng& rng) -> AtomBox
{
    spec.validate();
    AtomBox box;
    box.coordinates.reserve(static_cast<std::size_t>(spec.n_atoms));
    for (int atom = 0; atom < spec.n_atoms; ++atom) {
        bool placed = false;
        for (int attempt = 0; attempt < placement_attempts && !placed; ++attempt) {
            Vec3 p {};
            for (auto& x : p) {
                x = rng.uniform01() * spec.box_length;
            }
            placed = true;
            for (auto const& q : box.coordinates) {
                if (minimum_image_distance(p, q, spec.box_length) < spec.d_min) {
                    placed = false;
                    break;
                }
            }
            if (placed) {
                box.coordinates.push_back(p);
            }
        }
        if (!placed) {
            throw InfeasibleSpec("place_atoms: could not place atom " + std::to_string(atom) + " after "
                + std::to_string(placement_attempts) + " proposals");
        }
    }
    return box;
}

// Every (pair i<j, image offset n in {-1,0,1}^3) term with r_lo < |r_j - r_i + nL| < r_hi.
inline auto pair_distances(AtomBox const& box, BoxSpec const& spec) -> std::vector<double>
{
    if (!(spec.r_hi < spec.box_length)) {
        throw DatasetError("pair_distances: r_hi must be below box_length");
    }
    auto const& xs = box.coordinates;
    auto const L = spec.box_length;
    std::vector<double> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            for (int nx = -1; nx <= 1; ++nx) {
                for (int ny = -1; ny <= 1; ++ny) {
                    for (int nz = -1; nz <= 1; ++nz) {
                        auto const dx = xs[j][0] - xs[i][0] + nx * L;
                        auto const dy = xs[j][1] - xs[i][1] + ny * L;
                        auto const dz = xs[j][2] - xs[i][2] + nz * L;
                        auto const r = std::sqrt(dx * dx + dy * dy + dz * dz);
                        if (r > spec.r_lo && r < spec.r_hi) {
                            out.push_back(r);
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Lennard-Jones pair energy 4 eps [(sigma/r)^12 - (sigma/r)^6].
inline auto lj_pair(double r, BoxSpec const& spec = {}) -> double
{
    auto const s6 = std::pow(spec.sigma / r, 6);
    return 4.0 * spec.epsilon * (s6 * s6 - s6);
}

inline auto box_energy(std::span<double const> distances, BoxSpec const& spec = {}) -> double
{
    double e = 0.0;
    for (auto r : distances) {
        e += lj_pair(r, spec);
    }
    return e;
}

// Box b is placed from stream Rng::derive(seed, b).
inline auto build_dataset(BoxSpec const& spec, int k_box, std::uint64_t seed) -> Dataset
{
    spec.validate();
    if (k_box < 1) {
        throw DatasetError("build_dataset: k_box must be at least 1");
    }
    Dataset d;
    d.spec = spec;
    d.seed = seed;
    for (int b = 0; b < k_box; ++b) {
        auto rng = Rng::derive(seed, static_cast<std::uint64_t>(b));
        auto box = place_atoms(spec, rng);
        TrainingCase c;
        c.distances = pair_distances(box, spec);
        c.target_energy = box_energy(c.distances, spec);
        d.boxes.push_back(std::move(box));
        d.cases.push_back(std::move(c));
    }
    return d;
}

// ---------------------------------------------------------------------------
// JSON file format

inline void to_json(nlohmann::json& j, BoxSpec const& s)
{
    j = nlohmann::json {
        { "n_atoms", s.n_atoms },
        { "box_length", s.box_length },
        { "d_min", s.d_min },
        { "r_lo", s.r_lo },
        { "r_hi", s.r_hi },
        { "epsilon", s.epsilon },
        { "sigma", s.sigma },
    };
}

inline void from_json(nlohmann::json const& j, BoxSpec& s)
{
    j.at("n_atoms").get_to(s.n_atoms);
    j.at("box_length").get_to(s.box_length);
    j.at("d_min").get_to(s.d_min);
    j.at("r_lo").get_to(s.r_lo);
    j.at("r_hi").get_to(s.r_hi);
    j.at("epsilon").get_to(s.epsilon);
    j.at("sigma").get_to(s.sigma);
}

inline auto dataset_to_json(Dataset const& d) -> nlohmann::json
{
    nlohmann::json boxes = nlohmann::json::array();
    for (auto const& b : d.boxes) {
        boxes.push_back(b.coordinates);
    }
    nlohmann::json cases = nlohmann::json::array();
    for (auto const& c : d.cases) {
        cases.push_back({ { "distances", c.distances }, { "target_energy", c.target_energy } });
    }
    return { { "spec", d.spec }, { "seed", d.seed }, { "boxes", std::move(boxes) }, { "cases", std::move(cases) } };
}

inline auto dataset_from_json(nlohmann::json const& j) -> Dataset
{
    Dataset d;
    try {
        d.spec = j.at("spec").get<BoxSpec>();
        d.seed = j.at("seed").get<std::uint64_t>();
        for (auto const& b : j.at("boxes")) {
            d.boxes.push_back({ b.get<std::vector<Vec3>>() });
        }
        for (auto const& c : j.at("cases")) {
            d.cases.push_back({ c.at("distances").get<std::vector<double>>(), c.at("target_energy").get<double>() });
        }
    } catch (nlohmann::json::exception const& e) {
        throw DatasetError(std::string("dataset schema: ") + e.what());
    }

    d.spec.validate();
    if (d.cases.empty()) {
        throw DatasetError("dataset schema: at least one case is required");
    }
    if (d.boxes.size() != d.cases.size()) {
        throw DatasetError("dataset schema: boxes and cases differ in length");
    }
    for (auto const& c : d.cases) {
        if (!std::isfinite(c.target_energy)) {
            throw DatasetError("dataset schema: non-finite target energy");
        }
        for (auto r : c.distances) {
            if (!(r > d.spec.r_lo && r < d.spec.r_hi)) {
                throw DatasetError("dataset schema: distance outside the interaction window");
            }
        }
    }
    return d;
}

// Doubles are written in shortest round-trip form, so load(save(d)) == d bit for bit.
inline void save_dataset(Dataset const& d, std::string const& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DatasetError("cannot open " + path + " for writing");
    }
    out << dataset_to_json(d).dump(1) << '\n';
    if (!out) {
        throw DatasetError("failed writing " + path);
    }
}

inline auto load_dataset(std::string const& path) -> Dataset
{
    std::ifstream in(path);
    if (!in) {
        throw DatasetError("cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (nlohmann::json::exception const& e) {
        throw DatasetError(path + ": " + e.what());
    }
    return dataset_from_json(j);
}

} // namespace ffgp

#endif
