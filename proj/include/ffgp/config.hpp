// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_CONFIG_HPP
#define FFGP_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dataset.hpp"
#include "tempering.hpp"

namespace ffgp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat `key = value` document. '#' starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string, std::less<>>;

namespace detail {
    inline auto trim(std::string_view s) -> std::string_view
    {
        auto const first = s.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) {
            return {};
        }
        auto const last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }
} // namespace detail

inline auto parse_key_values(std::string_view text) -> KeyValues
{
    KeyValues out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = std::string(detail::trim(line.substr(0, eq)));
        auto value = std::string(detail::trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        if (!out.emplace(key, value).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return out;
}

inline auto read_key_values(std::string const& path) -> KeyValues
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

namespace detail {
    template <typename T>
    auto parse_number(std::string const& key, std::string const& value) -> T
    {
        T out {};
        auto const* first = value.data();
        auto const* last = value.data() + value.size();
        auto const [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last) {
            throw ConfigError("invalid value for '" + key + "': " + value);
        }
        return out;
    }

    inline auto parse_bool(std::string const& key, std::string const& value) -> bool
    {
        if (value == "true" || value == "1" || value == "yes") {
            return true;
        }
        if (value == "false" || value == "0" || value == "no") {
            return false;
        }
        throw ConfigError("invalid boolean for '" + key + "': " + value);
    }

    // Consumes known keys; anything left over is reported by finish().
    class Reader {
    public:
        explicit Reader(KeyValues kv) : kv_(std::move(kv)) { }

        template <typename T>
        void number(std::string const& key, T& target)
        {
            if (auto it = kv_.find(key); it != kv_.end()) {
                target = parse_number<T>(key, it->second);
                kv_.erase(it);
            }
        }

        void boolean(std::string const& key, bool& target)
        {
            if (auto it = kv_.find(key); it != kv_.end()) {
                target = parse_bool(key, it->second);
                kv_.erase(it);
            }
        }

        auto text(std::string const& key) -> std::optional<std::string>
        {
            if (auto it = kv_.find(key); it != kv_.end()) {
                auto v = it->second;
                kv_.erase(it);
                return v;
            }
            return std::nullopt;
        }

        void finish() const
        {
            if (!kv_.empty()) {
                throw ConfigError("unknown config key '" + kv_.begin()->first + "'");
            }
        }

    private:
        KeyValues kv_;
    };
} // namespace detail

struct DataConfig {
    BoxSpec spec {};
    int k_box { 10 };
    std::uint64_t seed { 1 };
};

inline auto data_config_from(KeyValues kv) -> DataConfig
{
    DataConfig c;
    detail::Reader r(std::move(kv));
    r.number("n_atoms", c.spec.n_atoms);
    r.number("box_length", c.spec.box_length);
    r.number("d_min", c.spec.d_min);
    r.number("r_lo", c.spec.r_lo);
    r.number("r_hi", c.spec.r_hi);
    r.number("epsilon", c.spec.epsilon);
    r.number("sigma", c.spec.sigma);
    r.number("k_box", c.k_box);
    r.number("seed", c.seed);
    r.finish();
    if (c.k_box < 1) {
        throw ConfigError("k_box must be at least 1");
    }
    try {
        c.spec.validate();
    } catch (DatasetError const& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline auto run_config_from(KeyValues kv) -> RunConfig
{
    RunConfig c;
    detail::Reader r(std::move(kv));
    r.number("t_min", c.ladder.t_min);
    r.number("t_max", c.ladder.t_max);
    r.number("n_replicas", c.ladder.n_replicas);
    if (auto v = r.text("scheme")) {
        if (*v == "linear") {
            c.ladder.scheme = LadderScheme::Linear;
        } else if (*v == "logarithmic") {
            c.ladder.scheme = LadderScheme::Logarithmic;
        } else {
            throw ConfigError("scheme must be linear or logarithmic");
        }
    }
    r.boolean("adaptive", c.ladder.adaptive);
    r.number("accept_lo", c.ladder.accept_lo);
    r.number("accept_hi", c.ladder.accept_hi);
    r.number("population_size", c.population_size);
    r.number("k_min", c.limits.k_min);
    r.number("k_max", c.limits.k_max);
    r.number("p_max", c.p_max);
    r.number("seed", c.seed);
    r.number("max_generations", c.max_generations);
    r.number("threshold_mse", c.threshold_mse);
    r.number("swap_attempts", c.swap_attempts);
    if (auto v = r.text("swap_partner")) {
        if (*v == "random") {
            c.swap_partner = SwapPartner::Random;
        } else if (*v == "best") {
            c.swap_partner = SwapPartner::Best;
        } else {
            throw ConfigError("swap_partner must be random or best");
        }
    }
    r.number("workers", c.workers);
    r.boolean("plant_exact", c.plant_exact);
    r.number("plant_replica", c.plant_replica);
    if (auto v = r.text("dataset")) {
        c.dataset = *v;
    }
    r.finish();
    try {
        c.validate();
    } catch (std::invalid_argument const& e) {
        throw ConfigError(e.what());
    }
    return c;
}

} // namespace ffgp

#endif
