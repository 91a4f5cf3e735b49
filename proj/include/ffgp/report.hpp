// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_REPORT_HPP
#define FFGP_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "expr.hpp"
#include "fitness.hpp"
#include "tempering.hpp"

namespace ffgp {

// 17 significant digits: enough to round-trip any double.
inline auto format_double(double x) -> std::string
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline constexpr char const* history_header = "generation,best_fitness_overall,best_mse_so_far,replica_index_of_best,"
                                              "temperature_of_best,swap_acceptance_rate,pass_through_count,"
                                              "crossover_count,mutation_count,best_tree_infix";

inline auto format_history_row(HistoryRow const& row) -> std::string
{
    std::string s;
    s += std::to_string(row.generation);
    s += ',' + format_double(row.best_fitness_overall);
    s += ',' + format_double(row.best_mse_so_far);
    s += ',' + std::to_string(row.replica_index_of_best);
    s += ',' + format_double(row.temperature_of_best);
    s += ',' + format_double(row.swap_acceptance_rate);
    s += ',' + std::to_string(row.pass_through_count);
    s += ',' + std::to_string(row.crossover_count);
    s += ',' + std::to_string(row.mutation_count);
    s += ',' + row.best_tree_infix;
    return s;
}

inline void write_history(std::ostream& out, std::vector<HistoryRow> const& rows)
{
    out << history_header << '\n';
    for (auto const& row : rows) {
        out << format_history_row(row) << '\n';
    }
}

inline auto config_to_json(RunConfig const& c) -> nlohmann::json
{
    return {
        { "t_min", c.ladder.t_min },
        { "t_max", c.ladder.t_max },
        { "n_replicas", c.ladder.n_replicas },
        { "scheme", c.ladder.scheme == LadderScheme::Linear ? "linear" : "logarithmic" },
        { "adaptive", c.ladder.adaptive },
        { "accept_lo", c.ladder.accept_lo },
        { "accept_hi", c.ladder.accept_hi },
        { "population_size", c.population_size },
        { "k_min", c.limits.k_min },
        { "k_max", c.limits.k_max },
        { "p_max", c.p_max },
        { "seed", c.seed },
        { "max_generations", c.max_generations },
        { "threshold_mse", c.threshold_mse },
        { "swap_attempts", c.swap_attempts },
        { "swap_partner", c.swap_partner == SwapPartner::Best ? "best" : "random" },
        { "workers", c.workers },
        { "plant_exact", c.plant_exact },
        { "plant_replica", c.plant_replica },
        { "dataset", c.dataset },
    };
}

// JSON has no infinities; non-finite values are written as null.
inline auto json_number(double x) -> nlohmann::json
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline auto result_to_json(RunResult const& r, RunConfig const& c) -> nlohmann::json
{
    return {
        { "best_tree_infix", r.best_infix },
        { "best_fitness", json_number(r.best_fitness) },
        { "best_mse", json_number(r.best_mse()) },
        { "generation_found", r.generation_found },
        { "generations_run", r.generations_run },
        { "converged", r.converged },
        { "interrupted", r.interrupted },
        { "master_seed", c.seed },
        { "swap_attempts_total", r.swaps.total_attempts() },
        { "swap_accepted_total", r.swaps.total_accepted() },
        { "config", config_to_json(c) },
    };
}

// ---------------------------------------------------------------------------
// numeric equivalence against the Lennard-Jones reference

inline constexpr double equivalence_floor = 1e-6; // in epsilon; below it, absolute error is used

struct EquivalenceReport {
    std::vector<double> r;
    std::vector<double> candidate;
    std::vector<double> reference;
    std::vector<double> abs_error;
    std::vector<double> rel_error;
    double max_abs_error { 0.0 };
    double max_rel_error { 0.0 };
    double tolerance { 0.0 };
    bool verdict { false };
    std::string diagnostic;
};

// Samples r on [r_lo, r_hi] (both endpoints, n points). A sample passes when
// its relative error is within `tolerance`, or, where |reference| is below
// the floor, when its absolute error is within tolerance * epsilon.
inline auto check_equivalence(ExprTree const& tree, BoxSpec const& spec, int n_samples, double tolerance)
    -> EquivalenceReport
{
    if (n_samples < 2 || !(tolerance > 0)) {
        throw std::invalid_argument("check_equivalence: need n_samples >= 2 and tolerance > 0");
    }
    auto const prog = compile(tree);
    EquivalenceReport rep;
    rep.tolerance = tolerance;
    rep.verdict = true;
    for (int k = 0; k < n_samples; ++k) {
        auto const r = k == n_samples - 1
            ? spec.r_hi
            : spec.r_lo + (spec.r_hi - spec.r_lo) * static_cast<double>(k) / static_cast<double>(n_samples - 1);
        auto const c = eval_program(prog, r);
        auto const ref = lj_pair(r, spec);
        auto const abs_err = std::abs(c - ref);
        auto const rel_err = abs_err / std::abs(ref);
        rep.r.push_back(r);
        rep.candidate.push_back(c);
        rep.reference.push_back(ref);
        rep.abs_error.push_back(abs_err);
        rep.rel_error.push_back(rel_err);
        if (!std::isfinite(c)) {
            if (rep.verdict) {
                rep.diagnostic = "candidate is not finite at r = " + format_double(r);
            }
            rep.verdict = false;
            continue;
        }
        rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
        bool ok = false;
        if (std::abs(ref) > equivalence_floor * spec.epsilon) {
            rep.max_rel_error = std::max(rep.max_rel_error, rel_err);
            ok = rel_err <= tolerance;
        } else {
            ok = abs_err <= tolerance * spec.epsilon;
        }
        if (!ok && rep.verdict) {
            rep.diagnostic = "first mismatch at r = " + format_double(r);
        }
        rep.verdict = rep.verdict && ok;
    }
    return rep;
}

inline auto equivalence_to_json(EquivalenceReport const& rep) -> nlohmann::json
{
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t k = 0; k < rep.r.size(); ++k) {
        samples.push_back({
            { "r", rep.r[k] },
            { "candidate", json_number(rep.candidate[k]) },
            { "reference", rep.reference[k] },
            { "abs_error", json_number(rep.abs_error[k]) },
            { "rel_error", json_number(rep.rel_error[k]) },
        });
    }
    return {
        { "verdict", rep.verdict },
        { "tolerance", rep.tolerance },
        { "max_abs_error", rep.max_abs_error },
        { "max_rel_error", rep.max_rel_error },
        { "diagnostic", rep.diagnostic },
        { "samples", std::move(samples) },
    };
}

} // namespace ffgp

#endif
