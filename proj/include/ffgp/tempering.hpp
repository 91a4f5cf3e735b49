// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_TEMPERING_HPP
#define FFGP_TEMPERING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dataset.hpp"
#include "engine.hpp"
#include "expr.hpp"
#include "fitness.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace ffgp {

enum class LadderScheme : std::uint8_t { Linear, Logarithmic };
enum class SwapPartner : std::uint8_t { Random, Best };

struct LadderSpec {
    double t_min { 0.1 };
    double t_max { 10.0 };
    int n_replicas { 200 };
    LadderScheme scheme { LadderScheme::Logarithmic };
    bool adaptive { false };
    double accept_lo { 0.2 }; // target swap-acceptance band
    double accept_hi { 0.6 };

    void validate() const
    {
        if (n_replicas < 1) {
            throw std::invalid_argument("ladder: n_replicas must be at least 1");
        }
        if (!(t_min > 0 && t_min < t_max) || !std::isfinite(t_max)) {
            throw std::invalid_argument("ladder: need 0 < t_min < t_max");
        }
        if (!(accept_lo >= 0 && accept_lo <= accept_hi && accept_hi <= 1)) {
            throw std::invalid_argument("ladder: need 0 <= accept_lo <= accept_hi <= 1");
        }
    }
};

// Replica temperatures, ascending, with exact endpoints. A single replica
// sits at t_min.
inline auto ladder(LadderSpec const& spec) -> std::vector<Temperature>
{
    spec.validate();
    std::vector<Temperature> out;
    auto const n = spec.n_replicas;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            out.emplace_back(spec.t_min);
            continue;
        }
        if (i == n - 1) {
            out.emplace_back(spec.t_max);
            continue;
        }
        auto const x = static_cast<double>(i) / static_cast<double>(n - 1);
        if (spec.scheme == LadderScheme::Linear) {
            out.emplace_back(spec.t_min + x * (spec.t_max - spec.t_min));
        } else {
            out.emplace_back(std::exp(std::log(spec.t_min) + x * (std::log(spec.t_max) - std::log(spec.t_min))));
        }
    }
    return out;
}

struct Replica {
    Population population;
    Temperature temperature { 1.0 };
    Rng rng;
};

// Per neighbour pair (i, i+1): attempted and accepted exchanges.
struct SwapStats {
    std::vector<std::uint64_t> attempts;
    std::vector<std::uint64_t> accepted;

    explicit SwapStats(std::size_t pairs = 0) : attempts(pairs, 0), accepted(pairs, 0) { }

    [[nodiscard]] auto total_attempts() const -> std::uint64_t
    {
        return std::accumulate(attempts.begin(), attempts.end(), std::uint64_t { 0 });
    }
    [[nodiscard]] auto total_accepted() const -> std::uint64_t
    {
        return std::accumulate(accepted.begin(), accepted.end(), std::uint64_t { 0 });
    }
    [[nodiscard]] auto rate() const -> double
    {
        auto const a = total_attempts();
        return a == 0 ? 0.0 : static_cast<double>(total_accepted()) / static_cast<double>(a);
    }

    auto operator+=(SwapStats const& o) -> SwapStats&
    {
        if (attempts.size() < o.attempts.size()) {
            attempts.resize(o.attempts.size(), 0);
            accepted.resize(o.accepted.size(), 0);
        }
        for (std::size_t k = 0; k < o.attempts.size(); ++k) {
            attempts[k] += o.attempts[k];
            accepted[k] += o.accepted[k];
        }
        return *this;
    }
};

// Exchange probability min{1, exp[(beta_i - beta_j)(f_i - f_j)]}. Undefined
// products (-inf against -inf, or equal betas against an infinite gap) count
// as a zero exponent.
inline auto swap_probability(double beta_i, double beta_j, double f_i, double f_j) noexcept -> double
{
    auto const exponent = (beta_i - beta_j) * (f_i - f_j);
    if (std::isnan(exponent) || exponent >= 0) {
        return 1.0;
    }
    return std::exp(exponent);
}

inline auto swap_accept(double beta_i, double beta_j, double f_i, double f_j, Rng& rng) -> bool
{
    auto const p = swap_probability(beta_i, beta_j, f_i, f_j);
    if (p >= 1.0) {
        return true;
    }
    return rng.uniform01() < p;
}

// Adjacent pairs in ascending temperature order, `attempts` tries each.
inline auto swap_stage(std::vector<Replica>& replicas, Rng& rng, SwapPartner partner = SwapPartner::Random, int attempts = 1)
    -> SwapStats
{
    SwapStats stats(replicas.empty() ? 0 : replicas.size() - 1);
    for (std::size_t i = 0; i + 1 < replicas.size(); ++i) {
        auto& cold = replicas[i].population;
        auto& hot = replicas[i + 1].population;
        for (int a = 0; a < attempts; ++a) {
            std::size_t ci = 0;
            std::size_t hi = 0;
            if (partner == SwapPartner::Random) {
                ci = static_cast<std::size_t>(rng.uniform_index(cold.size()));
                hi = static_cast<std::size_t>(rng.uniform_index(hot.size()));
            }
            ++stats.attempts[i];
            if (swap_accept(replicas[i].temperature.beta(), replicas[i + 1].temperature.beta(), cold.fitness[ci],
                    hot.fitness[hi], rng)) {
                ++stats.accepted[i];
                std::swap(cold.trees[ci], hot.trees[hi]);
                std::swap(cold.fitness[ci], hot.fitness[hi]);
                cold.sort();
                hot.sort();
            }
        }
    }
    return stats;
}

inline constexpr double adapt_step = 0.1;

// Interior temperatures move 10% of the way (in ln T) toward the midpoint of
// their neighbours when their mean swap acceptance is below the band, and
// 10% away from it when above. Updates sweep upward using already-updated
// lower neighbours; each value is clamped strictly between its neighbours.
inline void adapt_temperatures(std::vector<Replica>& replicas, SwapStats const& cumulative, LadderSpec const& spec)
{
    if (!spec.adaptive || replicas.size() < 3) {
        return;
    }
    auto pair_rate = [&](std::size_t k, bool& seen) {
        if (k >= cumulative.attempts.size() || cumulative.attempts[k] == 0) {
            return 0.0;
        }
        seen = true;
        return static_cast<double>(cumulative.accepted[k]) / static_cast<double>(cumulative.attempts[k]);
    };
    for (std::size_t i = 1; i + 1 < replicas.size(); ++i) {
        bool seen_lo = false;
        bool seen_hi = false;
        auto const r_lo = pair_rate(i - 1, seen_lo);
        auto const r_hi = pair_rate(i, seen_hi);
        auto const seen = int { seen_lo } + int { seen_hi };
        if (seen == 0) {
            continue;
        }
        auto const rate = (r_lo + r_hi) / seen;
        auto const lo = std::log(replicas[i - 1].temperature.value());
        auto const hi = std::log(replicas[i + 1].temperature.value());
        auto const cur = std::log(replicas[i].temperature.value());
        auto const mid = 0.5 * (lo + hi);
        auto next = cur;
        if (rate < spec.accept_lo) {
            next = cur + adapt_step * (mid - cur);
        } else if (rate > spec.accept_hi) {
            next = cur - adapt_step * (mid - cur);
        } else {
            continue;
        }
        auto const margin = 0.01 * (hi - lo);
        next = std::clamp(next, lo + margin, hi - margin);
        replicas[i].temperature = Temperature { std::exp(next) };
    }
}

// ---------------------------------------------------------------------------
// run loop

struct RunConfig {
    LadderSpec ladder {};
    int population_size { 10000 };
    DepthLimits limits {};
    int p_max { 20 };
    std::uint64_t seed { 1 };
    int max_generations { 400 };
    double threshold_mse { 1e-9 };
    int swap_attempts { 1 };
    SwapPartner swap_partner { SwapPartner::Random };
    int workers { 0 }; // 0: hardware concurrency
    bool plant_exact { false }; // test hook: seed one replica with the exact LJ tree
    int plant_replica { 0 };    // ladder index that receives it, 0 = coldest
    std::string dataset; // path, used by the command-line front end

    void validate() const
    {
        ladder.validate();
        if (population_size < 1 || max_generations < 0 || swap_attempts < 0 || workers < 0) {
            throw std::invalid_argument("run config: counts must be non-negative and population_size >= 1");
        }
        if (!limits.valid()) {
            throw std::invalid_argument("run config: need 1 <= k_min <= k_max");
        }
        if (plant_replica < 0 || plant_replica >= ladder.n_replicas) {
            throw std::invalid_argument("run config: plant_replica must index a replica");
        }
        if (p_max < 0) {
            throw std::invalid_argument("run config: p_max must be non-negative");
        }
        if (!(threshold_mse >= 0)) {
            throw std::invalid_argument("run config: threshold_mse must be non-negative");
        }
    }

    [[nodiscard]] auto resolved_workers() const -> std::size_t
    {
        if (workers > 0) {
            return static_cast<std::size_t>(workers);
        }
        return std::max(1U, std::thread::hardware_concurrency());
    }
};

struct HistoryRow {
    std::size_t generation { 0 };
    double best_fitness_overall { worst_fitness };
    double best_mse_so_far { std::numeric_limits<double>::infinity() };
    std::size_t replica_index_of_best { 0 };
    double temperature_of_best { 0.0 };
    double swap_acceptance_rate { 0.0 };
    std::size_t pass_through_count { 0 };
    std::size_t crossover_count { 0 };
    std::size_t mutation_count { 0 };
    std::string best_tree_infix;
};

struct RunResult {
    ExprTree best_tree;
    std::string best_infix;
    double best_fitness { worst_fitness };
    std::size_t generation_found { 0 };
    std::size_t generations_run { 0 };
    bool converged { false };
    bool interrupted { false };
    std::vector<HistoryRow> history;
    SwapStats swaps;

    [[nodiscard]] auto best_mse() const noexcept -> double { return -best_fitness; }
};

struct RunHooks {
    std::function<void(HistoryRow const&)> on_row; // called as each row is recorded
    std::function<bool()> stop_requested;          // polled between generations
};

// The depth-4 Lennard-Jones form 4 * (R^-12 - R^-6) in reduced units.
inline auto exact_lj_tree() -> ExprTree
{
    auto const r = ExprTree::variable();
    return ExprTree::binary(OpKind::Mul, ExprTree::constant(4),
        ExprTree::binary(OpKind::Sub, ExprTree::binary(OpKind::Pow, r, ExprTree::constant(-12)),
            ExprTree::binary(OpKind::Pow, r, ExprTree::constant(-6))));
}

namespace detail {
    inline constexpr std::uint64_t controller_stream = 0xC0'47'0011ULL;
    inline constexpr std::uint64_t init_stream = 0x1417ULL;
} // namespace detail

// Replica r steps with Rng::derive(seed, r); swaps use a separate controller
// stream. The result is a function of (config, dataset) only.
inline auto run(RunConfig const& config, Dataset const& dataset, RunHooks const& hooks = {}) -> RunResult
{
    config.validate();
    Executor const executor(config.resolved_workers());
    FitnessEvaluator const evaluator(dataset);
    std::vector<FitnessEvaluator::Workspace> workspaces(executor.workers());

    VariationParams params;
    params.limits = config.limits;
    params.p_max = config.p_max;

    auto const temps = ladder(config.ladder);
    auto const n_rep = temps.size();
    auto const n_pop = static_cast<std::size_t>(config.population_size);

    std::vector<Replica> replicas;
    replicas.reserve(n_rep);
    for (std::size_t r = 0; r < n_rep; ++r) {
        Replica rep { {}, temps[r], Rng::derive(config.seed, r) };
        rep.population.trees.resize(n_pop);
        rep.population.fitness.resize(n_pop, worst_fitness);
        replicas.push_back(std::move(rep));
    }

    auto const init_key = derive_key(config.seed, detail::init_stream);
    executor.parallel_for(n_rep * n_pop, [&](std::size_t idx, std::size_t w) {
        auto const r = idx / n_pop;
        auto const s = idx % n_pop;
        auto rng = Rng::derive(derive_key(init_key, r), s);
        auto& pop = replicas[r].population;
        pop.trees[s] = random_tree(config.limits, config.p_max, rng);
        pop.fitness[s] = evaluator.fitness(pop.trees[s], workspaces[w]);
    });
    if (config.plant_exact) {
        auto& pop = replicas[static_cast<std::size_t>(config.plant_replica)].population;
        pop.trees[0] = exact_lj_tree();
        pop.fitness[0] = evaluator.fitness(pop.trees[0], workspaces[0]);
    }
    for (auto& rep : replicas) {
        rep.population.sort();
    }

    RunResult result;
    result.swaps = SwapStats(n_rep - 1);
    auto controller = Rng::derive(config.seed, detail::controller_stream);

    auto record = [&](std::size_t generation, GenerationStats const& gen, SwapStats const& swaps) {
        std::size_t best_rep = 0;
        for (std::size_t r = 1; r < n_rep; ++r) {
            if (replicas[r].population.fitness.front() > replicas[best_rep].population.fitness.front()) {
                best_rep = r;
            }
        }
        auto const& leader = replicas[best_rep].population;
        if (generation == 0 || leader.fitness.front() > result.best_fitness) {
            result.best_tree = leader.trees.front();
            result.best_fitness = leader.fitness.front();
            result.best_infix = to_infix(result.best_tree);
            result.generation_found = generation;
        }
        HistoryRow row;
        row.generation = generation;
        row.best_fitness_overall = leader.fitness.front();
        row.best_mse_so_far = result.best_mse();
        row.replica_index_of_best = best_rep;
        row.temperature_of_best = replicas[best_rep].temperature.value();
        row.swap_acceptance_rate = swaps.rate();
        row.pass_through_count = gen.pass_throughs;
        row.crossover_count = gen.crossovers;
        row.mutation_count = gen.mutations;
        row.best_tree_infix = result.best_infix;
        result.history.push_back(row);
        if (hooks.on_row) {
            hooks.on_row(result.history.back());
        }
    };

    auto converged = [&] { return result.best_mse() <= config.threshold_mse; };

    record(0, GenerationStats {}, SwapStats {});
    std::vector<GenerationPlan> plans(n_rep);
    std::vector<std::vector<SlotOutcome>> outcomes(n_rep, std::vector<SlotOutcome>(n_pop));

    std::size_t generation = 0;
    while (!converged() && generation < static_cast<std::size_t>(config.max_generations)) {
        if (hooks.stop_requested && hooks.stop_requested()) {
            result.interrupted = true;
            break;
        }
        ++generation;
        for (std::size_t r = 0; r < n_rep; ++r) {
            plans[r] = plan_generation(replicas[r].population, params, replicas[r].rng());
        }
        executor.parallel_for(n_rep * n_pop, [&](std::size_t idx, std::size_t w) {
            auto const r = idx / n_pop;
            auto const s = idx % n_pop;
            outcomes[r][s] = run_slot(replicas[r].population, plans[r], s, replicas[r].temperature, params, evaluator,
                workspaces[w]);
        });
        GenerationStats gen;
        for (std::size_t r = 0; r < n_rep; ++r) {
            auto stepped = commit_generation(replicas[r].population, plans[r], outcomes[r]);
            replicas[r].population = std::move(stepped.population);
            gen += stepped.stats;
        }
        auto const swaps = swap_stage(replicas, controller, config.swap_partner, config.swap_attempts);
        result.swaps += swaps;
        adapt_temperatures(replicas, result.swaps, config.ladder);
        record(generation, gen, swaps);
    }

    result.generations_run = generation;
    result.converged = converged();
    return result;
}

} // namespace ffgp

#endif
