// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The ffgp authors

#ifndef FFGP_ENGINE_HPP
#define FFGP_ENGINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "expr.hpp"
#include "fitness.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace ffgp {

// Metropolis temperature, in the units of fitness (epsilon^2).
class Temperature {
public:
    explicit Temperature(double value)
        : value_(value)
    {
        if (!(value > 0) || !std::isfinite(value)) {
            throw std::invalid_argument("temperature must be positive and finite");
        }
    }

    [[nodiscard]] auto value() const noexcept -> double { return value_; }
    [[nodiscard]] auto beta() const noexcept -> double { return 1.0 / value_; }

    friend auto operator<=>(Temperature, Temperature) = default;

private:
    double value_;
};

// Trees with cached fitness, kept sorted best first.
struct Population {
    std::vector<ExprTree> trees;
    std::vector<double> fitness;

    [[nodiscard]] auto size() const noexcept -> std::size_t { return trees.size(); }

    // Fitness descending, then fewer nodes, then previous order.
    [[nodiscard]] static auto ranks_before(double fa, std::size_t na, double fb, std::size_t nb) noexcept -> bool
    {
        if (fa != fb) {
            return fa > fb;
        }
        return na < nb;
    }

    void sort()
    {
        std::vector<std::size_t> order(trees.size());
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            return ranks_before(fitness[a], trees[a].size(), fitness[b], trees[b].size());
        });
        std::vector<ExprTree> t;
        std::vector<double> f;
        t.reserve(order.size());
        f.reserve(order.size());
        for (auto i : order) {
            t.push_back(std::move(trees[i]));
            f.push_back(fitness[i]);
        }
        trees = std::move(t);
        fitness = std::move(f);
    }

    [[nodiscard]] auto is_sorted() const -> bool
    {
        for (std::size_t i = 1; i < trees.size(); ++i) {
            if (ranks_before(fitness[i], trees[i].size(), fitness[i - 1], trees[i - 1].size())) {
                return false;
            }
        }
        return true;
    }
};

struct VariationParams {
    DepthLimits limits {};
    int p_max { 20 };
    double pass_through_probability { 0.5 };
    double mutation_probability { 0.5 };
    int tournament_size { 4 };
};

// How a candidate tree came to be.
enum class Origin : std::uint8_t { CrossoverOnly, CrossoverMutated, MutationOnly, Unchanged };

struct GenerationStats {
    std::size_t pass_throughs { 0 };
    std::size_t crossovers { 0 };
    std::size_t mutations { 0 };
    std::size_t acceptances { 0 };
    std::array<std::size_t, 4> origins {}; // indexed by Origin
    double best_before { worst_fitness };
    double best_after { worst_fitness };

    auto operator+=(GenerationStats const& o) -> GenerationStats&
    {
        pass_throughs += o.pass_throughs;
        crossovers += o.crossovers;
        mutations += o.mutations;
        acceptances += o.acceptances;
        for (std::size_t k = 0; k < origins.size(); ++k) {
            origins[k] += o.origins[k];
        }
        best_before = std::max(best_before, o.best_before);
        best_after = std::max(best_after, o.best_after);
        return *this;
    }
};

// Fittest of `rounds` uniform draws with replacement; among equal fitness
// the earliest draw wins, so ties are resolved uniformly.
inline auto tournament_select(Population const& pop, Rng& rng, int rounds = 4) -> std::size_t
{
    auto best = static_cast<std::size_t>(rng.uniform_index(pop.size()));
    for (int k = 1; k < rounds; ++k) {
        auto const i = static_cast<std::size_t>(rng.uniform_index(pop.size()));
        if (pop.fitness[i] > pop.fitness[best]) {
            best = i;
        }
    }
    return best;
}

// P = min(1, exp(beta (f_new - f_old))). A -inf candidate is never accepted;
// a finite candidate always replaces a -inf incumbent.
inline auto metropolis_probability(double f_new, double f_old, Temperature t) noexcept -> double
{
    if (f_new == worst_fitness) {
        return 0.0;
    }
    if (f_old == worst_fitness || f_new >= f_old) {
        return 1.0;
    }
    return std::exp(t.beta() * (f_new - f_old));
}

inline auto metropolis_accept(double f_new, double f_old, Temperature t, Rng& rng) -> bool
{
    auto const p = metropolis_probability(f_new, f_old, t);
    if (p >= 1.0) {
        return true;
    }
    if (p <= 0.0) {
        return false;
    }
    return rng.uniform01() < p;
}

// ---------------------------------------------------------------------------
// One generation, split into phases so that many replicas can share a
// parallel loop over (replica, slot). Slot i draws all its randomness from
// Rng::derive(plan.key, i); the pass-through cursor is the only sequential
// dependency and is resolved up front.

struct SlotPlan {
    bool pass_through { false };
    std::size_t source { 0 }; // old index copied by a pass-through
};

struct GenerationPlan {
    std::uint64_t key { 0 };
    std::vector<SlotPlan> slots;
};

struct SlotOutcome {
    ExprTree tree;
    double fitness { worst_fitness };
    Origin origin { Origin::Unchanged };
    bool accepted { false };
};

inline auto plan_generation(Population const& pop, VariationParams const& params, std::uint64_t key) -> GenerationPlan
{
    GenerationPlan plan { key, std::vector<SlotPlan>(pop.size()) };
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        auto rng = Rng::derive(key, i);
        if (rng.bernoulli(params.pass_through_probability) && cursor < pop.size()) {
            plan.slots[i] = { true, cursor++ };
        }
    }
    return plan;
}

namespace detail {
    // Replays slot i's stream past the coin consumed by plan_generation.
    inline auto slot_stream(GenerationPlan const& plan, std::size_t i) -> Rng
    {
        auto rng = Rng::derive(plan.key, i);
        rng.uniform01();
        return rng;
    }

    inline auto create_candidate(Population const& pop, SlotPlan const& slot, VariationParams const& params, Rng& rng)
        -> ExprTree
    {
        if (slot.pass_through) {
            return pop.trees[slot.source];
        }
        auto const a = tournament_select(pop, rng, params.tournament_size);
        auto const b = tournament_select(pop, rng, params.tournament_size);
        return crossover(pop.trees[a], pop.trees[b], params.limits, rng);
    }
} // namespace detail

struct GenerationResult {
    std::vector<ExprTree> trees;
    std::vector<bool> passed_through;
};

// Pass-through or crossover per slot with a fair coin; pass-throughs copy the
// fittest not yet copied old tree, crossover once every old tree has been copied.
inline auto generation_stage(Population const& pop, VariationParams const& params, Rng& rng) -> GenerationResult
{
    auto const plan = plan_generation(pop, params, rng());
    GenerationResult out;
    out.trees.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        auto slot_rng = detail::slot_stream(plan, i);
        out.trees.push_back(detail::create_candidate(pop, plan.slots[i], params, slot_rng));
        out.passed_through.push_back(plan.slots[i].pass_through);
    }
    return out;
}

// Each tree is mutated with probability params.mutation_probability.
inline auto mutation_stage(std::vector<ExprTree> trees, VariationParams const& params, Rng& rng,
    std::size_t* mutated = nullptr) -> std::vector<ExprTree>
{
    auto const key = rng();
    std::size_t count = 0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        auto slot_rng = Rng::derive(key, i);
        if (slot_rng.bernoulli(params.mutation_probability)) {
            trees[i] = mutate(trees[i], params.limits, params.p_max, slot_rng);
            ++count;
        }
    }
    if (mutated != nullptr) {
        *mutated = count;
    }
    return trees;
}

inline auto run_slot(Population const& pop, GenerationPlan const& plan, std::size_t i, Temperature t,
    VariationParams const& params, FitnessEvaluator const& evaluator, FitnessEvaluator::Workspace& ws) -> SlotOutcome
{
    auto rng = detail::slot_stream(plan, i);
    auto const& slot = plan.slots[i];
    SlotOutcome out { detail::create_candidate(pop, slot, params, rng) };
    auto const mutated = rng.bernoulli(params.mutation_probability);
    if (mutated) {
        out.tree = mutate(out.tree, params.limits, params.p_max, rng);
    }
    if (slot.pass_through) {
        out.origin = mutated ? Origin::MutationOnly : Origin::Unchanged;
    } else {
        out.origin = mutated ? Origin::CrossoverMutated : Origin::CrossoverOnly;
    }
    // unchanged copies keep the cached fitness of their source
    out.fitness = out.origin == Origin::Unchanged ? pop.fitness[slot.source] : evaluator.fitness(out.tree, ws);
    out.accepted = metropolis_accept(out.fitness, pop.fitness[i], t, rng);
    return out;
}

struct StepResult {
    Population population;
    GenerationStats stats;
};

// Position-wise Metropolis: slot i's candidate competes with old tree i.
inline auto commit_generation(Population const& pop, GenerationPlan const& plan, std::vector<SlotOutcome>& outcomes)
    -> StepResult
{
    StepResult r;
    r.stats.best_before = pop.fitness.empty() ? worst_fitness : pop.fitness.front();
    r.population.trees.reserve(pop.size());
    r.population.fitness.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        auto& o = outcomes[i];
        if (plan.slots[i].pass_through) {
            ++r.stats.pass_throughs;
        } else {
            ++r.stats.crossovers;
        }
        if (o.origin == Origin::MutationOnly || o.origin == Origin::CrossoverMutated) {
            ++r.stats.mutations;
        }
        ++r.stats.origins[static_cast<std::size_t>(o.origin)];
        if (o.accepted) {
            ++r.stats.acceptances;
            r.population.trees.push_back(std::move(o.tree));
            r.population.fitness.push_back(o.fitness);
        } else {
            r.population.trees.push_back(pop.trees[i]);
            r.population.fitness.push_back(pop.fitness[i]);
        }
    }
    r.population.sort();
    r.stats.best_after = r.population.fitness.empty() ? worst_fitness : r.population.fitness.front();
    return r;
}

// Generation, mutation and testing stages for one replica.
inline auto step(Population const& pop, Temperature t, VariationParams const& params, FitnessEvaluator const& evaluator,
    Rng& rng, Executor const& executor = Executor {}) -> StepResult
{
    if (pop.size() == 0) {
        throw std::invalid_argument("step: empty population");
    }
    auto const plan = plan_generation(pop, params, rng());
    std::vector<SlotOutcome> outcomes(pop.size());
    std::vector<FitnessEvaluator::Workspace> ws(executor.workers());
    executor.parallel_for(pop.size(), [&](std::size_t i, std::size_t w) {
        outcomes[i] = run_slot(pop, plan, i, t, params, evaluator, ws[w]);
    });
    return commit_generation(pop, plan, outcomes);
}

} // namespace ffgp

#endif
