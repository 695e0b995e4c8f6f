#include "ctrcac/pso.hpp"

#include <future>
#include <random>

namespace ctrcac {

void SearchSpace::validate() const {
    for (int i = 0; i < 2; ++i) {
        if (!(lower(i) < upper(i))) throw ConfigError("search bounds must satisfy lower < upper");
    }
}

Vector2d SearchSpace::clamp(const Vector2d& p) const {
    return p.cwiseMax(lower).cwiseMin(upper);
}

bool SearchSpace::contains(const Vector2d& p) const {
    return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
}

void SwarmConfig::validate() const {
    if (swarm_size < 2) throw ConfigError("swarm size must be at least 2");
    if (iterations < 1) throw ConfigError("iteration count must be positive");
    if (!(inertia > 0.0 && inertia < 1.0)) throw ConfigError("inertia must lie in (0, 1)");
    if (!(cognitive > 0.0 && social > 0.0)) {
        throw ConfigError("cognitive and social weights must be positive");
    }
}

namespace {

// Canonical uniform in [0, 1); independent of the standard library's
// distribution implementation so runs reproduce across toolchains.
double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::vector<double> evaluate_all(const std::function<double(const Vector2d&)>& objective,
                                 const std::vector<Particle>& swarm, bool parallel) {
    std::vector<double> scores(swarm.size());
    if (parallel) {
        std::vector<std::future<double>> futures;
        futures.reserve(swarm.size());
        for (const auto& p : swarm) {
            futures.push_back(
                std::async(std::launch::async, [&objective, pos = p.position] { return objective(pos); }));
        }
        for (size_t i = 0; i < futures.size(); ++i) scores[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < swarm.size(); ++i) scores[i] = objective(swarm[i].position);
    }
    return scores;
}

} // namespace

PsoResult pso_optimize(const std::function<double(const Vector2d&)>& objective,
                       const SearchSpace& space, const SwarmConfig& cfg) {
    space.validate();
    cfg.validate();

    std::mt19937_64 gen(cfg.seed);
    std::vector<Particle> swarm(static_cast<size_t>(cfg.swarm_size));
    for (auto& p : swarm) {
        for (int i = 0; i < 2; ++i) {
            p.position(i) = space.lower(i) + (space.upper(i) - space.lower(i)) * uniform01(gen);
        }
        p.velocity.setZero();
    }

    PsoResult result;
    auto record = [&](int iteration, const std::vector<double>& scores) {
        // Reduce in particle order regardless of evaluation order.
        for (size_t i = 0; i < swarm.size(); ++i) {
            auto& p = swarm[i];
            if (scores[i] < p.best_score) {
                p.best_score = scores[i];
                p.best_position = p.position;
            }
            if (scores[i] < result.best_score) {
                result.best_score = scores[i];
                result.best_position = p.position;
            }
        }
        for (size_t i = 0; i < swarm.size(); ++i) {
            result.history.push_back(SwarmSample{iteration, static_cast<int>(i),
                                                 swarm[i].position, scores[i],
                                                 result.best_score});
        }
    };

    record(0, evaluate_all(objective, swarm, cfg.parallel));

    for (int it = 1; it <= cfg.iterations; ++it) {
        for (auto& p : swarm) {
            Vector2d rho_c, rho_s;
            for (int i = 0; i < 2; ++i) rho_c(i) = uniform01(gen);
            for (int i = 0; i < 2; ++i) rho_s(i) = uniform01(gen);
            p.velocity = cfg.inertia * p.velocity +
                         cfg.cognitive * rho_c.cwiseProduct(p.best_position - p.position) +
                         cfg.social * rho_s.cwiseProduct(result.best_position - p.position);
            p.position = space.clamp(p.position + p.velocity);
        }
        record(it, evaluate_all(objective, swarm, cfg.parallel));
    }
    return result;
}

} // namespace ctrcac
