#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ctrcac/errors.hpp"

namespace ctrcac {

using Eigen::Vector2d;

/// Box bounds of the hyperparameter search: log10 of the initial covariance
/// scale and the adaptation filter pole.
struct SearchSpace {
    Vector2d lower{-4.0, 0.1};
    Vector2d upper{4.0, 10.0};

    void validate() const;
    Vector2d clamp(const Vector2d& p) const;
    bool contains(const Vector2d& p) const;
};

struct SwarmConfig {
    int swarm_size = 5;
    int iterations = 30;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    std::uint64_t seed = 0;
    bool parallel = true;

    void validate() const;
};

struct Particle {
    Vector2d position = Vector2d::Zero();
    Vector2d velocity = Vector2d::Zero();
    Vector2d best_position = Vector2d::Zero();
    double best_score = std::numeric_limits<double>::infinity();
};

/// One evaluated point in the swarm history.
struct SwarmSample {
    int iteration = 0; ///< 0 is the initial evaluation
    int particle = 0;
    Vector2d position = Vector2d::Zero();
    double score = 0.0;
    double best_score = 0.0; ///< global best after this iteration
};

struct PsoResult {
    Vector2d best_position = Vector2d::Zero();
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<SwarmSample> history;
};

/// Standard particle swarm search over the box. Positions are initialized
/// uniformly from the seeded generator, velocities start at zero, and
/// positions are clamped to the bounds after every move. Particle evaluations
/// within an iteration may run concurrently; scores are always reduced in
/// particle order so the result is independent of completion order.
PsoResult pso_optimize(const std::function<double(const Vector2d&)>& objective,
                       const SearchSpace& space, const SwarmConfig& cfg);

} // namespace ctrcac
