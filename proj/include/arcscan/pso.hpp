#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arcscan/parallel.hpp"
#include "arcscan/rng.hpp"

namespace arcscan::pso {

// Swarm parameters. Defaults follow the experimental setup: inertia 0.5,
// cognitive 1, social 3, 80 iterations; swarm size 30 is this library's
// default since the source protocol leaves it open. The velocity clamp is
// an addition that keeps the aggressive social coefficient from diverging.
struct PsoConfig {
  int swarm_size = 30;
  int iterations = 80;
  double inertia = 0.5;
  double cognitive = 1.0;
  double social = 3.0;
  int dims = 1;
  int value_min = 0;
  int value_max = 179;
  std::uint64_t seed = 0;
  double velocity_clamp = 0.25;  // fraction of range width per component

  void validate() const {
    if (swarm_size < 2) throw std::invalid_argument("pso: swarm_size must be >= 2");
    if (iterations < 1) throw std::invalid_argument("pso: iterations must be >= 1");
    if (inertia < 0 || cognitive < 0 || social < 0)
      throw std::invalid_argument("pso: coefficients must be >= 0");
    if (dims < 1) throw std::invalid_argument("pso: dims must be >= 1");
    if (value_max < value_min) throw std::invalid_argument("pso: empty value range");
    if (dims > value_max - value_min + 1)
      throw std::invalid_argument(
          "pso: dims exceed the number of distinct indices in range");
  }
};

struct Particle {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd best_position;
  double best_fitness = -std::numeric_limits<double>::infinity();
};

struct SwarmResult {
  std::vector<int> best_indices;
  double best_fitness = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_position;
  std::vector<double> history;  // gbest fitness after each iteration
};

// v <- w v + c1 r1 (pbest - p) + c2 r2 (gbest - p), componentwise clamped.
// r1, r2 are scalars drawn once per particle per update.
inline Eigen::VectorXd step_velocity(const Particle& p,
                                     const Eigen::VectorXd& gbest_position,
                                     const PsoConfig& cfg, double r1, double r2) {
  Eigen::VectorXd v = cfg.inertia * p.velocity +
                      cfg.cognitive * r1 * (p.best_position - p.position) +
                      cfg.social * r2 * (gbest_position - p.position);
  const double vmax = cfg.velocity_clamp *
                      static_cast<double>(cfg.value_max - cfg.value_min);
  return v.cwiseMax(-vmax).cwiseMin(vmax);
}

// Rounds to nearest integers in [value_min, value_max]; duplicates move to
// the nearest unused integer (smallest displacement from the real
// coordinate, ties toward the lower index). Sorted, duplicate-free output.
inline std::vector<int> discretize(std::span<const double> position,
                                   int value_min, int value_max) {
  const int dims = static_cast<int>(position.size());
  const int width = value_max - value_min + 1;
  if (dims > width)
    throw std::invalid_argument(
        "discretize: cannot produce " + std::to_string(dims) +
        " distinct indices in a range of " + std::to_string(width));
  std::vector<std::uint8_t> taken(width, 0);
  std::vector<int> out(dims);
  for (int i = 0; i < dims; ++i) {
    const double x = position[i];
    int v = static_cast<int>(std::lround(x));
    v = std::clamp(v, value_min, value_max);
    if (!taken[v - value_min]) {
      taken[v - value_min] = 1;
      out[i] = v;
      continue;
    }
    int below = v - 1, above = v + 1;
    while (below >= value_min && taken[below - value_min]) --below;
    while (above <= value_max && taken[above - value_min]) ++above;
    int pick;
    if (below < value_min)
      pick = above;
    else if (above > value_max)
      pick = below;
    else
      pick = std::abs(x - below) <= std::abs(x - above) ? below : above;
    taken[pick - value_min] = 1;
    out[i] = pick;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Synchronous PSO: all particles of an iteration are evaluated against the
// same pbest/gbest state, updates are then applied in particle-index
// order, so results are independent of evaluation scheduling.
template <class Fitness>
SwarmResult optimize(const PsoConfig& cfg, Fitness&& fitness, int eval_threads = 1) {
  cfg.validate();
  auto gen = rng::engine(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = cfg.value_min, hi = cfg.value_max;

  std::vector<Particle> swarm(cfg.swarm_size);
  for (Particle& p : swarm) {
    p.position.resize(cfg.dims);
    for (int d = 0; d < cfg.dims; ++d) p.position(d) = lo + unit(gen) * (hi - lo);
    p.velocity = Eigen::VectorXd::Zero(cfg.dims);
    p.best_position = p.position;
  }

  SwarmResult result;
  result.history.reserve(cfg.iterations);
  std::vector<std::vector<int>> indices(cfg.swarm_size);
  std::vector<double> fit(cfg.swarm_size);

  for (int it = 0; it < cfg.iterations; ++it) {
    parallel_for(cfg.swarm_size, eval_threads, [&](int k) {
      indices[k] = discretize(
          std::span<const double>(swarm[k].position.data(), cfg.dims),
          cfg.value_min, cfg.value_max);
      double f;
      try {
        f = fitness(std::span<const int>(indices[k]));
      } catch (const std::exception& e) {
        throw std::runtime_error("pso: fitness evaluation failed at iteration " +
                                 std::to_string(it) + ", particle " +
                                 std::to_string(k) + ": " + e.what());
      }
      if (std::isnan(f))
        throw std::runtime_error("pso: fitness returned NaN at iteration " +
                                 std::to_string(it) + ", particle " +
                                 std::to_string(k));
      fit[k] = f;
    });

    // strict improvement; ties keep the incumbent
    for (int k = 0; k < cfg.swarm_size; ++k) {
      if (fit[k] > swarm[k].best_fitness) {
        swarm[k].best_fitness = fit[k];
        swarm[k].best_position = swarm[k].position;
      }
      if (fit[k] > result.best_fitness) {
        result.best_fitness = fit[k];
        result.best_position = swarm[k].position;
        result.best_indices = indices[k];
      }
    }

    for (Particle& p : swarm) {
      const double r1 = unit(gen), r2 = unit(gen);
      p.velocity = step_velocity(p, result.best_position, cfg, r1, r2);
      p.position += p.velocity;
      p.position = p.position.cwiseMax(lo).cwiseMin(hi);
    }
    result.history.push_back(result.best_fitness);
  }
  return result;
}

}  // namespace arcscan::pso
