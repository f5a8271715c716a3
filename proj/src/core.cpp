#include "kepreg/core.hpp"

#include <random>

namespace kepreg {

std::string to_string(DomainReason reason) {
  switch (reason) {
    case DomainReason::invalid_argument: return "invalid_argument";
    case DomainReason::collision_point: return "collision_point";
    case DomainReason::nonnegative_energy: return "nonnegative_energy";
    case DomainReason::north_pole_fiber: return "north_pole_fiber";
    case DomainReason::zero_covector: return "zero_covector";
    case DomainReason::constraint_violated: return "constraint_violated";
    case DomainReason::landed_on_collision: return "landed_on_collision";
    case DomainReason::collision_approach: return "collision_approach";
    case DomainReason::sampling_exhausted: return "sampling_exhausted";
    case DomainReason::stencil: return "stencil";
  }
  return "unknown";
}

void Tolerances::validate() const {
  if (!(constraint_tol > 0.0) || !(fd_step > 0.0) || !(root_tol > 0.0) || !(ode_tol > 0.0)) {
    throw DomainError(DomainReason::invalid_argument, "tolerances must be strictly positive");
  }
}

namespace {

template <typename Accept>
std::vector<PhasePoint<double>> rejection_sample(Index n, Index count, std::uint64_t seed,
                                                 const SampleBox& box, Accept accept) {
  if (n < 1 || count < 1) {
    throw DomainError(DomainReason::invalid_argument, "sampling needs n >= 1 and count >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<PhasePoint<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  const Index cap = 10000 * count + 100000;
  for (Index attempt = 0; attempt < cap && static_cast<Index>(out.size()) < count; ++attempt) {
    VectorX<double> q(n), p(n);
    for (Index k = 0; k < n; ++k) q(k) = box.q_half_width * unit(rng);
    for (Index k = 0; k < n; ++k) p(k) = box.p_half_width * unit(rng);
    if (q.norm() < box.min_radius) continue;
    PhasePoint<double> candidate(std::move(q), std::move(p));
    if (accept(candidate)) out.push_back(std::move(candidate));
  }
  if (static_cast<Index>(out.size()) < count) {
    throw DomainError(DomainReason::sampling_exhausted,
                      "rejection sampling cap reached; check the sampling box");
  }
  return out;
}

}  // namespace

std::vector<PhasePoint<double>> sample_P_minus(Index n, Index count, std::uint64_t seed,
                                               const SampleBox& box) {
  return rejection_sample(n, count, seed, box, [&](const PhasePoint<double>& pt) {
    return kepler_energy(pt) <= box.max_energy;
  });
}

std::vector<PhasePoint<double>> sample_punctured(Index n, Index count, std::uint64_t seed,
                                                 const SampleBox& box) {
  return rejection_sample(n, count, seed, box, [](const PhasePoint<double>&) { return true; });
}

}  // namespace kepreg
