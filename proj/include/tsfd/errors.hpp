#pragma once

#include <stdexcept>

namespace tsfd {

// Input lies outside the domain of a concave shape function (f or g).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An item group's merit is <= 0; the disparate-treatment ratio is undefined.
struct MeritNonPositive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact-search operation invoked beyond its size limits.
struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested item-fairness constraints admit no doubly stochastic matrix.
struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The residual of a BvN decomposition lost its perfect matching; the input
// matrix was not doubly stochastic within tolerance.
struct DecompositionStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No top-l matching of an exhaustive search extends to a perfect matching.
struct NoCompletion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoPerfectMatching : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tsfd
