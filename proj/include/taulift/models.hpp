#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "taulift/opsymbol.hpp"
#include "taulift/solver.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

enum class Hierarchy { KP, BKP };

// One-point data of a model. For KP models these are Psi and Psi*; for B-type
// models psi is Psi^B (constant term 1/2) and psi_star is the companion
// Psi~^B (top term -z).
struct OnePoints {
  ZSeries psi;
  ZSeries psi_star;
};

struct ModelSpec {
  std::string name;
  Hierarchy hierarchy = Hierarchy::KP;
  std::map<std::string, Rat> params;

  // The lifting operator l; for B-type models already anti-symmetrized.
  OpSymbol lifting;

  // Series to at least z^{-depth}; always defined.
  std::function<OnePoints(int depth, int ht)> one_points;

  // Closed-form affine coordinates b_{n,m} (KP) / a_{n,m} (BKP), when known.
  std::function<HScalar(int n, int m, int ht)> known_affine;

  // Closed evaluation of the two-point function on the solver's window,
  // when the model has one (quantum-curve based families).
  std::function<BiSeries(int N, int ht)> closed_two_point;

  bool has_known_affine() const { return static_cast<bool>(known_affine); }
  bool has_closed_two_point() const { return static_cast<bool>(closed_two_point); }
};

std::vector<std::string> model_names();
ModelSpec model_instantiate(const std::string& name, const std::map<std::string, Rat>& params);

}  // namespace taulift
