#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "membrane/functions.hpp"

namespace membrane {

enum class Side { Left = 1, Membrane = 0, Right = 2 };

const char* to_string(Side s);

struct SideSpec {
  CoefficientField drift;      // a_i
  CoefficientField diffusion;  // b_i
  double holder_exponent = 0.5;
  // Declared bounds b <= b_i <= B; when absent the sampled extrema are used.
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
};

struct Atom {
  TimeFunction position;  // y(s), never equal to h(s)
  TimeFunction weight;    // w(s) >= 0
};

struct WentzellData {
  TimeFunction q1;
  TimeFunction q2;
  std::vector<Atom> atoms;
};

struct ValidationGrid {
  int resolution = 64;
  double x_min = -5.0;
  double x_max = 5.0;
};

class Problem {
 public:
  SideSpec left;
  SideSpec right;
  TimeFunction membrane;
  WentzellData wentzell;
  double horizon = 1.0;
  ValidationGrid grid;
  double tol_mem = 1e-12;  // relative: tolerance is tol_mem * (1 + |h(s)|)

  // i = 1 (left) or 2 (right)
  const SideSpec& side(int i) const { return i == 1 ? left : right; }
  double a(int i, double s, double x) const { return side(i).drift(s, x); }
  double b(int i, double s, double x) const { return side(i).diffusion(s, x); }
  double h(double s) const { return membrane(s); }
  double q(int i, double s) const { return i == 1 ? wentzell.q1(s) : wentzell.q2(s); }

  // Side of an atom at time s.
  int atom_side(const Atom& atom, double s) const { return atom.position(s) < h(s) ? 1 : 2; }
  bool has_atoms() const { return !wentzell.atoms.empty(); }

  // d_i(s) = b_i sqrt(b_{3-i}) / (q1 sqrt(b2) + q2 sqrt(b1)), b evaluated at (s, h(s)).
  double d(int i, double s) const;
  // l_j(s) = q_j sqrt(b_{3-j}) / (q1 sqrt(b2) + q2 sqrt(b1)).
  double l(int j, double s) const;

  double membrane_tolerance(double s) const { return tol_mem * (1.0 + std::abs(h(s))); }

  // Sampled diffusion bounds over both sides on the validation grid (declared bounds widen them).
  double lower_diffusion_bound() const;
  double upper_diffusion_bound() const;
  double upper_diffusion_bound(int i) const;
  double lower_diffusion_bound(int i) const;
  double holder_exponent() const;
  // Half the minimal distance of any atom to the membrane over [0, T]; +inf when there are no atoms.
  double atom_delta() const;

  bool constant_side(int i) const { return side(i).drift.is_constant() && side(i).diffusion.is_constant(); }
};

Side side_of(const Problem& p, double s, double x);
Side side_of(const Problem& p, double s, double x, double tol_mem_abs);

struct ConditionResult {
  std::string condition;  // "I" .. "V"
  std::string description;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  double b = 0.0;
  double B = 0.0;
  double q0 = 0.0;
  double holder_a = 0.0;  // max sampled Hoelder quotients of the coefficients
  double holder_b = 0.0;
  double holder_h = 0.0;
  double max_moment = 0.0;  // max over s of sum |y - h| w
  bool pass() const;
};

// Throws NonparabolicCoefficient, DegenerateWentzell or AtomOnMembrane on hard failures.
ValidationReport validate(const Problem& p, int grid_resolution);
ValidationReport validate(const Problem& p, int grid_resolution, const InitialFunction& phi);

}  // namespace membrane
