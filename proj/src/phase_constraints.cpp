#include "risbeam/phase_constraints.hpp"

#include <cmath>
#include <limits>

namespace risbeam {

namespace {

double wrapped_distance(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

double phase_of(cplx w) {
  double p = std::arg(w);
  return p < 0.0 ? p + 2.0 * kPi : p;
}

}  // namespace

PhaseAlphabet alphabet(int levels) {
  if (levels < 2) throw std::invalid_argument("alphabet: levels must be >= 2");
  PhaseAlphabet a;
  a.levels = levels;
  for (int l = 0; l < levels; ++l) {
    const double phase = 2.0 * kPi * l / levels + kPi / levels;
    a.phases.push_back(phase);
    a.values.push_back(std::polar(1.0, phase));
  }
  return a;
}

double FeasibleRegion::violation(cplx w) const {
  double worst = 0.0;
  for (const auto& hp : halfplanes) worst = std::max(worst, (std::conj(hp.normal) * w).real() - hp.offset);
  return worst;
}

const PolygonVertex& FeasibleRegion::nearest_vertex(cplx w) const {
  const double p = std::arg(w);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const double d = wrapped_distance(p, std::arg(vertices[k].point));
    if (d < best_d - 1e-12) {
      best_d = d;
      best = k;
    }
  }
  return vertices[best];
}

FeasibleRegion hull_halfplanes(const PhaseAlphabet& alphabet) {
  const int L = alphabet.levels;
  FeasibleRegion r;
  r.kind = RegionKind::DiscreteHull;
  if (L == 2) {
    r.halfplanes = {{{1.0, 0.0}, 0.0}, {{-1.0, 0.0}, 0.0}, {{0.0, 1.0}, 1.0}, {{0.0, -1.0}, 1.0}};
    r.vertices = {{alphabet.values[0], 0, 2}, {alphabet.values[1], 0, 3}};
    return r;
  }
  const double offset = std::cos(kPi / L);
  for (int m = 0; m < L; ++m) r.halfplanes.push_back({std::polar(1.0, 2.0 * kPi * m / L), offset});
  // Alphabet value l sits between the edges with normals m = l and m = l + 1.
  for (int l = 0; l < L; ++l) r.vertices.push_back({alphabet.values[l], l, (l + 1) % L});
  return r;
}

FeasibleRegion disc_polygon(RegionKind kind, int sides) {
  if (sides < 3) throw std::invalid_argument("disc polygon: needs at least 3 sides");
  FeasibleRegion r;
  r.kind = kind;
  const double offset = std::cos(kPi / sides);
  for (int m = 0; m < sides; ++m) r.halfplanes.push_back({std::polar(1.0, (2.0 * m + 1.0) * kPi / sides), offset});
  // Vertex k = exp(j 2 pi k / sides) lies on edges k - 1 and k.
  for (int k = 0; k < sides; ++k) r.vertices.push_back({std::polar(1.0, 2.0 * kPi * k / sides), (k + sides - 1) % sides, k});
  return r;
}

FeasibleRegion region_for(ConstraintMode mode, const PhaseAlphabet& alphabet) {
  switch (mode) {
    case ConstraintMode::Discrete:
    case ConstraintMode::Hull:
      return hull_halfplanes(alphabet);
    case ConstraintMode::ConstantModulus:
      return disc_polygon(RegionKind::ConstantModulus);
    case ConstraintMode::Power:
      return disc_polygon(RegionKind::PerElementPower);
  }
  throw std::invalid_argument("unknown constraint mode");
}

int project_discrete_index(cplx w, const PhaseAlphabet& alphabet) {
  if (w == cplx{0.0, 0.0}) throw std::domain_error("project_discrete: phase of zero is undefined");
  const double p = phase_of(w);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int l = 0; l < alphabet.levels; ++l) {
    const double d = wrapped_distance(p, alphabet.phases[l]);
    if (d < best_d - 1e-12) {
      best_d = d;
      best = l;
    }
  }
  return best;
}

cplx project_discrete(cplx w, const PhaseAlphabet& alphabet) {
  return alphabet.values[project_discrete_index(w, alphabet)];
}

cplx project_cmc(cplx w) {
  const double r = std::abs(w);
  if (r == 0.0) throw std::domain_error("project_cmc: phase of zero is undefined");
  return w / r;
}

CVector project(const CVector& w, ConstraintMode mode, const PhaseAlphabet& alphabet) {
  CVector out = w;
  switch (mode) {
    case ConstraintMode::Discrete:
      for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = project_discrete(w[i], alphabet);
      break;
    case ConstraintMode::ConstantModulus:
      for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = project_cmc(w[i]);
      break;
    case ConstraintMode::Hull:
    case ConstraintMode::Power:
      break;
  }
  return out;
}

const char* to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::Discrete: return "discrete";
    case ConstraintMode::Hull: return "hull";
    case ConstraintMode::ConstantModulus: return "cmc";
    case ConstraintMode::Power: return "power";
  }
  return "?";
}

ConstraintMode parse_mode(const std::string& text) {
  if (text == "discrete") return ConstraintMode::Discrete;
  if (text == "hull") return ConstraintMode::Hull;
  if (text == "cmc") return ConstraintMode::ConstantModulus;
  if (text == "power") return ConstraintMode::Power;
  throw std::invalid_argument("mode: expected one of discrete|cmc|power|hull, got '" + text + "'");
}

}  // namespace risbeam
