#pragma once

#include <vector>

#include "risbeam/common.hpp"

namespace risbeam {

// Number of sides of the inscribed polygon used for the unit disc.
inline constexpr int kDiscPolygonSides = 64;

// L unit-modulus levels exp(j(2 pi l / L + pi / L)), l = 0..L-1.
struct PhaseAlphabet {
  int levels = 0;
  std::vector<cplx> values;
  std::vector<double> phases;  // radians, ascending in [0, 2 pi)
};

PhaseAlphabet alphabet(int levels);

// How the weights are constrained during synthesis and what happens afterwards.
//   Discrete: hull of the alphabet, projected onto the alphabet at the end.
//   Hull:     hull of the alphabet, no projection.
//   ConstantModulus: unit disc, projected onto the unit circle at the end.
//   Power:    unit disc (|w| <= 1), no projection.
enum class ConstraintMode { Discrete, Hull, ConstantModulus, Power };

enum class RegionKind { DiscreteHull, ConstantModulus, PerElementPower };

// Re(conj(normal) * w) <= offset
struct HalfPlane {
  cplx normal;
  double offset;
};

// A polygon vertex together with two non-parallel edges that are tight there.
struct PolygonVertex {
  cplx point;
  int edge_a;
  int edge_b;
};

struct FeasibleRegion {
  RegionKind kind = RegionKind::DiscreteHull;
  std::vector<HalfPlane> halfplanes;
  std::vector<PolygonVertex> vertices;

  // Largest violation max(Re(conj(n) w) - offset, 0) over all half-planes.
  double violation(cplx w) const;
  bool contains(cplx w, double tol = 1e-9) const { return violation(w) <= tol; }
  // Vertex closest in phase to w (ties go to the lower vertex index).
  const PolygonVertex& nearest_vertex(cplx w) const;
};

// L >= 3: L half-planes with normals exp(j 2 pi m / L) and offset cos(pi / L).
// L == 2: the segment [-j, +j] as Re(w) <= 0, -Re(w) <= 0, |Im(w)| <= 1.
FeasibleRegion hull_halfplanes(const PhaseAlphabet& alphabet);

// Unit disc approximated by a regular polygon with vertices exp(j 2 pi k / sides).
FeasibleRegion disc_polygon(RegionKind kind, int sides = kDiscPolygonSides);

FeasibleRegion region_for(ConstraintMode mode, const PhaseAlphabet& alphabet);

// Index of the alphabet value with the smallest wrapped phase distance to w.
int project_discrete_index(cplx w, const PhaseAlphabet& alphabet);
cplx project_discrete(cplx w, const PhaseAlphabet& alphabet);
cplx project_cmc(cplx w);

// Elementwise projection according to the mode (identity for Hull and Power).
CVector project(const CVector& w, ConstraintMode mode, const PhaseAlphabet& alphabet);

const char* to_string(ConstraintMode mode);
ConstraintMode parse_mode(const std::string& text);

}  // namespace risbeam
