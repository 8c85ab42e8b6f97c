#include "risbeam/mm_synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "risbeam/parallel.hpp"
#include "risbeam/rng.hpp"

namespace risbeam {

namespace {

Interval parse_interval(const std::string& text) {
  const auto colon = text.find(':', 1);  // skip a leading minus sign
  if (colon == std::string::npos) throw std::invalid_argument("roi: malformed interval '" + text + "', expected lo:hi");
  Interval iv;
  try {
    std::size_t used = 0;
    iv.lo = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    const std::string rest = text.substr(colon + 1);
    iv.hi = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("roi: malformed interval '" + text + "', expected lo:hi");
  }
  return iv;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

void check_interval(const Interval& iv) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw std::invalid_argument("roi: bounds must be finite");
  if (iv.lo > iv.hi) throw std::invalid_argument("roi: min exceeds max");
  if (iv.lo < -90.0 || iv.hi > 90.0) throw std::invalid_argument("roi: bounds must lie in [-90, 90]");
}

std::vector<double> axis_points(const Interval& iv, double step) {
  if (iv.hi == iv.lo) return {iv.lo};
  const double span = iv.hi - iv.lo;
  const auto count = static_cast<long>(std::ceil(span / step - 1e-9));
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(count + 1));
  for (long i = 0; i <= count; ++i) pts.push_back(i == count ? iv.hi : iv.lo + span * static_cast<double>(i) / count);
  return pts;
}

double default_step_for(int n) { return n >= 2 ? default_grid_step(n) : 0.1; }

CVector initial_weights(const SynthesisProblem& p, const PhaseAlphabet& alph, const FeasibleRegion& region) {
  Rng rng(p.seed);
  CVector v(p.num_weights());
  const bool hull = p.mode == ConstraintMode::Discrete || p.mode == ConstraintMode::Hull;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (hull) {
      v[i] = alph.values[static_cast<std::size_t>(rng.uniform_int(0, alph.levels - 1))];
    } else {
      const int k = rng.uniform_int(0, static_cast<int>(region.vertices.size()) - 1);
      v[i] = region.vertices[static_cast<std::size_t>(k)].point;
    }
  }
  return v;
}

void fill_projection(SynthesisResult& r, const SynthesisProblem& p, ConstraintMode mode, const PhaseAlphabet& alph) {
  r.weights_projected = project(r.weights, mode, alph);
  r.projected_index.clear();
  if (mode == ConstraintMode::Discrete) {
    for (Eigen::Index i = 0; i < r.weights.size(); ++i)
      r.projected_index.push_back(project_discrete_index(r.weights[i], alph));
  }
  const double eval = p.effective_eval_step();
  r.min_power_relaxed = roi_power(p, r.weights, eval).minCoeff();
  r.min_power_projected = roi_power(p, r.weights_projected, eval).minCoeff();
}

}  // namespace

RegionOfInterest RegionOfInterest::parse(const std::string& text) {
  RegionOfInterest roi;
  for (const auto& part : split(text, ',')) roi.intervals.push_back(parse_interval(part));
  if (roi.intervals.empty()) throw std::invalid_argument("roi: empty");
  for (const auto& iv : roi.intervals) check_interval(iv);
  return roi;
}

RegionOfInterest RegionOfInterest::parse_rects(const std::string& text) {
  RegionOfInterest roi;
  for (const auto& part : split(text, ',')) {
    const auto slash = part.find('/');
    if (slash == std::string::npos)
      throw std::invalid_argument("roi: malformed rectangle '" + part + "', expected el_lo:el_hi/az_lo:az_hi");
    roi.rects.push_back({parse_interval(part.substr(0, slash)), parse_interval(part.substr(slash + 1))});
  }
  if (roi.rects.empty()) throw std::invalid_argument("roi: empty");
  for (const auto& r : roi.rects) {
    check_interval(r.el);
    check_interval(r.az);
  }
  return roi;
}

void RegionOfInterest::validate(ArrayKind kind) const {
  if (kind == ArrayKind::Ula) {
    if (intervals.empty()) throw std::invalid_argument("roi: a ULA needs at least one theta interval");
    for (const auto& iv : intervals) check_interval(iv);
  } else {
    if (rects.empty()) throw std::invalid_argument("roi: a UPA needs at least one elevation/azimuth rectangle");
    for (const auto& r : rects) {
      check_interval(r.el);
      check_interval(r.az);
    }
  }
}

RegionOfInterest RegionOfInterest::normalized() const {
  RegionOfInterest out;
  out.rects = rects;
  auto sorted = intervals;
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const auto& iv : sorted) {
    if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi) {
      out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
    } else {
      out.intervals.push_back(iv);
    }
  }
  return out;
}

bool RegionOfInterest::contains(double theta) const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [&](const Interval& iv) { return theta >= iv.lo && theta <= iv.hi; });
}

double default_grid_step(int n) { return std::min(beamwidth(n, 0.5), 0.1); }

std::vector<Angle> make_grid(const RegionOfInterest& roi, double step, double az_step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  if (az_step <= 0.0) az_step = step;
  std::vector<Angle> grid;
  if (!roi.intervals.empty()) {
    for (const auto& iv : roi.normalized().intervals)
      for (double t : axis_points(iv, step)) grid.push_back({t, 0.0});
  }
  for (const auto& r : roi.rects) {
    const auto el = axis_points(r.el, step);
    const auto az = axis_points(r.az, az_step);
    for (double e : el)
      for (double a : az) grid.push_back({e, a});
  }
  if (grid.empty()) throw std::invalid_argument("roi: empty");
  return grid;
}

void SynthesisProblem::validate() const {
  geometry.validate();
  gains.validate();
  roi.validate(geometry.kind);
  if (grid_step < 0.0 || az_step < 0.0 || eval_step < 0.0) throw std::invalid_argument("grid steps must be >= 0");
  if (levels < 2) throw std::invalid_argument("levels must be >= 2");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (slots < 1) throw std::invalid_argument("slots must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

double SynthesisProblem::effective_grid_step() const {
  if (grid_step > 0.0) return grid_step;
  return default_step_for(geometry.kind == ArrayKind::Ula ? geometry.size() : geometry.rows);
}

double SynthesisProblem::effective_az_step() const {
  if (az_step > 0.0) return az_step;
  return default_step_for(geometry.cols);
}

double SynthesisProblem::effective_eval_step() const {
  if (eval_step > 0.0) return eval_step;
  return geometry.kind == ArrayKind::Ula ? effective_grid_step() / 10.0 : effective_grid_step() / 2.0;
}

RVector roi_power(const SynthesisProblem& problem, const CVector& weights, double eval_step) {
  if (weights.size() != problem.num_weights()) throw std::invalid_argument("roi_power: weight length mismatch");
  const double az_eval = problem.geometry.kind == ArrayKind::Ula
                             ? eval_step
                             : eval_step * problem.effective_az_step() / problem.effective_grid_step();
  const auto grid = make_grid(problem.roi, eval_step, az_eval);
  RVector out(static_cast<Eigen::Index>(grid.size()));
  parallel_for(static_cast<std::ptrdiff_t>(grid.size()), [&](std::ptrdiff_t k) {
    const CVector hbar = effective_channel(problem.geometry, problem.gains, grid[static_cast<std::size_t>(k)]);
    out[k] = slot_power(hbar, weights, problem.slots, problem.combining);
  });
  return out;
}

Flatness evaluate_flatness(const SynthesisProblem& problem, const CVector& weights, double eval_step) {
  const RVector p = roi_power(problem, weights, eval_step);
  Flatness f;
  f.min_db = to_db(p.minCoeff());
  f.max_db = to_db(p.maxCoeff());
  f.ripple_db = f.max_db - f.min_db;
  return f;
}

SynthesisResult mm_solve(const SynthesisProblem& problem) {
  problem.validate();
  const auto alph = alphabet(problem.levels);
  const auto region = region_for(problem.mode, alph);
  const double step = problem.effective_grid_step();
  const auto grid = make_grid(problem.roi, step, problem.effective_az_step());
  const CMatrix table = channel_table(problem.geometry, problem.gains, grid);
  const int n = problem.num_weights();

  SynthesisResult result;
  result.lambda = problem.lambda;
  result.seed = problem.seed;

  const int n_el = problem.geometry.kind == ArrayKind::Ula ? problem.geometry.size() : problem.geometry.rows;
  if (n_el >= 2 && step > beamwidth(n_el, 0.5) + 1e-12) {
    std::ostringstream msg;
    msg << "grid step " << step << " deg exceeds the -0.5 dB beamwidth " << beamwidth(n_el, 0.5) << " deg of a "
        << n_el << "-element array; the beam may dip between grid points";
    result.warnings.push_back(msg.str());
  }
  if (problem.geometry.kind == ArrayKind::Upa && problem.geometry.cols >= 2 &&
      problem.effective_az_step() > beamwidth(problem.geometry.cols, 0.5) + 1e-12) {
    result.warnings.push_back("azimuth grid step exceeds the -0.5 dB beamwidth of the azimuth axis");
  }

  // Work in units of single-element received power so that lambda and
  // epsilon do not depend on the channel gains.
  const double unit = table.cwiseAbs2().mean();
  if (!(unit > 0.0)) throw std::invalid_argument("effective channel is identically zero");
  const CMatrix scaled = table / std::sqrt(unit);

  std::vector<double> stages{problem.lambda};
  if (problem.penalty_ramp && problem.lambda > 0.0) stages = {0.0, problem.lambda / 100.0, problem.lambda / 10.0, problem.lambda};

  CVector v = initial_weights(problem, alph, region);
  std::size_t stage = 0;
  double t_prev = penalized_value(v, scaled, stages[stage], problem.slots, problem.combining);
  result.t_trace.push_back(t_prev);

  for (int k = 1; k <= problem.max_iters; ++k) {
    const double lambda = stages[stage];
    const auto rows = surrogate_rows(scaled, v, problem.slots, problem.combining, lambda);
    LinearProgram lp = build_subproblem(rows, region, n);
    lp.start_basis = vertex_start_basis(rows, region, v);
    if (problem.on_subproblem) problem.on_subproblem(k, lp);
    const LpSolution sol = solve(lp, problem.lp);
    if (sol.status != LpStatus::Optimal) throw NumericalError("subproblem-lp", k, to_string(sol.status));
    result.lp_pivots += sol.iterations;

    const CVector v_next = weights_from_lp(sol.x, n);
    const double t_next = penalized_value(v_next, scaled, lambda, problem.slots, problem.combining);
    result.iterations = k;
    if (t_next >= t_prev) v = v_next;
    result.t_trace.push_back(std::max(t_next, t_prev));
    if (t_next - t_prev < problem.epsilon) {
      if (stage + 1 == stages.size()) {
        result.converged = true;
        break;
      }
      ++stage;
      t_prev = penalized_value(v, scaled, stages[stage], problem.slots, problem.combining);
      continue;
    }
    t_prev = t_next;
  }

  result.weights = v;
  fill_projection(result, problem, problem.mode, alph);
  return result;
}

SynthesisResult direct_quantize_baseline(const SynthesisProblem& problem) {
  SynthesisProblem power = problem;
  power.mode = ConstraintMode::Power;
  power.lambda = 0.0;
  SynthesisResult r = mm_solve(power);
  fill_projection(r, problem, ConstraintMode::Discrete, alphabet(problem.levels));
  return r;
}

SynthesisResult solve_lambda_sweep(const SynthesisProblem& problem, const std::vector<double>& lambdas, int restarts) {
  if (lambdas.empty()) throw std::invalid_argument("lambda sweep: no lambda values");
  if (restarts < 1) throw std::invalid_argument("lambda sweep: restarts must be >= 1");
  const std::size_t runs = lambdas.size() * static_cast<std::size_t>(restarts);
  std::vector<SynthesisResult> results(runs);
  parallel_for(static_cast<std::ptrdiff_t>(runs), [&](std::ptrdiff_t i) {
    SynthesisProblem p = problem;
    p.lambda = lambdas[static_cast<std::size_t>(i) / static_cast<std::size_t>(restarts)];
    p.seed = problem.seed + static_cast<std::uint64_t>(i % restarts);
    results[static_cast<std::size_t>(i)] = mm_solve(p);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs; ++i)
    if (results[i].min_power_projected > results[best].min_power_projected) best = i;
  return results[best];
}

}  // namespace risbeam
