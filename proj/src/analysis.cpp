#include "coevo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coevo/error.hpp"

namespace coevo {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "marginal";
}

Eigen::MatrixXd numeric_jacobian(const VectorField& rhs, std::span<const double> state, double h,
                                 JacobianDomain domain) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (domain == JacobianDomain::unit_box)
    for (double v : state)
      if (!(v >= h && v <= 1.0 - h))
        throw InvalidArgument("state too close to the boundary for central differences");
  const std::size_t d = state.size();
  std::vector<double> xp(state.begin(), state.end()), xm(xp);
  const std::size_t rows = rhs(state).size();
  Eigen::MatrixXd jac(rows, d);
  for (std::size_t b = 0; b < d; ++b) {
    xp[b] = state[b] + h;
    xm[b] = state[b] - h;
    const auto fp = rhs(xp);
    const auto fm = rhs(xm);
    for (std::size_t a = 0; a < rows; ++a) jac(a, b) = (fp[a] - fm[a]) / (2.0 * h);
    xp[b] = xm[b] = state[b];
  }
  return jac;
}

Eigen::MatrixXd numeric_jacobian(const OdeSystem& system, std::span<const double> state,
                                 double h) {
  return numeric_jacobian([&system](std::span<const double> x) { return system(x); }, state, h,
                          JacobianDomain::unit_box);
}

Eigen::Matrix3d coordination_jacobian_interior(double temperature) {
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  Eigen::Matrix3d j;
  j << -4.0 * temperature, -1.0, -1.0,
       -1.0, -4.0 * temperature, -1.0,
       -1.0, -1.0, -4.0 * temperature;
  return j / 4.0;
}

Eigen::Matrix3d rps_jacobian_interior(double temperature, double epsilon) {
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (!(epsilon > -1.0 && epsilon < 1.0))
    throw InvalidArgument("rps epsilon must lie strictly inside (-1, 1)");
  const double t12 = 12.0 * temperature;
  Eigen::Matrix3d j;
  j << t12, epsilon, epsilon,
       epsilon, t12, epsilon,
       epsilon, epsilon, t12;
  return j * (-1.0 / 12.0);
}

namespace {

void sort_spectrum(Spectrum& s) {
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

bool is_circulant_plus_diagonal(const Eigen::MatrixXd& m) {
  if (m.rows() != 3 || m.cols() != 3) return false;
  const double a = m(0, 0), b = m(0, 1);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (m(r, c) != (r == c ? a : b)) return false;
  return true;
}

}  // namespace

Spectrum general_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigenvalues need a square matrix");
  if (!m.allFinite()) throw InvalidArgument("matrix has non-finite entries");
  Spectrum out;
  if (m.rows() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigenvalue iteration did not converge");
  const auto& ev = solver.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  sort_spectrum(out);
  return out;
}

Spectrum eigenvalues(const Eigen::MatrixXd& m) {
  if (is_circulant_plus_diagonal(m)) {
    const double a = m(0, 0), b = m(0, 1);
    Spectrum out{{a + 2.0 * b, 0.0}, {a - b, 0.0}, {a - b, 0.0}};
    sort_spectrum(out);
    return out;
  }
  return general_eigenvalues(m);
}

Stability classify_stability(const Spectrum& eigs, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("stability tolerance must be positive");
  bool all_negative = true;
  for (const auto& e : eigs) {
    if (e.real() > tol) return Stability::unstable;
    if (!(e.real() < -tol)) all_negative = false;
  }
  return all_negative ? Stability::stable : Stability::marginal;
}

OdeSystem link_system(const LinkSystemSpec& spec, double temperature) {
  return spec.game == LinkGame::coordination ? coordination_link_system(temperature)
                                             : rps_link_system(temperature, spec.epsilon);
}

Eigen::Matrix3d interior_jacobian(const LinkSystemSpec& spec, double temperature) {
  return spec.game == LinkGame::coordination ? coordination_jacobian_interior(temperature)
                                             : rps_jacobian_interior(temperature, spec.epsilon);
}

Eigen::Matrix3d link_jacobian(const LinkSystemSpec& spec, const LinkState3& c, double temperature) {
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  const double scale = spec.game == LinkGame::coordination ? 1.0 : spec.epsilon / 3.0;
  if (spec.game == LinkGame::rps && !(spec.epsilon > -1.0 && spec.epsilon < 1.0))
    throw InvalidArgument("epsilon must lie strictly inside (-1, 1)");
  Eigen::Matrix3d j;
  for (int k = 0; k < 3; ++k) {
    const double a = c[k], b = c[(k + 1) % 3], e = c[(k + 2) % 3];
    if (!(a > kProbFloor && a < 1.0 - kProbFloor))
      throw InvalidArgument("link Jacobian needs links strictly inside (0, 1)");
    const double dg = (1.0 - 2.0 * a) * std::log((1.0 - a) / a) - 1.0;
    j(k, k) = (1.0 - 2.0 * a) * scale * (1.0 - b - e) + temperature * dg;
    j(k, (k + 1) % 3) = -scale * a * (1.0 - a);
    j(k, (k + 2) % 3) = -scale * a * (1.0 - a);
  }
  return j;
}

double interior_growth_rate(const LinkSystemSpec& spec, double temperature) {
  const auto eigs = eigenvalues(interior_jacobian(spec, temperature));
  double g = -std::numeric_limits<double>::infinity();
  for (const auto& e : eigs) g = std::max(g, e.real());
  return g;
}

CriticalTemperature critical_temperature(const LinkSystemSpec& spec, double lo, double hi,
                                         double tol) {
  if (!(lo < hi) || !(lo >= 0.0)) throw InvalidArgument("bracket must satisfy 0 <= lo < hi");
  if (!(tol > 0.0)) throw InvalidArgument("search tolerance must be positive");
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  const int s_lo = sign(interior_growth_rate(spec, lo));
  const int s_hi = sign(interior_growth_rate(spec, hi));
  if (s_lo == 0 || s_hi == 0 || s_lo == s_hi)
    throw InvalidArgument("no sign change of the interior growth rate in the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (sign(interior_growth_rate(spec, mid)) == s_lo) lo = mid;
    else hi = mid;
  }
  CriticalTemperature tc;
  tc.value = 0.5 * (lo + hi);
  tc.lo = lo;
  tc.hi = hi;
  return tc;
}

PerturbationCheck perturbation_check(const LinkSystemSpec& spec, double temperature, double size,
                                     double t_end) {
  const std::vector<double> start{0.5 + size, 0.5 - 0.5 * size, 0.5 + 0.25 * size};
  IntegratorConfig config;
  config.t_end = t_end;
  config.record_every = 1000000;
  const auto traj = integrate(link_system(spec, temperature), start, config);
  auto dist = [](const std::vector<double>& x) {
    double d = 0.0;
    for (double v : x) d = std::max(d, std::abs(v - 0.5));
    return d;
  };
  PerturbationCheck out;
  out.temperature = temperature;
  out.initial_distance = dist(start);
  out.final_state = traj.states.back();
  out.final_distance = dist(out.final_state);
  return out;
}

CriticalVerification verify_critical_temperature(const LinkSystemSpec& spec,
                                                 const CriticalTemperature& tc, double offset,
                                                 double t_end) {
  return {perturbation_check(spec, std::max(0.0, tc.value - offset), 0.01, t_end),
          perturbation_check(spec, tc.value + offset, 0.01, t_end)};
}

namespace {

constexpr double kInteriorMargin = 1e-9;

// Directions spanning the tangent space of the layout at x. With freeze set,
// coordinates sitting on a face are excluded.
Eigen::MatrixXd tangent_basis(const StateLayout& layout, std::span<const double> x, bool freeze) {
  std::vector<Eigen::VectorXd> cols;
  const std::size_t d = layout.dim();
  auto unit = [d](std::size_t a) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    v[static_cast<Eigen::Index>(a)] = 1.0;
    return v;
  };
  for (const Block& b : layout.blocks()) {
    switch (b.kind) {
      case BlockKind::free:
        for (std::size_t a = 0; a < b.size; ++a) cols.push_back(unit(b.offset + a));
        break;
      case BlockKind::unit:
        if (!freeze || (x[b.offset] > 0.0 && x[b.offset] < 1.0)) cols.push_back(unit(b.offset));
        break;
      case BlockKind::simplex: {
        std::vector<std::size_t> active;
        for (std::size_t a = 0; a < b.size; ++a)
          if (!freeze || x[b.offset + a] > 0.0) active.push_back(b.offset + a);
        if (active.size() < 2) break;
        const std::size_t ref = *std::max_element(
            active.begin(), active.end(), [&](std::size_t p, std::size_t q) { return x[p] < x[q]; });
        for (std::size_t a : active)
          if (a != ref) cols.push_back(unit(a) - unit(ref));
        break;
      }
    }
  }
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = cols[k];
  return basis;
}

bool inside_domain(const StateLayout& layout, std::span<const double> x) {
  for (const Block& b : layout.blocks()) {
    if (b.kind == BlockKind::free) continue;
    for (std::size_t a = 0; a < b.size; ++a) {
      const double v = x[b.offset + a];
      if (v < 0.0 || (b.kind == BlockKind::unit && v > 1.0)) return false;
    }
  }
  return true;
}

// Pull a Newton iterate back into the state space. Without boundary access
// coordinates stay kInteriorMargin inside.
void clip_to_domain(const StateLayout& layout, std::vector<double>& x, bool allow_boundary) {
  const double lo = allow_boundary ? 0.0 : kInteriorMargin;
  for (const Block& b : layout.blocks()) {
    switch (b.kind) {
      case BlockKind::free:
        break;
      case BlockKind::unit:
        x[b.offset] = std::clamp(x[b.offset], lo, 1.0 - lo);
        break;
      case BlockKind::simplex: {
        double sum = 0.0;
        for (std::size_t a = 0; a < b.size; ++a) {
          x[b.offset + a] = std::max(x[b.offset + a], lo);
          sum += x[b.offset + a];
        }
        for (std::size_t a = 0; a < b.size; ++a) x[b.offset + a] /= sum;
        break;
      }
    }
  }
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double inf_norm(const std::vector<double>& v) {
  double r = 0.0;
  for (double e : v) r = std::max(r, std::abs(e));
  return r;
}

// Jacobian of the field in the coordinates of `basis`, projected back with
// the pseudo-inverse. Uses one-sided differences where a central stencil
// would leave the state space.
Eigen::MatrixXd tangent_jacobian(const OdeSystem& system, const std::vector<double>& x,
                                 const Eigen::MatrixXd& basis, double h) {
  const Eigen::Index k = basis.cols();
  const Eigen::MatrixXd pinv = basis.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::MatrixXd jac(k, k);
  const Eigen::VectorXd x0 = to_eigen(x);
  const Eigen::VectorXd f0 = to_eigen(system(x));
  std::vector<double> xp(x.size()), xm(x.size());
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::VectorXd step = h * basis.col(c);
    Eigen::VectorXd::Map(xp.data(), static_cast<Eigen::Index>(xp.size())) = x0 + step;
    Eigen::VectorXd::Map(xm.data(), static_cast<Eigen::Index>(xm.size())) = x0 - step;
    const bool up = inside_domain(system.layout, xp);
    const bool down = inside_domain(system.layout, xm);
    Eigen::VectorXd diff;
    if (up && down) diff = (to_eigen(system(xp)) - to_eigen(system(xm))) / (2.0 * h);
    else if (up) diff = (to_eigen(system(xp)) - f0) / h;
    else if (down) diff = (f0 - to_eigen(system(xm))) / h;
    else diff = Eigen::VectorXd::Zero(f0.size());
    jac.col(c) = pinv * diff;
  }
  return jac;
}

// Largest step along dx, capped at 90% of the distance to the nearest face.
double max_interior_step(const StateLayout& layout, const std::vector<double>& x,
                         const Eigen::VectorXd& dx) {
  double s = std::numeric_limits<double>::infinity();
  for (const Block& b : layout.blocks()) {
    if (b.kind == BlockKind::free) continue;
    for (std::size_t a = b.offset; a < b.offset + b.size; ++a) {
      const double v = dx[static_cast<Eigen::Index>(a)];
      if (v < 0.0) s = std::min(s, 0.9 * (x[a] - kInteriorMargin) / -v);
      if (v > 0.0 && b.kind == BlockKind::unit) s = std::min(s, 0.9 * (1.0 - kInteriorMargin - x[a]) / v);
    }
  }
  return std::max(s, 0.0);
}

double face_distance(const StateLayout& layout, const std::vector<double>& x) {
  double d = std::numeric_limits<double>::infinity();
  for (const Block& b : layout.blocks()) {
    if (b.kind == BlockKind::free) continue;
    for (std::size_t a = b.offset; a < b.offset + b.size; ++a) {
      d = std::min(d, x[a]);
      if (b.kind == BlockKind::unit) d = std::min(d, 1.0 - x[a]);
    }
  }
  return d;
}

struct NewtonResult {
  std::optional<std::vector<double>> root;
  std::vector<double> last;
};

NewtonResult newton_trace(const OdeSystem& system, std::vector<double> x,
                          const RestPointOptions& opt);

std::optional<std::vector<double>> newton(const OdeSystem& system, std::vector<double> x,
                                          const RestPointOptions& opt) {
  return newton_trace(system, std::move(x), opt).root;
}

NewtonResult newton_trace(const OdeSystem& system, std::vector<double> x,
                                          const RestPointOptions& opt) {
  clip_to_domain(system.layout, x, opt.allow_boundary);
  double residual = inf_norm(system(x));
  for (int it = 0; it < opt.max_iterations && residual >= opt.tol; ++it) {
    const Eigen::MatrixXd basis = tangent_basis(system.layout, x, opt.allow_boundary);
    if (basis.cols() == 0) break;
    const Eigen::MatrixXd pinv = basis.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::VectorXd f = pinv * to_eigen(system(x));
    const Eigen::MatrixXd jac = tangent_jacobian(system, x, basis, 1e-7);
    const Eigen::VectorXd du = jac.completeOrthogonalDecomposition().solve(-f);
    if (!du.allFinite()) return {std::nullopt, x};
    const Eigen::VectorXd dx = basis * du;

    // Interior-only searches stop short of the faces; a clipped step would
    // land on a face where the residual is spuriously small.
    double scale = 1.0;
    if (!opt.allow_boundary) scale = std::min(1.0, max_interior_step(system.layout, x, dx));

    bool improved = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving, scale *= 0.5) {
      std::vector<double> trial(x.size());
      for (std::size_t a = 0; a < x.size(); ++a)
        trial[a] = x[a] + scale * dx[static_cast<Eigen::Index>(a)];
      clip_to_domain(system.layout, trial, opt.allow_boundary);
      const double r = inf_norm(system(trial));
      if (r < residual) {
        x = std::move(trial);
        residual = r;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(residual < opt.tol)) return {std::nullopt, std::move(x)};
  return {x, x};
}

RestPoint characterize(const OdeSystem& system, std::vector<double> x,
                       const RestPointOptions& opt) {
  RestPoint rp;
  rp.residual = inf_norm(system(x));
  const Eigen::MatrixXd basis = tangent_basis(system.layout, x, /*freeze=*/false);
  rp.jacobian = tangent_jacobian(system, x, basis, 1e-6);
  rp.eigenvalues = rp.jacobian.size() > 0 ? general_eigenvalues(rp.jacobian) : Spectrum{};
  rp.classification = classify_stability(rp.eigenvalues, opt.stability_tol);
  rp.degenerate = rp.jacobian.size() > 0 && std::abs(rp.jacobian.determinant()) < 1e-10;
  rp.state = std::move(x);
  return rp;
}

}  // namespace

RestPointSearch find_rest_points(const OdeSystem& system,
                                 const std::vector<std::vector<double>>& seeds,
                                 const RestPointOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("rest-point tolerance must be positive");
  RestPointSearch out;
  for (const auto& seed : seeds) {
    if (seed.size() != system.dim()) throw InvalidArgument("seed dimension does not match system");
    ++out.seeds;
    auto trace = newton_trace(system, seed, options);
    auto& x = trace.root;
    if (!x) {
      ++out.non_converged;
      if (!options.allow_boundary && face_distance(system.layout, trace.last) < 1e-6)
        ++out.drifted_to_face;
      continue;
    }
    const bool duplicate = std::any_of(out.points.begin(), out.points.end(), [&](const RestPoint& p) {
      double d = 0.0;
      for (std::size_t a = 0; a < x->size(); ++a) d = std::max(d, std::abs(p.state[a] - (*x)[a]));
      return d < options.dedup_distance;
    });
    if (!duplicate) out.points.push_back(characterize(system, std::move(*x), options));
  }
  return out;
}

std::optional<RestPoint> refine_rest_point(const OdeSystem& system, std::span<const double> state,
                                           const RestPointOptions& options) {
  auto x = newton(system, std::vector<double>(state.begin(), state.end()), options);
  if (!x) return std::nullopt;
  return characterize(system, std::move(*x), options);
}

std::vector<std::vector<double>> link_seed_grid(const std::vector<double>& values) {
  std::vector<std::vector<double>> seeds;
  for (double a : values)
    for (double b : values)
      for (double c : values) seeds.push_back({a, b, c});
  return seeds;
}

}  // namespace coevo
