#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coevo/dynamics.hpp"

namespace coevo {

using VectorField = std::function<std::vector<double>(std::span<const double>)>;
using Spectrum = std::vector<std::complex<double>>;

enum class Stability { stable, unstable, marginal };
const char* to_string(Stability s);

enum class JacobianDomain {
  unit_box,   // every coordinate must stay h away from {0, 1}
  unbounded,
};

// Central differences: J(a,b) = [f_a(x + h e_b) - f_a(x - h e_b)] / 2h.
Eigen::MatrixXd numeric_jacobian(const VectorField& rhs, std::span<const double> state,
                                 double h = 1e-6,
                                 JacobianDomain domain = JacobianDomain::unit_box);
Eigen::MatrixXd numeric_jacobian(const OdeSystem& system, std::span<const double> state,
                                 double h = 1e-6);

// Linearizations of the two three-agent link systems at (1/2, 1/2, 1/2).
// Coordination: diagonal -T, off-diagonal -1/4.
Eigen::Matrix3d coordination_jacobian_interior(double temperature);
// RPS: diagonal -T, off-diagonal -epsilon/12.
Eigen::Matrix3d rps_jacobian_interior(double temperature, double epsilon);

// Full complex spectrum sorted by (real, imag). A 3x3 matrix of the form
// aI + b(11^T - I) takes the closed form {a+2b, a-b, a-b}; everything else
// goes through the general real eigensolver.
Spectrum eigenvalues(const Eigen::MatrixXd& m);
Spectrum general_eigenvalues(const Eigen::MatrixXd& m);

Stability classify_stability(const Spectrum& eigs, double tol = 1e-8);

enum class LinkGame { coordination, rps };

struct LinkSystemSpec {
  LinkGame game = LinkGame::coordination;
  double epsilon = 0.0;  // rps only

  static LinkSystemSpec coordination() { return {LinkGame::coordination, 0.0}; }
  static LinkSystemSpec rps(double epsilon) { return {LinkGame::rps, epsilon}; }
};

OdeSystem link_system(const LinkSystemSpec& spec, double temperature);
Eigen::Matrix3d interior_jacobian(const LinkSystemSpec& spec, double temperature);
// Analytic Jacobian of either link system at any state with links strictly
// inside (0, 1). Reduces to interior_jacobian at (1/2, 1/2, 1/2).
Eigen::Matrix3d link_jacobian(const LinkSystemSpec& spec, const LinkState3& c, double temperature);
// max Re(eig) of the analytic interior Jacobian.
double interior_growth_rate(const LinkSystemSpec& spec, double temperature);

struct CriticalTemperature {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string criterion = "max real eigenvalue sign change";
};

// Bisection on the interior growth rate until hi - lo <= tol.
CriticalTemperature critical_temperature(const LinkSystemSpec& spec, double lo, double hi,
                                         double tol = 1e-6);

struct PerturbationCheck {
  double temperature = 0.0;
  double initial_distance = 0.0;  // inf-norm from (1/2, 1/2, 1/2)
  double final_distance = 0.0;
  std::vector<double> final_state;
  bool returned() const { return final_distance < initial_distance; }
};

// Integrates the link system from (1/2,1/2,1/2) + size*(1, -0.5, 0.25).
PerturbationCheck perturbation_check(const LinkSystemSpec& spec, double temperature,
                                     double size = 0.01, double t_end = 200.0);

// Trajectory-based confirmation on both sides of a critical temperature:
// expect the perturbation to grow below and decay above.
struct CriticalVerification {
  PerturbationCheck below;
  PerturbationCheck above;
  bool consistent() const { return !below.returned() && above.returned(); }
};
CriticalVerification verify_critical_temperature(const LinkSystemSpec& spec,
                                                 const CriticalTemperature& tc,
                                                 double offset = 0.05, double t_end = 400.0);

struct RestPoint {
  std::vector<double> state;
  double residual = 0.0;      // inf-norm of rhs
  Eigen::MatrixXd jacobian;   // in tangent coordinates of the layout
  Spectrum eigenvalues;
  Stability classification = Stability::marginal;
  bool degenerate = false;    // |det J| tiny, typically a continuum of rest points
};

struct RestPointOptions {
  double tol = 1e-10;
  bool allow_boundary = true;  // freeze coordinates that reach a face
  double dedup_distance = 1e-6;
  int max_iterations = 100;
  int max_halvings = 20;
  double stability_tol = 1e-8;
};

struct RestPointSearch {
  std::vector<RestPoint> points;
  std::size_t seeds = 0;
  std::size_t non_converged = 0;
  // Non-converged seeds whose iterates ended within 1e-6 of a face
  // (interior-only searches).
  std::size_t drifted_to_face = 0;
};

// Damped Newton from every seed in the tangent coordinates of the system's
// layout, deduplicated.
RestPointSearch find_rest_points(const OdeSystem& system,
                                 const std::vector<std::vector<double>>& seeds,
                                 const RestPointOptions& options = {});

// Rest point nearest to `state` (Newton from that single seed), or nullopt.
std::optional<RestPoint> refine_rest_point(const OdeSystem& system, std::span<const double> state,
                                           const RestPointOptions& options = {});

// {v_1, ..., v_k}^3 grid of link seeds.
std::vector<std::vector<double>> link_seed_grid(const std::vector<double>& values);

}  // namespace coevo
