#pragma once

#include <functional>
#include <vector>

#include "modnls/modulation.hpp"
#include "modnls/young.hpp"

namespace modnls {

/// Complex field on the periodic box [-L/2, L/2) with M nodes, standing in
/// for the real line.
class BoxField {
 public:
  BoxField(std::size_t grid_points = 4096, double box_length = 64.0);
  BoxField(std::size_t grid_points, double box_length, Vector values);

  static BoxField from_function(std::size_t grid_points, double box_length,
                                const std::function<std::complex<double>(double)>& f);
  /// Inverse of spectrum().
  static BoxField from_spectrum(std::size_t grid_points, double box_length, Vector spectrum);

  std::size_t grid_points() const noexcept { return values_.size(); }
  double box_length() const noexcept { return box_length_; }
  double dx() const noexcept { return box_length_ / static_cast<double>(values_.size()); }
  double x(std::size_t j) const noexcept { return -box_length_ / 2 + static_cast<double>(j) * dx(); }
  /// Angular wavenumber of DFT index j (signed).
  double xi(std::size_t j) const noexcept;

  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }

  /// c_j = (1/M) sum_n u_n e^{-2 pi i j n / M}, phases referred to x = -L/2.
  Vector spectrum() const;

  /// (dx sum |u|^p)^{1/p}.
  double lp_norm(double p) const;
  double l2_norm() const { return lp_norm(2.0); }
  /// L * sum |c_j|^2, the spectral side of Parseval.
  double spectral_l2_norm() const;
  /// (L sum (1 + xi^2) |c_j|^2)^{1/2}.
  double h1_norm() const;
  /// (L sum_{xi != 0} |xi|^{2s} |c_j|^2)^{1/2}.
  double homogeneous_sobolev(double s) const;

  /// max |u| over the outer 10% of the box on each side, relative to max |u|.
  double boundary_mass() const;
  bool guard_ok(double threshold = 1e-10) const { return boundary_mass() <= threshold; }

 private:
  double box_length_;
  Vector values_;
};

BoxField operator+(const BoxField& a, const BoxField& b);
BoxField operator*(std::complex<double> c, const BoxField& a);

/// Multiplies spectral mode xi by e^{-i xi^2 w}.
BoxField propagate(const BoxField& field, double w_value);

/// Field at output times t_m = m T / quad_points, m = 0..quad_points, of
/// U_t ∫_0^t U_s^{-1} psi_s ds by cumulative trapezoid quadrature.
std::vector<BoxField> duhamel(const ModulationPath& w, const std::function<BoxField(double)>& source, double T,
                              std::size_t quad_points);

/// (∫_0^T |u_t|_{L^{2p}}^p dt)^{1/p}, trapezoid in time on the uniform grid
/// implied by fields.size().
double mixed_norm(const std::vector<BoxField>& fields, double T, double p);

/// ∫_0^T |psi_t|_{L^2} dt, trapezoid in time.
double l1l2_norm(const std::vector<BoxField>& fields, double T);

struct StrichartzRow {
  double T = 0;
  double duhamel_norm = 0;
  double source_norm = 0;
  double ratio = 0;
  /// Time-L^2 of the H^{alpha/2} seminorm of |duhamel|^2; 0 unless requested.
  double smoothing = 0;
};

struct StrichartzFit {
  std::vector<StrichartzRow> rows;
  double slope = 0;
  double max_constant = 0;
};

StrichartzFit strichartz_fit(const ModulationPath& w, const std::function<BoxField(double)>& source, double p,
                             const std::vector<double>& T_list, std::size_t quad_points,
                             double smoothing_alpha = 0.0);

/// |U_t u0|_{L^p([0,T], L^{2p})}.
double free_mixed_norm(const ModulationPath& w, const BoxField& u0, double p, double T, std::size_t quad_points);

struct LineSolution {
  std::vector<double> times;
  std::vector<double> l2;
  std::vector<double> h1;
  BoxField final_field;
  std::size_t steps_used = 0;
  int halvings = 0;
};

/// Mild form u_t = U_t u0 + i sign ∫_0^t U_t U_s^{-1}(|u_s|^mu u_s) ds with
/// trapezoid quadrature in the interaction frame and a fixed-point solve
/// per step.
LineSolution mild_solve_power(const ModulationPath& w, const BoxField& u0, double mu, double T,
                              std::size_t n_steps, double fixed_point_tol, double sign = 1.0);

struct GNResult {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
  double s = 0;
  double theta = 0;
};

/// |f|_{L^p} against |f|_{L^1}^{1-theta} |f|_{H^s}^theta with
/// s = 1/2 - 1/p + eps/2 and theta = (2p-2)/((2+eps)p-2).
GNResult gn_check(const BoxField& f, double p, double eps);

}  // namespace modnls
