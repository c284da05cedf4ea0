#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

namespace caim {

using Complex = std::complex<double>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform linear array: element count and spacing in wavelengths.
struct ArrayGeometry {
  int num_elements = 8;
  double spacing_over_wavelength = 0.5;

  void validate() const;
};

template <typename Scalar>
inline Scalar deg2rad(Scalar deg) {
  return deg * std::numbers::pi_v<Scalar> / Scalar(180);
}

/// Far-field ULA response a(theta); element m carries phase
/// -2*pi*(d/lambda)*m*sin(theta). Element 0 is the phase reference.
template <typename Scalar = double>
ComplexVector<Scalar> steering_vector(const ArrayGeometry& geometry, Scalar theta_deg) {
  const Scalar k = -Scalar(2) * std::numbers::pi_v<Scalar> *
                   Scalar(geometry.spacing_over_wavelength) * std::sin(deg2rad(theta_deg));
  ComplexVector<Scalar> a(geometry.num_elements);
  for (int m = 0; m < geometry.num_elements; ++m) {
    a(m) = std::polar(Scalar(1), k * Scalar(m));
  }
  return a;
}

/// Angular grid over [theta_min, theta_max) together with the overcomplete
/// manifold Psi (M x N_r) and the real part of its Gram matrix.
///
/// The grid is treated as circular: bin indices and angle differences wrap
/// modulo num_bins, i.e. modulo the span theta_max - theta_min.
class SteeringGrid {
 public:
  SteeringGrid(ArrayGeometry geometry, int num_bins, double theta_min, double theta_max);

  const ArrayGeometry& geometry() const { return geometry_; }
  int num_elements() const { return geometry_.num_elements; }
  int num_bins() const { return num_bins_; }
  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }
  double span() const { return theta_max_ - theta_min_; }
  /// Bin width Delta.
  double resolution() const { return resolution_; }

  double angle(int bin) const { return theta_min_ + bin * resolution_; }
  /// Maps any angle into [theta_min, theta_max) modulo the span.
  double wrap_angle(double theta_deg) const;
  /// Nearest bin, rounding half away from zero, wrapped mod num_bins.
  int bin_of(double theta_deg) const;
  /// Circular distance between two angles on the grid span; at most span/2.
  double angular_distance(double a_deg, double b_deg) const;
  /// True when theta lies on a grid angle (mod span) within tol degrees.
  bool on_grid(double theta_deg, double tol = 1e-9) const;

  const Eigen::MatrixXcd& manifold() const { return *manifold_; }
  /// Re{Psi^H Psi}, N_r x N_r. Diagonal equals M.
  const Eigen::MatrixXd& gram_real() const { return *gram_real_; }

 private:
  ArrayGeometry geometry_;
  int num_bins_;
  double theta_min_;
  double theta_max_;
  double resolution_;
  std::shared_ptr<const Eigen::MatrixXcd> manifold_;
  std::shared_ptr<const Eigen::MatrixXd> gram_real_;
};

SteeringGrid build_grid(const ArrayGeometry& geometry, int num_bins, double theta_min = -90.0,
                        double theta_max = 90.0);

/// Orientation difference alpha = phi_p - phi_q and its size in grid bins.
struct RotationShift {
  double angle_deg = 0.0;
  int bins = 0;
  int num_bins = 1;
};

/// bins = round(alpha / Delta) mod N_r.
RotationShift rotation_shift(double alpha_deg, const SteeringGrid& grid);

/// Bin h of AP p aligned with bin q_bin of AP q: q_bin = (h + shift.bins) mod N_r.
int aligned_index(int q_bin, const RotationShift& shift);

/// Inverse of aligned_index: the bin of AP q aligned with bin h of AP p.
int shifted_index(int p_bin, const RotationShift& shift);

}  // namespace caim
