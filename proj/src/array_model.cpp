#include "caim/array_model.hpp"

#include <stdexcept>
#include <string>

namespace caim {

namespace {

int wrap_bin(long long bin, int num_bins) {
  long long r = bin % num_bins;
  return static_cast<int>(r < 0 ? r + num_bins : r);
}

}  // namespace

void ArrayGeometry::validate() const {
  if (num_elements < 2) {
    throw std::invalid_argument("ArrayGeometry: num_elements must be >= 2, got " +
                                std::to_string(num_elements));
  }
  if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength)) {
    throw std::invalid_argument("ArrayGeometry: spacing_over_wavelength must be > 0");
  }
}

SteeringGrid::SteeringGrid(ArrayGeometry geometry, int num_bins, double theta_min,
                           double theta_max)
    : geometry_(geometry), num_bins_(num_bins), theta_min_(theta_min), theta_max_(theta_max) {
  geometry_.validate();
  if (num_bins < 2) {
    throw std::invalid_argument("SteeringGrid: num_bins must be >= 2, got " +
                                std::to_string(num_bins));
  }
  if (!(theta_min < theta_max) || !std::isfinite(theta_min) || !std::isfinite(theta_max)) {
    throw std::invalid_argument("SteeringGrid: require finite theta_min < theta_max");
  }
  resolution_ = (theta_max - theta_min) / num_bins;

  auto psi = std::make_shared<Eigen::MatrixXcd>(geometry_.num_elements, num_bins);
  for (int k = 0; k < num_bins; ++k) {
    psi->col(k) = steering_vector(geometry_, angle(k));
  }
  auto gram = std::make_shared<Eigen::MatrixXd>((psi->adjoint() * *psi).real());
  gram->diagonal().setConstant(static_cast<double>(geometry_.num_elements));
  manifold_ = std::move(psi);
  gram_real_ = std::move(gram);
}

double SteeringGrid::wrap_angle(double theta_deg) const {
  double r = std::fmod(theta_deg - theta_min_, span());
  if (r < 0) r += span();
  // fmod can return span() itself after the negative correction on tiny inputs.
  if (r >= span()) r -= span();
  return theta_min_ + r;
}

int SteeringGrid::bin_of(double theta_deg) const {
  const double offset = (wrap_angle(theta_deg) - theta_min_) / resolution_;
  return wrap_bin(std::llround(offset), num_bins_);
}

double SteeringGrid::angular_distance(double a_deg, double b_deg) const {
  double d = std::fmod(std::abs(a_deg - b_deg), span());
  return std::min(d, span() - d);
}

bool SteeringGrid::on_grid(double theta_deg, double tol) const {
  return angular_distance(theta_deg, angle(bin_of(theta_deg))) <= tol;
}

SteeringGrid build_grid(const ArrayGeometry& geometry, int num_bins, double theta_min,
                        double theta_max) {
  return SteeringGrid(geometry, num_bins, theta_min, theta_max);
}

RotationShift rotation_shift(double alpha_deg, const SteeringGrid& grid) {
  RotationShift s;
  s.angle_deg = alpha_deg;
  s.num_bins = grid.num_bins();
  s.bins = wrap_bin(std::llround(alpha_deg / grid.resolution()), grid.num_bins());
  return s;
}

int aligned_index(int q_bin, const RotationShift& shift) {
  if (q_bin < 0 || q_bin >= shift.num_bins) {
    throw std::out_of_range("aligned_index: bin " + std::to_string(q_bin) + " outside [0, " +
                            std::to_string(shift.num_bins) + ")");
  }
  return wrap_bin(static_cast<long long>(q_bin) - shift.bins, shift.num_bins);
}

int shifted_index(int p_bin, const RotationShift& shift) {
  if (p_bin < 0 || p_bin >= shift.num_bins) {
    throw std::out_of_range("shifted_index: bin " + std::to_string(p_bin) + " outside [0, " +
                            std::to_string(shift.num_bins) + ")");
  }
  return wrap_bin(static_cast<long long>(p_bin) + shift.bins, shift.num_bins);
}

}  // namespace caim
