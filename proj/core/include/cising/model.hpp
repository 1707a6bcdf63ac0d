#pragma once

#include <Eigen/Core>
#include <string>

namespace cising {

/// Physical parameters of the mixed transverse-field Ising model with
/// collective decay. Rates are expressed in units of Gamma.
///
/// H = (1-p)[(V/2N) Jx^2 + g Jz] + p[(V/2N) Jz^2 + g Jx]
struct ModelParams {
  double V = 0.0;      ///< Ising interaction strength
  double g = 0.0;      ///< Rabi frequency of the transverse drive
  double Gamma = 1.0;  ///< collective decay rate
  double p = 0.0;      ///< mixing between the two Hamiltonians, in [0, 1]
  int N = 0;           ///< spin count; ignored by the mean-field solvers

  /// Throws InvalidArgument naming the violated constraint.
  void validate() const;
  /// Same as validate() plus N >= 1.
  void validate_quantum() const;

  bool operator==(const ModelParams&) const = default;
};

/// Normalized mean-field magnetization <J>/(N/2).
struct BlochVector {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;

  Eigen::Vector3d vec() const { return {X, Y, Z}; }
  static BlochVector from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  double norm_squared() const { return X * X + Y * Y + Z * Z; }

  bool operator==(const BlochVector&) const = default;
};

inline constexpr BlochVector kSouthPole{0.0, 0.0, -1.0};
inline constexpr BlochVector kNorthPole{0.0, 0.0, 1.0};

std::string to_string(const ModelParams& params);

}  // namespace cising
