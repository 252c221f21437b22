#pragma once

#include "aerocouple/config.hpp"
#include "aerocouple/field.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>

namespace aerocouple {

/// Compactly supported C2 Wendland kernel: (1 - r)^4 (4 r + 1) on [0, 1], 0 beyond.
double wendland_c2(double r);

/// Interpolation operator between two point clouds.
///
/// The RBF system [[Phi, P], [P^T, 0]] uses a linear polynomial, so the map is
/// exact for affine fields. When every point (source and target) lies in one plane
/// the problem is treated as 2D with in-plane polynomial coordinates.
class RbfMap {
public:
  const PointCloud& source() const { return source_; }
  const PointCloud& target() const { return target_; }
  double support_radius() const { return radius_; }
  int dimension() const { return dimension_; }
  double condition_estimate() const { return condition_; }

  /// target_values = matrix() * source_values
  const Eigen::MatrixXd& matrix() const { return operator_; }

  Eigen::MatrixX3d interpolate(const Eigen::MatrixX3d& source_values) const;

private:
  friend RbfMap build_map(const PointCloud&, const PointCloud&, std::optional<double>);

  PointCloud source_;
  PointCloud target_;
  double radius_ = 0.0;
  int dimension_ = 3;
  double condition_ = 1.0;
  Eigen::MatrixXd operator_;
};

/// Default radius: twice the diameter of the source cloud's centroid-bounding sphere.
double default_support_radius(const PointCloud& source);

/// Throws ValidationError on collinear (2D) / coplanar (3D) sources and NumericError
/// on a singular system.
RbfMap build_map(const PointCloud& source, const PointCloud& target, std::optional<double> support_radius = {});

/// Interpolates a structural motion field onto the map's target points.
InterfaceField apply_displacements(const RbfMap& map, const InterfaceField& structural);

/// Conservative load transfer: F_s = H^T F_f with H the structure-to-fluid operator.
InterfaceField apply_forces_conservative(const RbfMap& structure_to_fluid, const InterfaceField& fluid_forces);

/// Consistent load transfer: tractions F_f / A_f are interpolated with the
/// fluid-to-structure map and integrated with the structural weights H^T A_f.
InterfaceField apply_forces_consistent(const RbfMap& fluid_to_structure, const RbfMap& structure_to_fluid,
                                       const Eigen::VectorXd& fluid_areas, const InterfaceField& fluid_forces);

/// Both directions of the structure/fluid interface.
class InterfaceTransfer {
public:
  InterfaceTransfer(const PointCloud& structure, const PointCloud& fluid, Eigen::VectorXd fluid_areas,
                    TransferMode mode, std::optional<double> support_radius = {});

  TransferMode mode() const { return mode_; }
  const RbfMap& structure_to_fluid() const { return s2f_; }
  const std::optional<RbfMap>& fluid_to_structure() const { return f2s_; }

  InterfaceField to_fluid(const InterfaceField& structural) const { return apply_displacements(s2f_, structural); }
  InterfaceField to_structure(const InterfaceField& fluid_forces) const;

private:
  TransferMode mode_;
  RbfMap s2f_;
  std::optional<RbfMap> f2s_;
  Eigen::VectorXd fluid_areas_;
};

/// v = (x_new - x_old) / dt; zero everywhere when `suppress` is set (first step
/// after an initial deformation).
Eigen::MatrixX3d grid_velocities(const Eigen::MatrixX3d& previous, const Eigen::MatrixX3d& current, double dt,
                                 bool suppress = false);

/// Debug dump "id,x,y,z,vx,vy,vz".
void write_field_csv(const std::filesystem::path& path, const InterfaceField& field);

}  // namespace aerocouple
