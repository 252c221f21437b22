#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace aerocouple {

enum class FieldKind { Displacement, Velocity, Acceleration, Force };

/// Ordered point cloud. Positions are the undeformed coordinates.
struct PointCloud {
  std::vector<int> ids;
  Eigen::MatrixX3d positions;

  Eigen::Index size() const { return positions.rows(); }
};

/// Per-point 3-vectors on one side of the interface.
///
/// `rotational` carries nodal rotations (motion fields) or moments (load fields)
/// and is only populated on structural nodes.
struct InterfaceField {
  std::vector<int> ids;
  Eigen::MatrixX3d positions;
  Eigen::MatrixX3d values;
  std::optional<Eigen::MatrixX3d> rotational;
  FieldKind kind = FieldKind::Displacement;

  Eigen::Index size() const { return values.rows(); }

  static InterfaceField zeros(const PointCloud& cloud, FieldKind kind) {
    InterfaceField f;
    f.ids = cloud.ids;
    f.positions = cloud.positions;
    f.values = Eigen::MatrixX3d::Zero(cloud.size(), 3);
    f.kind = kind;
    return f;
  }

  /// Throws InvalidArgument on size mismatch or non-finite entries.
  void validate() const;
};

}  // namespace aerocouple
