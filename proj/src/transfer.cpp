#include "aerocouple/transfer.hpp"

#include "aerocouple/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace aerocouple {

void InterfaceField::validate() const {
  if (positions.rows() != values.rows()) throw InvalidArgument("field has mismatched positions and values");
  if (static_cast<Eigen::Index>(ids.size()) != values.rows()) throw InvalidArgument("field has mismatched ids and values");
  if (rotational && rotational->rows() != values.rows()) throw InvalidArgument("field has mismatched rotational part");
  if (!values.allFinite() || (rotational && !rotational->allFinite())) {
    throw NumericError("field contains non-finite values");
  }
}

double wendland_c2(double r) {
  if (r >= 1.0) return 0.0;
  if (r < 0.0) r = -r;
  const double s = 1.0 - r;
  const double s2 = s * s;
  return s2 * s2 * (4.0 * r + 1.0);
}

Eigen::MatrixX3d RbfMap::interpolate(const Eigen::MatrixX3d& source_values) const {
  if (source_values.rows() != operator_.cols()) {
    throw InvalidArgument("interpolation expects " + std::to_string(operator_.cols()) + " source values, got " +
                          std::to_string(source_values.rows()));
  }
  return operator_ * source_values;
}

double default_support_radius(const PointCloud& source) {
  const Eigen::RowVector3d centroid = source.positions.colwise().mean();
  const double radius = (source.positions.rowwise() - centroid).rowwise().norm().maxCoeff();
  return 2.0 * (2.0 * radius);
}

namespace {

struct PolynomialFrame {
  int dimension = 3;
  Eigen::RowVector3d origin;
  Eigen::Matrix3d axes;  // columns; first `dimension` are used
  double scale = 1.0;

  Eigen::MatrixXd basis(const Eigen::MatrixX3d& xyz) const {
    Eigen::MatrixXd p(xyz.rows(), dimension + 1);
    p.col(0).setOnes();
    const Eigen::MatrixXd local = ((xyz.rowwise() - origin) * axes.leftCols(dimension)) / scale;
    p.rightCols(dimension) = local;
    return p;
  }
};

Eigen::Vector3d spread(const Eigen::MatrixX3d& xyz, Eigen::Matrix3d* axes = nullptr) {
  const Eigen::MatrixX3d centered = xyz.rowwise() - xyz.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  s.head(svd.singularValues().size()) = svd.singularValues();
  if (axes) *axes = svd.matrixV();
  return s;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixX3d& rows, const Eigen::MatrixX3d& cols, double radius) {
  Eigen::MatrixXd phi(rows.rows(), cols.rows());
  for (Eigen::Index j = 0; j < cols.rows(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      phi(i, j) = wendland_c2((rows.row(i) - cols.row(j)).norm() / radius);
    }
  }
  return phi;
}

constexpr double kFlatTolerance = 1e-10;

}  // namespace

RbfMap build_map(const PointCloud& source, const PointCloud& target, std::optional<double> support_radius) {
  if (source.size() < 3) throw ValidationError("RBF map needs at least 3 source points");
  if (target.size() < 1) throw ValidationError("RBF map needs at least one target point");
  if (!source.positions.allFinite() || !target.positions.allFinite()) {
    throw ValidationError("RBF point clouds contain non-finite coordinates");
  }
  const double radius = support_radius.value_or(default_support_radius(source));
  if (!(radius > 0.0)) throw ValidationError("RBF support radius must be positive");

  Eigen::MatrixX3d all(source.size() + target.size(), 3);
  all << source.positions, target.positions;
  Eigen::Matrix3d axes;
  const Eigen::Vector3d all_spread = spread(all, &axes);
  if (!(all_spread[0] > 0.0)) throw ValidationError("RBF point clouds are degenerate (all points coincide)");

  PolynomialFrame frame;
  frame.origin = source.positions.colwise().mean();
  frame.axes = axes;
  frame.dimension = all_spread[2] <= kFlatTolerance * all_spread[0] ? 2 : 3;

  const Eigen::Vector3d src_spread = spread(source.positions);
  if (frame.dimension == 3 && !(src_spread[2] > kFlatTolerance * src_spread[0])) {
    throw ValidationError("structural points are coplanar; a 3D RBF interpolation needs non-coplanar points");
  }
  if (frame.dimension == 2) {
    const Eigen::MatrixXd in_plane = source.positions * axes.leftCols(2);
    Eigen::MatrixX3d flat = Eigen::MatrixX3d::Zero(source.size(), 3);
    flat.leftCols(2) = in_plane;
    const Eigen::Vector3d s = spread(flat);
    if (!(s[1] > kFlatTolerance * s[0])) {
      throw ValidationError("structural points are collinear; a 2D RBF interpolation needs non-collinear points");
    }
  }
  frame.scale = std::max(src_spread[0] / std::sqrt(static_cast<double>(source.size())), 1e-300);

  double min_spacing = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < source.size(); ++i) {
    for (Eigen::Index j = i + 1; j < source.size(); ++j) {
      min_spacing = std::min(min_spacing, (source.positions.row(i) - source.positions.row(j)).norm());
    }
  }
  if (!(min_spacing > 0.0)) throw ValidationError("RBF source cloud contains coincident points");
  if (radius < min_spacing) {
    log::warn("RBF support radius " + std::to_string(radius) + " is below the minimum source spacing " +
              std::to_string(min_spacing) + "; the interpolant is disconnected");
  }

  const Eigen::MatrixXd phi = kernel_matrix(source.positions, source.positions, radius);
  const Eigen::MatrixXd p = frame.basis(source.positions);
  Eigen::LLT<Eigen::MatrixXd> phi_llt(phi);
  if (phi_llt.info() != Eigen::Success) throw NumericError("RBF kernel matrix is not positive definite");

  const Eigen::MatrixXd phi_inv_p = phi_llt.solve(p);
  const Eigen::MatrixXd schur = p.transpose() * phi_inv_p;
  Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success || !(schur_llt.rcond() > 1e-14)) {
    throw NumericError("RBF saddle-point system is singular (polynomial block is rank deficient)");
  }

  // B = S^-1 P^T Phi^-1, A = Phi^-1 (I - P B)
  const Eigen::MatrixXd b = schur_llt.solve(phi_inv_p.transpose());
  const Eigen::MatrixXd a =
      phi_llt.solve(Eigen::MatrixXd::Identity(source.size(), source.size()) - p * b);

  const Eigen::MatrixXd phi_target = kernel_matrix(target.positions, source.positions, radius);
  const Eigen::MatrixXd p_target = frame.basis(target.positions);
  Eigen::MatrixXd h = phi_target * a + p_target * b;

  // One refinement pass so that H P = P_target holds to rounding (affine reproduction).
  const Eigen::MatrixXd defect = p_target - h * p;
  h += defect * (p.transpose() * p).ldlt().solve(p.transpose());

  RbfMap map;
  map.source_ = source;
  map.target_ = target;
  map.radius_ = radius;
  map.dimension_ = frame.dimension;
  map.condition_ = 1.0 / std::max(phi_llt.rcond(), 1e-300);
  map.operator_ = std::move(h);
  log::info("RBF map " + std::to_string(source.size()) + " -> " + std::to_string(target.size()) + " points (" +
            std::to_string(frame.dimension) + "D), condition estimate " + std::to_string(map.condition_));
  return map;
}

InterfaceField apply_displacements(const RbfMap& map, const InterfaceField& structural) {
  structural.validate();
  if (structural.size() != map.source().size()) {
    throw InvalidArgument("field has " + std::to_string(structural.size()) + " points, map expects " +
                          std::to_string(map.source().size()));
  }
  InterfaceField out = InterfaceField::zeros(map.target(), structural.kind);
  out.values = map.interpolate(structural.values);
  return out;
}

InterfaceField apply_forces_conservative(const RbfMap& structure_to_fluid, const InterfaceField& fluid_forces) {
  fluid_forces.validate();
  if (fluid_forces.size() != structure_to_fluid.target().size()) {
    throw InvalidArgument("force field has " + std::to_string(fluid_forces.size()) + " points, map expects " +
                          std::to_string(structure_to_fluid.target().size()));
  }
  InterfaceField out = InterfaceField::zeros(structure_to_fluid.source(), FieldKind::Force);
  out.values = structure_to_fluid.matrix().transpose() * fluid_forces.values;
  return out;
}

InterfaceField apply_forces_consistent(const RbfMap& fluid_to_structure, const RbfMap& structure_to_fluid,
                                       const Eigen::VectorXd& fluid_areas, const InterfaceField& fluid_forces) {
  fluid_forces.validate();
  const Eigen::Index nf = fluid_to_structure.source().size();
  if (fluid_forces.size() != nf || fluid_areas.size() != nf || structure_to_fluid.target().size() != nf) {
    throw InvalidArgument("consistent transfer: fluid forces, areas and maps disagree in size");
  }
  if (!(fluid_areas.array() > 0.0).all()) throw InvalidArgument("consistent transfer needs positive fluid areas");
  const Eigen::MatrixX3d traction = fluid_forces.values.array().colwise() / fluid_areas.array();
  const Eigen::MatrixX3d structural_traction = fluid_to_structure.interpolate(traction);
  const Eigen::VectorXd weights = structure_to_fluid.matrix().transpose() * fluid_areas;
  InterfaceField out = InterfaceField::zeros(structure_to_fluid.source(), FieldKind::Force);
  out.values = structural_traction.array().colwise() * weights.array();
  return out;
}

InterfaceTransfer::InterfaceTransfer(const PointCloud& structure, const PointCloud& fluid, Eigen::VectorXd fluid_areas,
                                     TransferMode mode, std::optional<double> support_radius)
    : mode_(mode), s2f_(build_map(structure, fluid, support_radius)), fluid_areas_(std::move(fluid_areas)) {
  if (mode_ == TransferMode::Consistent) {
    if (fluid_areas_.size() != fluid.size()) {
      throw ValidationError("consistent load transfer needs one area per fluid interface point");
    }
    f2s_ = build_map(fluid, structure, support_radius ? support_radius : std::optional<double>(default_support_radius(fluid)));
  }
}

InterfaceField InterfaceTransfer::to_structure(const InterfaceField& fluid_forces) const {
  if (mode_ == TransferMode::Conservative) return apply_forces_conservative(s2f_, fluid_forces);
  if (!f2s_) throw InvalidArgument("consistent load transfer is missing its fluid-to-structure map");
  return apply_forces_consistent(*f2s_, s2f_, fluid_areas_, fluid_forces);
}

Eigen::MatrixX3d grid_velocities(const Eigen::MatrixX3d& previous, const Eigen::MatrixX3d& current, double dt,
                                 bool suppress) {
  if (!(dt > 0.0)) throw InvalidArgument("grid velocities need a positive time step");
  if (previous.rows() != current.rows()) throw InvalidArgument("grid velocity point sets differ in size");
  if (suppress) return Eigen::MatrixX3d::Zero(current.rows(), 3);
  return (current - previous) / dt;
}

void write_field_csv(const std::filesystem::path& path, const InterfaceField& field) {
  field.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "id,x,y,z,vx,vy,vz\n";
  char buf[256];
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", field.ids[i], field.positions(i, 0),
                  field.positions(i, 1), field.positions(i, 2), field.values(i, 0), field.values(i, 1),
                  field.values(i, 2));
    out << buf;
  }
}

}  // namespace aerocouple
