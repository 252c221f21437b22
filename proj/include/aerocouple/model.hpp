#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aerocouple {

using Vec3 = Eigen::Vector3d;

/// Degrees of freedom stored per structural node, in this order.
inline constexpr int kDofsPerNode = 6;

struct GridNode {
  int id = 0;
  Vec3 position = Vec3::Zero();

  bool operator==(const GridNode&) const = default;
};

/// Modal structural model: node cloud, mode-shape matrix and generalized matrices.
///
/// Rows of `modes` are stacked nodal DOFs (t1, t2, t3, r1, r2, r3) per node in
/// declaration order; columns are the retained generalized coordinates.
struct StructuralModel {
  std::vector<GridNode> nodes;
  Eigen::MatrixXd modes;
  Eigen::VectorXd frequencies;
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd damping_ratios;
  std::optional<Eigen::MatrixXd> damping_matrix;
  bool diagonal = true;

  int num_modes() const { return static_cast<int>(modes.cols()); }
  int num_nodes() const { return static_cast<int>(nodes.size()); }

  /// Index of a node id in declaration order, or -1.
  int node_index(int id) const;

  Eigen::MatrixX3d node_positions() const;

  /// Rows of `modes` holding translations only (3 per node).
  Eigen::MatrixXd translation_modes() const;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;

  bool operator==(const StructuralModel& other) const;
};

/// Builds a diagonal unit-mass model: M = I, K = diag(omega^2).
StructuralModel make_diagonal_model(std::vector<GridNode> nodes, Eigen::MatrixXd modes,
                                    Eigen::VectorXd frequencies);

StructuralModel parse_structural_model(std::string_view text);
StructuralModel load_structural_model(const std::filesystem::path& path);

/// Writes the model in the same dialect parse_structural_model reads.
std::string serialize_structural_model(const StructuralModel& model);

/// Parses a real number, accepting the Nastran exponent shorthand "1.0-3".
std::optional<double> parse_real(std::string_view field);

}  // namespace aerocouple
