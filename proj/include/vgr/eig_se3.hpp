#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vgr/view_graph.hpp"

namespace vgr {

struct IrlsConfig {
  int max_outer_iterations = 20;
  double convergence_tol = 1e-6;  // max per-edge weight change
  double cauchy_scale = 0.0;      // <= 0: 1.4826 * median abs residual
  double eigen_tol = 1e-8;        // subspace residual tolerance
};

// Edge translations: either scaled from ground truth (synthetic exactness
// mode) or direction-only, resolved by a separate center solve.
enum class TranslationMode { GroundTruthScale, DirectionOnly };

struct BlockMatrix {
  Eigen::MatrixXd x;        // 4n x 4n, block (i,j) = M_i M_j^{-1}
  Eigen::VectorXd degrees;  // per node: 1 + sum of incident edge weights
  int n = 0;
};

// Assembles X in the M_{i,j} = M_i M_j^{-1} convention, converting from
// the stored src->dst edge convention by inversion. Node index = position
// of node_id in ascending order.
BlockMatrix build_block_matrix(const ViewGraph& graph,
                               const std::vector<double>& edge_scales,
                               const std::vector<double>& edge_weights = {});

// The 4 eigenvectors of X v = lambda D v with largest real eigenvalues,
// as columns of a 4n x 4 matrix.
Eigen::MatrixXd spectral_solve(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& degrees,
                               double tol = 1e-8, int subspace_dim = 4);

// Change of basis mapping every 4th row of the stack to (0,0,0,1),
// followed by SO(3) projection of each rotation block.
std::vector<AbsolutePose> euclidean_basis_fix(const Eigen::MatrixXd& m_stack);

struct MotionAverageResult {
  std::vector<AbsolutePose> poses;  // indexed by ascending node_id
  std::vector<double> edge_weights;
  bool converged = false;
  int iterations = 0;
};

// Weighted spectral solve + Cauchy reweighting loop. Returns poses in a
// canonical gauge: pose 0 = identity; in direction-only mode the mean
// center distance from camera 0 is normalized to 1.
MotionAverageResult irls_motion_average(const ViewGraph& graph,
                                        const IrlsConfig& config,
                                        TranslationMode mode);

}  // namespace vgr
