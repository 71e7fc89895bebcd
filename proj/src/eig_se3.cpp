#include "vgr/eig_se3.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "vgr/synth.hpp"

namespace vgr {

namespace {

std::vector<int> sorted_node_ids(const ViewGraph& graph) {
  std::vector<int> ids;
  ids.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) ids.push_back(n.node_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

int index_of(const std::vector<int>& ids, int node_id) {
  const auto it = std::lower_bound(ids.begin(), ids.end(), node_id);
  return static_cast<int>(it - ids.begin());
}

Eigen::Matrix4d rigid_matrix(const UnitQuaternion& q,
                             const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = q.matrix();
  m.topRightCorner<3, 1>() = t;
  return m;
}

Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& m) {
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  const Eigen::Matrix3d rt = m.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -(rt * m.topRightCorner<3, 1>());
  return inv;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

BlockMatrix build_block_matrix(const ViewGraph& graph,
                               const std::vector<double>& edge_scales,
                               const std::vector<double>& edge_weights) {
  const auto report = validate_connectivity(graph);
  if (!report.ok) {
    throw Error(ErrorCode::InvalidInput, "disconnected graph");
  }
  if (edge_scales.size() != graph.edges.size()) {
    throw Error(ErrorCode::InvalidInput, "edge scale count mismatch");
  }
  const auto ids = sorted_node_ids(graph);
  const int n = static_cast<int>(ids.size());

  BlockMatrix bm;
  bm.n = n;
  bm.x = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  bm.degrees = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    bm.x.block<4, 4>(4 * i, 4 * i).setIdentity();
  }
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    if (!edge.pose) {
      throw Error(ErrorCode::InvalidInput, "edge missing relative pose");
    }
    const double w = edge_weights.empty() ? 1.0 : edge_weights[e];
    const int i = index_of(ids, edge.src);
    const int j = index_of(ids, edge.dst);
    // Stored pose maps src -> dst, i.e. M_dst * M_src^{-1}; block (i, j)
    // wants M_i M_j^{-1} = the inverse for (src, dst).
    const Eigen::Matrix4d m_hat =
        rigid_matrix(edge.pose->rotation,
                     edge_scales[e] * edge.pose->translation_dir);
    bm.x.block<4, 4>(4 * i, 4 * j) = w * rigid_inverse(m_hat);
    bm.x.block<4, 4>(4 * j, 4 * i) = w * m_hat;
    bm.degrees(i) += w;
    bm.degrees(j) += w;
  }
  return bm;
}

Eigen::MatrixXd spectral_solve(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& degrees,
                               double tol, int subspace_dim) {
  const int dim = static_cast<int>(x.rows());
  const int n = static_cast<int>(degrees.size());
  if (dim % n != 0) {
    throw Error(ErrorCode::InvalidInput, "degree/block size mismatch");
  }
  const int block = dim / n;
  Eigen::VectorXd d_full(dim);
  for (int i = 0; i < n; ++i) {
    d_full.segment(block * i, block).setConstant(degrees(i));
  }
  const Eigen::MatrixXd a = d_full.cwiseInverse().asDiagonal() * x;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditionedSpectrum, "eigen solver failed");
  }
  const auto evals = solver.eigenvalues();
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (evals(lhs).real() != evals(rhs).real()) {
      return evals(lhs).real() > evals(rhs).real();
    }
    return lhs < rhs;
  });

  if (dim > subspace_dim) {
    const double gap = evals(order[subspace_dim - 1]).real() -
                       evals(order[subspace_dim]).real();
    if (gap < 1e-9) {
      throw Error(ErrorCode::IllConditionedSpectrum,
                  "eigen-gap below solver tolerance");
    }
  }

  // Collect a real basis; a complex conjugate pair contributes its real
  // and imaginary parts once.
  Eigen::MatrixXd basis(dim, subspace_dim);
  int col = 0;
  std::vector<bool> used(dim, false);
  for (int k = 0; k < dim && col < subspace_dim; ++k) {
    const int idx = order[k];
    if (used[idx]) continue;
    used[idx] = true;
    const auto vec = solver.eigenvectors().col(idx);
    const double imag_mag = vec.imag().norm();
    if (imag_mag < 1e-12) {
      basis.col(col++) = vec.real();
      continue;
    }
    basis.col(col++) = vec.real();
    if (col < subspace_dim) basis.col(col++) = vec.imag();
    // Mark the conjugate partner as consumed.
    for (int m = k + 1; m < dim; ++m) {
      const int other = order[m];
      if (!used[other] &&
          std::abs(evals(other) - std::conj(evals(idx))) <
              1e-9 * (1.0 + std::abs(evals(idx)))) {
        used[other] = true;
        break;
      }
    }
  }
  if (col < subspace_dim) {
    throw Error(ErrorCode::IllConditionedSpectrum,
                "could not assemble a real eigen-basis");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, subspace_dim);

  // Subspace residual check via the projected Rayleigh quotient.
  const Eigen::MatrixXd dq = d_full.asDiagonal() * q;
  const Eigen::MatrixXd lambda =
      (q.transpose() * dq).ldlt().solve(q.transpose() * (x * q));
  const double residual = (x * q - dq * lambda).norm() / q.norm();
  if (!(residual < std::max(tol, 1e-6) * std::max(1.0, x.norm()))) {
    throw Error(ErrorCode::IllConditionedSpectrum,
                "spectral residual above tolerance");
  }
  return q;
}

std::vector<AbsolutePose> euclidean_basis_fix(const Eigen::MatrixXd& m_stack) {
  if (m_stack.cols() != 4 || m_stack.rows() % 4 != 0 || m_stack.rows() < 4) {
    throw Error(ErrorCode::InvalidInput, "stack must be 4n x 4");
  }
  const int n = static_cast<int>(m_stack.rows()) / 4;

  // Every 4th row; for a Euclidean stack these are identical up to noise,
  // so the system is (near) rank one.
  Eigen::MatrixXd fourth_rows(n, 4);
  for (int i = 0; i < n; ++i) fourth_rows.row(i) = m_stack.row(4 * i + 3);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      fourth_rows, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) < 1e-12) {
    throw Error(ErrorCode::GaugeFixError, "rank-deficient 4th-row system");
  }
  // Least-squares column mapping the rows to 1; the remaining columns span
  // the (near) null space and map them to 0.
  Eigen::Vector4d rhs_sol = Eigen::Vector4d::Zero();
  const Eigen::VectorXd utb = svd.matrixU().transpose() * Eigen::VectorXd::Ones(n);
  for (int k = 0; k < 4; ++k) {
    if (sv(k) > 1e-12 * sv(0)) {
      rhs_sol += (utb(k) / sv(k)) * svd.matrixV().col(k);
    }
  }
  Eigen::Matrix4d q;
  q.col(0) = svd.matrixV().col(1);
  q.col(1) = svd.matrixV().col(2);
  q.col(2) = svd.matrixV().col(3);
  q.col(3) = rhs_sol;
  if (std::abs(q.determinant()) < 1e-12) {
    throw Error(ErrorCode::GaugeFixError, "change of basis is singular");
  }

  const Eigen::MatrixXd fixed = m_stack * q;
  std::vector<AbsolutePose> poses;
  poses.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix4d b = fixed.middleRows<4>(4 * i);
    if (std::abs(b(3, 3)) < 1e-9) {
      throw Error(ErrorCode::GaugeFixError, "degenerate block scale");
    }
    b /= b(3, 3);
    AbsolutePose pose;
    pose.rotation = project_to_so3(b.topLeftCorner<3, 3>());
    pose.translation = b.topRightCorner<3, 1>();
    poses.push_back(pose);
  }
  return poses;
}

namespace {

struct IndexedEdge {
  int i = 0, j = 0;  // node indices, i = src side, j = dst side
  RelativePose pose;
};

// Rotation synchronization: dominant 3-dim subspace of the rotation-only
// block matrix, blocks projected to SO(3).
std::vector<UnitQuaternion> solve_rotations(
    const std::vector<IndexedEdge>& edges, int n,
    const std::vector<double>& weights, double tol) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  Eigen::VectorXd degrees = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) x.block<3, 3>(3 * i, 3 * i).setIdentity();
  for (size_t e = 0; e < edges.size(); ++e) {
    const double w = weights[e];
    const Eigen::Matrix3d r = edges[e].pose.rotation.matrix();  // src->dst
    x.block<3, 3>(3 * edges[e].i, 3 * edges[e].j) = w * r.transpose();
    x.block<3, 3>(3 * edges[e].j, 3 * edges[e].i) = w * r;
    degrees(edges[e].i) += w;
    degrees(edges[e].j) += w;
  }
  const Eigen::MatrixXd basis = spectral_solve(x, degrees, tol, 3);
  std::vector<UnitQuaternion> rotations;
  rotations.reserve(n);
  for (int i = 0; i < n; ++i) {
    rotations.push_back(project_to_so3(basis.middleRows<3>(3 * i)));
  }
  return rotations;
}

// Least-squares camera centers from translation directions, in the
// sum-zero gauge, unit mean baseline, sign from the measured directions.
std::vector<Eigen::Vector3d> solve_centers(
    const std::vector<IndexedEdge>& edges, int n,
    const std::vector<UnitQuaternion>& rotations,
    const std::vector<double>& weights) {
  // c = B y with c_{n-1} = -sum of the others removes the translation
  // gauge; the scale gauge is the remaining null direction.
  const int m = 3 * (n - 1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  auto scatter = [&](int node, const Eigen::Matrix3d& coeff,
                     Eigen::MatrixXd& row_block, int col0) {
    // Accumulates coeff * c_node expressed in y coordinates.
    if (node < n - 1) {
      row_block.middleCols<3>(col0 + 3 * node) += coeff;
    } else {
      for (int k = 0; k < n - 1; ++k) {
        row_block.middleCols<3>(col0 + 3 * k) -= coeff;
      }
    }
  };
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    const Eigen::Vector3d u = edge.pose.translation_dir;
    const Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - u * u.transpose();
    const Eigen::Matrix3d r_dst = rotations[edge.j].matrix();
    // Residual: P * R_dst * (c_src - c_dst)
    Eigen::MatrixXd row = Eigen::MatrixXd::Zero(3, m);
    scatter(edge.i, p * r_dst, row, 0);
    scatter(edge.j, -(p * r_dst), row, 0);
    g += weights[e] * row.transpose() * row;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditionedSpectrum, "center solve failed");
  }
  const Eigen::VectorXd y = es.eigenvectors().col(0);

  std::vector<Eigen::Vector3d> centers(n, Eigen::Vector3d::Zero());
  for (int k = 0; k < n - 1; ++k) {
    centers[k] = y.segment<3>(3 * k);
    centers[n - 1] -= centers[k];
  }
  // Mirror ambiguity: pick the sign agreeing with the measured directions.
  double agreement = 0.0;
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    const Eigen::Vector3d implied =
        rotations[edge.j].rotate(centers[edge.i] - centers[edge.j]);
    agreement += weights[e] * edge.pose.translation_dir.dot(implied);
  }
  if (agreement < 0.0) {
    for (auto& c : centers) c = -c;
  }
  return centers;
}

}  // namespace

MotionAverageResult irls_motion_average(const ViewGraph& graph,
                                        const IrlsConfig& config,
                                        TranslationMode mode) {
  const auto report = validate_connectivity(graph);
  if (!report.ok) {
    throw Error(ErrorCode::InvalidInput, "disconnected graph");
  }
  const auto ids = sorted_node_ids(graph);
  const int n = static_cast<int>(ids.size());
  const size_t num_edges = graph.edges.size();

  std::vector<IndexedEdge> edges;
  std::vector<double> scales(num_edges, 1.0);
  for (size_t e = 0; e < num_edges; ++e) {
    const auto& edge = graph.edges[e];
    if (!edge.pose) {
      throw Error(ErrorCode::InvalidInput, "edge missing relative pose");
    }
    edges.push_back(IndexedEdge{index_of(ids, edge.src),
                                index_of(ids, edge.dst), *edge.pose});
    if (mode == TranslationMode::GroundTruthScale) {
      const auto si = graph.ground_truth.find(edge.src);
      const auto di = graph.ground_truth.find(edge.dst);
      if (si == graph.ground_truth.end() || di == graph.ground_truth.end()) {
        throw Error(ErrorCode::InvalidInput,
                    "ground-truth scale mode needs ground truth");
      }
      const UnitQuaternion r = relative_pose(si->second, di->second).rotation;
      scales[e] =
          (di->second.translation - r.rotate(si->second.translation)).norm();
    }
  }

  std::vector<double> weights(num_edges, 1.0);
  MotionAverageResult result;
  result.edge_weights = weights;
  double best_mean_residual = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < std::max(1, config.max_outer_iterations); ++iter) {
    result.iterations = iter + 1;
    std::vector<AbsolutePose> poses;
    if (mode == TranslationMode::GroundTruthScale) {
      const BlockMatrix bm = build_block_matrix(graph, scales, weights);
      const Eigen::MatrixXd stack =
          spectral_solve(bm.x, bm.degrees, config.eigen_tol, 4);
      poses = euclidean_basis_fix(stack);
    } else {
      const auto rotations =
          solve_rotations(edges, n, weights, config.eigen_tol);
      const auto centers = solve_centers(edges, n, rotations, weights);
      poses.resize(n);
      for (int i = 0; i < n; ++i) {
        poses[i].rotation = rotations[i];
        poses[i].translation = -(rotations[i].rotate(centers[i]));
      }
    }

    // Residual per edge: rotation angle plus translation-direction angle
    // (beta = 1), both in radians.
    std::vector<double> residuals(num_edges, 0.0);
    for (size_t e = 0; e < num_edges; ++e) {
      const auto& edge = edges[e];
      const UnitQuaternion r_est = quat_compose(
          poses[edge.j].rotation, poses[edge.i].rotation.conjugate());
      double r = rotation_angle_deg(edge.pose.rotation, r_est) * M_PI / 180.0;
      const Eigen::Vector3d t_est =
          poses[edge.j].translation - r_est.rotate(poses[edge.i].translation);
      if (t_est.norm() > 1e-12) {
        r += vector_angle_deg(edge.pose.translation_dir, t_est) * M_PI / 180.0;
      }
      residuals[e] = r;
    }
    const double mean_residual =
        std::accumulate(residuals.begin(), residuals.end(), 0.0) /
        std::max<size_t>(1, num_edges);
    if (mean_residual < best_mean_residual) {
      best_mean_residual = mean_residual;
      result.poses = poses;
      result.edge_weights = weights;
    }

    const double med = median_of(residuals);
    if (med < 1e-12) {
      result.converged = true;
      break;
    }
    const double c =
        config.cauchy_scale > 0.0 ? config.cauchy_scale : 1.4826 * med;
    double max_change = 0.0;
    for (size_t e = 0; e < num_edges; ++e) {
      const double w = 1.0 / (1.0 + (residuals[e] / c) * (residuals[e] / c));
      max_change = std::max(max_change, std::abs(w - weights[e]));
      weights[e] = w;
    }
    if (max_change < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  if (config.max_outer_iterations == 1) result.converged = true;

  // Canonical gauge: pose 0 = identity.
  std::vector<AbsolutePose>& poses = result.poses;
  if (!poses.empty()) {
    const UnitQuaternion r0_inv = poses[0].rotation.conjugate();
    const Eigen::Vector3d t0 = poses[0].translation;
    for (auto& p : poses) {
      const UnitQuaternion r_new = quat_compose(p.rotation, r0_inv);
      p.translation = p.translation - r_new.rotate(t0);
      p.rotation = r_new;
    }
    if (mode == TranslationMode::DirectionOnly && poses.size() > 1) {
      double mean_dist = 0.0;
      for (size_t i = 1; i < poses.size(); ++i) {
        mean_dist += poses[i].center().norm();
      }
      mean_dist /= static_cast<double>(poses.size() - 1);
      if (mean_dist > 1e-12) {
        for (auto& p : poses) p.translation /= mean_dist;
      }
    }
  }
  return result;
}

}  // namespace vgr
