#pragma once

<
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vgr/view_graph.hpp"

namespace vgr {

using Vec7 = Eigen::Matrix<double, 7, 1>;

// Three fully connected layers; leaky ReLU (slope 0.01) after the first
// two, linear output by default.
struct Mlp {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static Mlp glorot(int in, int hidden, int out, std::mt19937_64& rng);
};

struct MlpGrad {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static MlpGrad zeros_like(const Mlp& mlp);
  void add_scaled(const MlpGrad& other, double scale);
};

struct PosernetParams {
  Mlp edge_mlp;  // 23 -> h -> h -> 7
  Mlp node_mlp;  // 23 -> h -> h -> 4
  bool output_activation = false;  // leaky ReLU also on the output layer

  static PosernetParams init(int hidden, std::uint64_t seed,
                             bool output_activation = false);
};

struct TrainConfig {
  int depth = 2;  // message-passing rounds K
  double alpha = 0.1;
  double learning_rate = 1e-3;
  int scheduler_patience = 3;
  double scheduler_factor = 0.1;
  int epochs = 60;
  int batch_size = 8;  // graphs per optimizer step
  int hidden = 32;
  bool output_activation = false;
  double node_feature_scale = 1000.0;  // pixel normalizer
  std::uint64_t rng_seed = 0;
};

struct LossBreakdown {
  double orient = 0.0;  // radians
  double tr_dir = 0.0;  // radians
  double q_norm = 0.0;
  double tr_norm = 0.0;
  double total = 0.0;
};

// Preprocessed graph for message passing. Edge embeddings and ground
// truth are held in the canonical src < dst direction; bounding-box
// features stay constant across rounds.
struct GnnEdge {
  int src_idx = 0, dst_idx = 0;  // indices into node arrays
  Vec7 h0 = Vec7::Zero();        // translation (3) then quaternion (4)
  std::vector<Eigen::Vector4d> bb_src, bb_dst;  // one pair per shared track
  std::optional<RelativePose> gt;
};

struct GnnState {
  std::vector<Eigen::Vector4d> node_feat;
  std::vector<GnnEdge> edges;
  // Per node: (edge index, node is the src endpoint).
  std::vector<std::vector<std::pair<int, bool>>> incident;
};

GnnState init_embeddings(const ViewGraph& graph,
                         double node_feature_scale = 1000.0);

// Single-message building blocks (the batched forward uses the same math).
Eigen::VectorXd mlp_apply(const Mlp& mlp, const Eigen::VectorXd& x,
                          bool output_activation);
Vec7 edge_message(const Eigen::Vector4d& h_i, const Eigen::Vector4d& h_j,
                  const Vec7& h_e, const Eigen::Vector4d& bb_i,
                  const Eigen::Vector4d& bb_j, const Mlp& psi_e,
                  bool output_activation);
Eigen::Vector4d node_message(const Eigen::Vector4d& h_i,
                             const Eigen::Vector4d& h_j, const Vec7& h_e,
                             const Eigen::Vector4d& bb_i,
                             const Eigen::Vector4d& bb_j, const Mlp& psi_n,
                             bool output_activation);

// K synchronous rounds; readout renormalizes quaternion and translation.
// K = 0 returns the initial poses unchanged.
std::vector<RelativePose> forward(const GnnState& state,
                                  const PosernetParams& params, int depth);

// Raw (pre-renormalization) final edge embeddings.
std::vector<Vec7> forward_raw(const GnnState& state,
                              const PosernetParams& params, int depth);

// Loss on raw final-round outputs against per-edge ground truth.
LossBreakdown compute_loss(const std::vector<Vec7>& raw_edges,
                           const std::vector<RelativePose>& gt_edges,
                           double alpha);

struct GradientResult {
  LossBreakdown loss;
  MlpGrad edge_grad, node_grad;
};

// Exact reverse-mode gradients of the total loss w.r.t. every weight and
// bias, through all rounds and both aggregation means.
GradientResult loss_and_gradients(const GnnState& state,
                                  const PosernetParams& params, int depth,
                                  double alpha);

struct TrainHistoryRow {
  int epoch = 0;
  double train_loss = 0.0, val_loss = 0.0, lr = 0.0;
  double median_rot_err_deg = 0.0, median_tdir_err_deg = 0.0;
};

struct TrainResult {
  PosernetParams params;
  std::vector<TrainHistoryRow> history;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(std::string what, std::vector<TrainHistoryRow> history)
      : Error(ErrorCode::TrainingDiverged, std::move(what)),
        history(std::move(history)) {}
  std::vector<TrainHistoryRow> history;
};

// Adam + plateau scheduler; deterministic per seed.
TrainResult train(const std::vector<ViewGraph>& train_set,
                  const std::vector<ViewGraph>& val_set,
                  const TrainConfig& config);

std::string checkpoint_to_json(const PosernetParams& params,
                               const TrainConfig& config);
std::pair<PosernetParams, TrainConfig> checkpoint_from_json(
    const std::string& bytes);
void save_checkpoint(const PosernetParams& params, const TrainConfig& config,
                     const std::string& path);
std::pair<PosernetParams, TrainConfig> load_checkpoint(const std::string& path);

std::string history_to_csv(const std::vector<TrainHistoryRow>& history);

// Runs the network on a graph and writes refined poses back to the edges.
ViewGraph refine_graph(const ViewGraph& graph, const PosernetParams& params,
                       int depth, double node_feature_scale = 1000.0);

}  // namespace vgr
