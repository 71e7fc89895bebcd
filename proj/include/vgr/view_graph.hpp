#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgr/se3.hpp"

namespace vgr {

// Box in normalized image coordinates: center/size divided by image
// width/height. Detections covering more than 25% of the image area are
// rejected at ingest.
struct BoundingBox {
  double center_x = 0.5, center_y = 0.5;
  double width = 0.1, height = 0.1;

  double area() const { return width * height; }
};

struct CameraNode {
  int node_id = 0;
  int image_width = 0, image_height = 0;
  double focal_length = 0.0;  // pixels
  double radial_k1 = 0.0;
  std::vector<BoundingBox> detections;
};

// One matched bounding box across >= 2 nodes; node_id -> detection index.
struct DetectionTrack {
  int track_id = 0;
  std::map<int, int> observations;
};

// Canonical traversal direction src < dst; reading dst -> src yields
// invert_relative(pose).
struct RelativePoseEdge {
  int src = 0, dst = 0;
  std::optional<RelativePose> pose;
  std::vector<int> shared_tracks;
  bool outlier = false;  // set by the synthetic corrupter, diagnostics only
};

struct ViewGraph {
  std::vector<CameraNode> nodes;
  std::vector<DetectionTrack> tracks;
  std::vector<RelativePoseEdge> edges;
  std::map<int, AbsolutePose> ground_truth;
  std::map<int, AbsolutePose> estimated_poses;

  const CameraNode* find_node(int node_id) const;
  int node_index(int node_id) const;  // -1 if absent
};

// One edge per unordered node pair sharing >= min_shared tracks, poses
// unset, ordered by (src, dst).
std::vector<RelativePoseEdge> build_edges(
    const std::vector<CameraNode>& nodes,
    const std::vector<DetectionTrack>& tracks, int min_shared = 5);

struct ConnectivityReport {
  bool ok = false;
  std::vector<std::vector<int>> components;  // node_ids, on failure
};

ConnectivityReport validate_connectivity(const ViewGraph& graph);

// Throws Error(LoadError) naming the first violated invariant.
void validate_graph(const ViewGraph& graph);

std::string serialize(const ViewGraph& graph);
ViewGraph deserialize(const std::string& bytes);

void save_graph(const ViewGraph& graph, const std::string& path);
ViewGraph load_graph(const std::string& path);

}  // namespace vgr
