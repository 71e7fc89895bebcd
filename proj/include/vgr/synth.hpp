#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vgr/view_graph.hpp"

namespace vgr {

struct SceneConfig {
  int num_cameras = 8;
  int num_objects = 24;
  double room_extent = 2.0;  // half-width of the cubic volume, meters
  double camera_radius_min = 2.5, camera_radius_max = 3.5;  // meters
  double camera_arc_deg = 120.0;  // angular extent of the camera ring
  double camera_height_jitter = 0.3;
  double focal_length = 585.0;  // pixels
  int image_width = 640, image_height = 480;
  std::uint64_t rng_seed = 0;
};

struct NoiseModel {
  double rotation_noise_deg = 0.0;
  double translation_dir_noise_deg = 0.0;
  double bbox_center_noise = 0.0;  // fraction of image
  double bbox_size_noise = 0.0;    // fraction
  double outlier_edge_fraction = 0.0;
};

// Targets the Initial-BB noise regime (median rotation error near 96 deg).
NoiseModel bb_like_noise();
// Targets the Initial-KP noise regime (median rotation error near 36 deg).
NoiseModel kp_like_noise();

struct SceneObject {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.1;  // meters; objects are spheres
};

struct Scene {
  SceneConfig config;
  std::vector<AbsolutePose> cameras;  // world -> camera
  std::vector<SceneObject> objects;
};

// Cameras on a ring shell looking toward the object-cloud centroid;
// deterministic per seed. Every object is visible from >= 2 cameras
// (objects are re-sampled until satisfied, bounded retries).
Scene generate_scene(const SceneConfig& config);

// Projects each visible sphere to its silhouette bounding box. The box
// center is the projection of the sphere center, so matched centers are
// true point correspondences. Boxes leaving the frame or violating the
// 25%-area rule are dropped. Tracks link objects across cameras.
std::pair<std::vector<CameraNode>, std::vector<DetectionTrack>>
project_detections(const Scene& scene);

// Full generator: scene -> detections -> edges (>= min_shared tracks)
// -> connectivity check, regenerating with perturbed seeds until a valid
// connected graph is produced. Edge poses are left unset; ground truth is
// attached.
ViewGraph generate_graph(const SceneConfig& config, int min_shared = 5);

// Sets every edge pose to the ground-truth relative pose perturbed per the
// noise model; floor(outlier_edge_fraction * E) edges are replaced by
// uniformly random poses and flagged. Bounding boxes are jittered by the
// bbox noise terms. Deterministic per seed.
ViewGraph corrupt_edges(const ViewGraph& graph, const NoiseModel& noise,
                        std::uint64_t rng_seed);

// Ground-truth relative pose of an edge, canonical src -> dst direction.
RelativePose ground_truth_edge_pose(const ViewGraph& graph,
                                    const RelativePoseEdge& edge);

}  // namespace vgr
