#include "vgr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vgr {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

Eigen::Vector3d uniform_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-9);
  return v.normalized();
}

UnitQuaternion uniform_rotation(std::mt19937_64& rng) {
  // Shoemake's method via four normals.
  std::normal_distribution<double> n(0.0, 1.0);
  return UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng));
}

double half_normal_angle_deg(std::mt19937_64& rng, double sigma_deg) {
  if (sigma_deg <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, sigma_deg);
  return std::min(std::abs(n(rng)), 180.0);
}

AbsolutePose look_at(const Eigen::Vector3d& camera_center,
                     const Eigen::Vector3d& target) {
  Eigen::Vector3d forward = (target - camera_center).normalized();
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d x_cam = forward.cross(up).normalized();
  const Eigen::Vector3d y_cam = forward.cross(x_cam).normalized();
  Eigen::Matrix3d r;
  r.row(0) = x_cam;
  r.row(1) = y_cam;
  r.row(2) = forward;
  AbsolutePose pose;
  pose.rotation = UnitQuaternion::from_matrix(r);
  pose.translation = -(r * camera_center);
  return pose;
}

// Silhouette box of a sphere, normalized coordinates; nullopt when the
// sphere is behind the camera, clipped by the frame, or over the 25% rule.
std::optional<BoundingBox> project_sphere(const SceneConfig& cfg,
                                          const AbsolutePose& camera,
                                          const SceneObject& obj) {
  const Eigen::Vector3d p =
      camera.rotation.rotate(obj.center) + camera.translation;
  if (p.z() < 2.0 * obj.radius || p.z() < 0.1) return std::nullopt;
  const double u = cfg.focal_length * p.x() / p.z() + 0.5 * cfg.image_width;
  const double v = cfg.focal_length * p.y() / p.z() + 0.5 * cfg.image_height;
  const double half = cfg.focal_length * obj.radius / p.z();
  if (u - half < 0.0 || u + half > cfg.image_width || v - half < 0.0 ||
      v + half > cfg.image_height) {
    return std::nullopt;
  }
  BoundingBox b;
  b.center_x = u / cfg.image_width;
  b.center_y = v / cfg.image_height;
  b.width = 2.0 * half / cfg.image_width;
  b.height = 2.0 * half / cfg.image_height;
  if (b.area() > 0.25) return std::nullopt;
  return b;
}

int count_visible(const SceneConfig& cfg,
                  const std::vector<AbsolutePose>& cameras,
                  const SceneObject& obj) {
  int count = 0;
  for (const auto& cam : cameras) {
    if (project_sphere(cfg, cam, obj)) ++count;
  }
  return count;
}

}  // namespace

NoiseModel bb_like_noise() {
  // Half-normal sigma chosen so the median perturbation angle lands near
  // the Initial-BB medians (96.5 deg rotation, 89.3 deg direction).
  return NoiseModel{143.0, 132.4, 0.02, 0.02, 0.0};
}

NoiseModel kp_like_noise() {
  // Medians near 36.3 deg rotation, 87.2 deg direction.
  return NoiseModel{53.8, 129.3, 0.005, 0.005, 0.0};
}

Scene generate_scene(const SceneConfig& config) {
  if (config.num_cameras < 2 || config.num_objects < 5 ||
      config.room_extent <= 0.0 || config.camera_radius_min <= 0.0 ||
      config.camera_radius_max < config.camera_radius_min) {
    throw Error(ErrorCode::InvalidInput, "invalid scene config");
  }
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scene scene;
  scene.config = config;

  // Object cluster around the room center.
  const double cluster_radius = 0.35 * config.room_extent;
  std::uniform_real_distribution<double> obj_radius(0.05, 0.12);
  for (int i = 0; i < config.num_objects; ++i) {
    SceneObject obj;
    obj.center = cluster_radius * std::pow(unit(rng), 1.0 / 3.0) *
                 uniform_unit_vector(rng);
    obj.radius = obj_radius(rng);
    scene.objects.push_back(obj);
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& o : scene.objects) centroid += o.center;
  centroid /= static_cast<double>(scene.objects.size());

  const double arc = config.camera_arc_deg * kDegToRad;
  std::uniform_real_distribution<double> radius_dist(config.camera_radius_min,
                                                     config.camera_radius_max);
  std::uniform_real_distribution<double> height(-config.camera_height_jitter,
                                                config.camera_height_jitter);
  std::uniform_real_distribution<double> target_jitter(-0.05, 0.05);
  for (int i = 0; i < config.num_cameras; ++i) {
    const double theta = arc * unit(rng);
    const double r = radius_dist(rng);
    const Eigen::Vector3d c(r * std::cos(theta), r * std::sin(theta),
                            height(rng));
    const Eigen::Vector3d target =
        centroid + Eigen::Vector3d(target_jitter(rng), target_jitter(rng),
                                   target_jitter(rng));
    scene.cameras.push_back(look_at(c, target));
  }

  // Re-sample objects until each is visible from at least two cameras.
  for (auto& obj : scene.objects) {
    int attempts = 0;
    while (count_visible(config, scene.cameras, obj) < 2) {
      if (++attempts > 1000) {
        throw Error(ErrorCode::GenerationError,
                    "visibility constraint unsatisfiable");
      }
      obj.center = cluster_radius * std::pow(unit(rng), 1.0 / 3.0) *
                   uniform_unit_vector(rng);
      obj.radius = obj_radius(rng);
    }
  }
  return scene;
}

std::pair<std::vector<CameraNode>, std::vector<DetectionTrack>>
project_detections(const Scene& scene) {
  const SceneConfig& cfg = scene.config;
  std::vector<CameraNode> nodes(scene.cameras.size());
  std::vector<DetectionTrack> tracks;
  std::vector<std::map<int, int>> observations(scene.objects.size());

  for (size_t ci = 0; ci < scene.cameras.size(); ++ci) {
    CameraNode& n = nodes[ci];
    n.node_id = static_cast<int>(ci);
    n.image_width = cfg.image_width;
    n.image_height = cfg.image_height;
    n.focal_length = cfg.focal_length;
    n.radial_k1 = 0.0;
    for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
      if (auto box = project_sphere(cfg, scene.cameras[ci], scene.objects[oi])) {
        observations[oi][n.node_id] = static_cast<int>(n.detections.size());
        n.detections.push_back(*box);
      }
    }
  }
  for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
    if (observations[oi].size() < 2) continue;
    DetectionTrack t;
    t.track_id = static_cast<int>(oi);
    t.observations = observations[oi];
    tracks.push_back(std::move(t));
  }
  return {std::move(nodes), std::move(tracks)};
}

ViewGraph generate_graph(const SceneConfig& config, int min_shared) {
  SceneConfig cfg = config;
  for (int attempt = 0; attempt < 50; ++attempt) {
    cfg.rng_seed = config.rng_seed + 0x9e3779b97f4a7c15ull * attempt;
    Scene scene = generate_scene(cfg);
    ViewGraph g;
    std::tie(g.nodes, g.tracks) = project_detections(scene);
    g.edges = build_edges(g.nodes, g.tracks, min_shared);
    for (size_t i = 0; i < scene.cameras.size(); ++i) {
      g.ground_truth[static_cast<int>(i)] = scene.cameras[i];
    }
    if (validate_connectivity(g).ok) {
      validate_graph(g);
      return g;
    }
  }
  throw Error(ErrorCode::GenerationError,
              "could not generate a connected graph");
}

RelativePose ground_truth_edge_pose(const ViewGraph& graph,
                                    const RelativePoseEdge& edge) {
  const auto src_it = graph.ground_truth.find(edge.src);
  const auto dst_it = graph.ground_truth.find(edge.dst);
  if (src_it == graph.ground_truth.end() ||
      dst_it == graph.ground_truth.end()) {
    throw Error(ErrorCode::InvalidInput, "edge endpoints missing ground truth");
  }
  return relative_pose(src_it->second, dst_it->second);
}

ViewGraph corrupt_edges(const ViewGraph& graph, const NoiseModel& noise,
                        std::uint64_t rng_seed) {
  if (graph.ground_truth.empty()) {
    throw Error(ErrorCode::InvalidInput, "graph carries no ground truth");
  }
  std::mt19937_64 rng(rng_seed);
  ViewGraph out = graph;

  // Outlier selection: seeded shuffle, first floor(f*E) indices.
  std::vector<size_t> order(out.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t num_outliers = static_cast<size_t>(
      noise.outlier_edge_fraction * static_cast<double>(out.edges.size()));
  std::vector<bool> is_outlier(out.edges.size(), false);
  for (size_t k = 0; k < num_outliers; ++k) is_outlier[order[k]] = true;

  for (size_t ei = 0; ei < out.edges.size(); ++ei) {
    RelativePoseEdge& e = out.edges[ei];
    e.outlier = is_outlier[ei];
    if (e.outlier) {
      e.pose = RelativePose{uniform_rotation(rng), uniform_unit_vector(rng)};
      continue;
    }
    RelativePose gt = ground_truth_edge_pose(out, e);
    const double rot_angle =
        half_normal_angle_deg(rng, noise.rotation_noise_deg) * kDegToRad;
    const UnitQuaternion perturb =
        UnitQuaternion::from_axis_angle(uniform_unit_vector(rng), rot_angle);
    const UnitQuaternion q = quat_compose(perturb, gt.rotation);

    // Tilt the direction about a random perpendicular axis.
    const double tilt =
        half_normal_angle_deg(rng, noise.translation_dir_noise_deg) * kDegToRad;
    Eigen::Vector3d axis = uniform_unit_vector(rng);
    axis = (axis - axis.dot(gt.translation_dir) * gt.translation_dir);
    while (axis.norm() < 1e-9) {
      axis = uniform_unit_vector(rng);
      axis = (axis - axis.dot(gt.translation_dir) * gt.translation_dir);
    }
    const Eigen::Vector3d dir =
        (UnitQuaternion::from_axis_angle(axis, tilt).rotate(
             gt.translation_dir))
            .normalized();
    e.pose = RelativePose{q, dir};
  }

  if (noise.bbox_center_noise > 0.0 || noise.bbox_size_noise > 0.0) {
    std::normal_distribution<double> nc(0.0, noise.bbox_center_noise);
    std::normal_distribution<double> ns(0.0, noise.bbox_size_noise);
    for (auto& node : out.nodes) {
      for (auto& b : node.detections) {
        b.width = std::clamp(b.width * (1.0 + ns(rng)), 1e-4, 0.5);
        b.height = std::clamp(b.height * (1.0 + ns(rng)), 1e-4,
                              0.25 / b.width);
        b.center_x = std::clamp(b.center_x + nc(rng), 0.5 * b.width,
                                1.0 - 0.5 * b.width);
        b.center_y = std::clamp(b.center_y + nc(rng), 0.5 * b.height,
                                1.0 - 0.5 * b.height);
      }
    }
  }
  return out;
}

}  // namespace vgr
