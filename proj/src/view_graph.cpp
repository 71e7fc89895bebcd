#include "vgr/view_graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vgr {

using nlohmann::json;

const CameraNode* ViewGraph::find_node(int node_id) const {
  for (const auto& n : nodes) {
    if (n.node_id == node_id) return &n;
  }
  return nullptr;
}

int ViewGraph::node_index(int node_id) const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].node_id == node_id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<RelativePoseEdge> build_edges(
    const std::vector<CameraNode>& nodes,
    const std::vector<DetectionTrack>& tracks, int min_shared) {
  std::set<int> node_ids;
  for (const auto& n : nodes) node_ids.insert(n.node_id);

  // shared[{i,j}] = track ids observed by both i and j
  std::map<std::pair<int, int>, std::vector<int>> shared;
  for (const auto& t : tracks) {
    std::vector<int> ids;
    for (const auto& [nid, det] : t.observations) {
      (void)det;
      if (!node_ids.count(nid)) {
        throw Error(ErrorCode::InvalidInput,
                    "track references unknown node");
      }
      ids.push_back(nid);
    }
    std::sort(ids.begin(), ids.end());
    for (size_t a = 0; a < ids.size(); ++a) {
      for (size_t b = a + 1; b < ids.size(); ++b) {
        shared[{ids[a], ids[b]}].push_back(t.track_id);
      }
    }
  }

  std::vector<RelativePoseEdge> edges;
  for (auto& [pair, track_ids] : shared) {
    if (static_cast<int>(track_ids.size()) < min_shared) continue;
    RelativePoseEdge e;
    e.src = pair.first;
    e.dst = pair.second;
    std::sort(track_ids.begin(), track_ids.end());
    e.shared_tracks = track_ids;
    edges.push_back(std::move(e));
  }
  // std::map iteration is already (src, dst) ordered; keep it explicit.
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.src, a.dst) < std::make_pair(b.src, b.dst);
  });
  return edges;
}

ConnectivityReport validate_connectivity(const ViewGraph& graph) {
  ConnectivityReport report;
  if (graph.nodes.empty()) {
    report.ok = true;
    return report;
  }
  std::map<int, std::vector<int>> adj;
  for (const auto& n : graph.nodes) adj[n.node_id];
  for (const auto& e : graph.edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::set<int> unvisited;
  for (const auto& n : graph.nodes) unvisited.insert(n.node_id);
  while (!unvisited.empty()) {
    std::vector<int> component;
    std::queue<int> frontier;
    frontier.push(*unvisited.begin());
    unvisited.erase(unvisited.begin());
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      component.push_back(v);
      for (int u : adj[v]) {
        if (unvisited.erase(u)) frontier.push(u);
      }
    }
    std::sort(component.begin(), component.end());
    report.components.push_back(std::move(component));
  }
  report.ok = report.components.size() == 1;
  return report;
}

void validate_graph(const ViewGraph& graph) {
  std::set<int> node_ids;
  for (const auto& n : graph.nodes) {
    if (!node_ids.insert(n.node_id).second) {
      throw Error(ErrorCode::LoadError, "duplicate node id");
    }
    if (n.image_width <= 0 || n.image_height <= 0) {
      throw Error(ErrorCode::LoadError, "non-positive image dimensions");
    }
    if (!(n.focal_length > 0.0)) {
      throw Error(ErrorCode::LoadError, "non-positive focal length");
    }
    for (const auto& b : n.detections) {
      const double tol = 1e-6;
      if (b.width <= 0.0 || b.height <= 0.0 || b.width > 1.0 ||
          b.height > 1.0 ||
          b.center_x - 0.5 * b.width < -tol ||
          b.center_x + 0.5 * b.width > 1.0 + tol ||
          b.center_y - 0.5 * b.height < -tol ||
          b.center_y + 0.5 * b.height > 1.0 + tol) {
        throw Error(ErrorCode::LoadError, "bounding box outside unit square");
      }
      if (b.area() > 0.25) {
        throw Error(ErrorCode::LoadError,
                    "bounding box larger than 25% of image area");
      }
    }
  }
  std::set<int> track_ids;
  for (const auto& t : graph.tracks) {
    if (!track_ids.insert(t.track_id).second) {
      throw Error(ErrorCode::LoadError, "duplicate track id");
    }
    if (t.observations.size() < 2) {
      throw Error(ErrorCode::LoadError, "track with fewer than 2 observations");
    }
    for (const auto& [nid, det] : t.observations) {
      const CameraNode* n = graph.find_node(nid);
      if (!n) {
        throw Error(ErrorCode::LoadError, "track references unknown node");
      }
      if (det < 0 || det >= static_cast<int>(n->detections.size())) {
        throw Error(ErrorCode::LoadError,
                    "track references unknown detection");
      }
    }
  }
  std::set<std::pair<int, int>> edge_pairs;
  for (const auto& e : graph.edges) {
    if (e.src >= e.dst) {
      throw Error(ErrorCode::LoadError, "edge not in canonical src<dst order");
    }
    if (!node_ids.count(e.src) || !node_ids.count(e.dst)) {
      throw Error(ErrorCode::LoadError, "edge references unknown node");
    }
    if (!edge_pairs.insert({e.src, e.dst}).second) {
      throw Error(ErrorCode::LoadError, "duplicate edge");
    }
    for (int tid : e.shared_tracks) {
      if (!track_ids.count(tid)) {
        throw Error(ErrorCode::LoadError, "edge references unknown track");
      }
    }
  }
  for (const auto& [nid, pose] : graph.ground_truth) {
    (void)pose;
    if (!node_ids.count(nid)) {
      throw Error(ErrorCode::LoadError, "ground truth for unknown node");
    }
  }
}

namespace {

json quat_to_json(const UnitQuaternion& q) {
  return json{{"w", q.w}, {"x", q.x}, {"y", q.y}, {"z", q.z}};
}

UnitQuaternion quat_from_json(const json& j) {
  return UnitQuaternion{j.at("w").get<double>(), j.at("x").get<double>(),
                        j.at("y").get<double>(), j.at("z").get<double>()};
}

json vec3_to_json(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::LoadError, "malformed 3-vector");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose_map_to_json(const std::map<int, AbsolutePose>& poses) {
  json j = json::object();
  for (const auto& [nid, p] : poses) {
    j[std::to_string(nid)] = json{{"rotation", quat_to_json(p.rotation)},
                                  {"translation", vec3_to_json(p.translation)}};
  }
  return j;
}

std::map<int, AbsolutePose> pose_map_from_json(const json& j) {
  std::map<int, AbsolutePose> poses;
  for (auto it = j.begin(); it != j.end(); ++it) {
    AbsolutePose p;
    p.rotation = quat_from_json(it.value().at("rotation"));
    p.translation = vec3_from_json(it.value().at("translation"));
    poses[std::stoi(it.key())] = p;
  }
  return poses;
}

constexpr int kSchemaVersion = 1;

}  // namespace

std::string serialize(const ViewGraph& graph) {
  json j;
  j["version"] = kSchemaVersion;
  j["nodes"] = json::array();
  for (const auto& n : graph.nodes) {
    json dets = json::array();
    for (const auto& b : n.detections) {
      dets.push_back(json{{"center_x", b.center_x},
                          {"center_y", b.center_y},
                          {"width", b.width},
                          {"height", b.height}});
    }
    j["nodes"].push_back(json{{"node_id", n.node_id},
                              {"image_width", n.image_width},
                              {"image_height", n.image_height},
                              {"focal_length", n.focal_length},
                              {"radial_k1", n.radial_k1},
                              {"detections", dets}});
  }
  j["tracks"] = json::array();
  for (const auto& t : graph.tracks) {
    json obs = json::object();
    for (const auto& [nid, det] : t.observations) {
      obs[std::to_string(nid)] = det;
    }
    j["tracks"].push_back(json{{"track_id", t.track_id},
                               {"observations", obs}});
  }
  j["edges"] = json::array();
  for (const auto& e : graph.edges) {
    json je{{"src", e.src},
            {"dst", e.dst},
            {"shared_tracks", e.shared_tracks}};
    if (e.pose) {
      je["pose"] = json{{"rotation", quat_to_json(e.pose->rotation)},
                        {"translation_dir", vec3_to_json(e.pose->translation_dir)}};
    }
    if (e.outlier) je["outlier"] = true;
    j["edges"].push_back(std::move(je));
  }
  if (!graph.ground_truth.empty()) {
    j["ground_truth"] = pose_map_to_json(graph.ground_truth);
  }
  if (!graph.estimated_poses.empty()) {
    j["estimated_poses"] = pose_map_to_json(graph.estimated_poses);
  }
  return j.dump(2);
}

ViewGraph deserialize(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::LoadError, std::string("malformed document: ") +
                                          e.what());
  }
  try {
    if (!j.contains("version") || j["version"].get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::LoadError, "schema-version mismatch");
    }
    ViewGraph g;
    for (const auto& jn : j.at("nodes")) {
      CameraNode n;
      n.node_id = jn.at("node_id").get<int>();
      n.image_width = jn.at("image_width").get<int>();
      n.image_height = jn.at("image_height").get<int>();
      n.focal_length = jn.at("focal_length").get<double>();
      n.radial_k1 = jn.at("radial_k1").get<double>();
      for (const auto& jb : jn.at("detections")) {
        BoundingBox b;
        b.center_x = jb.at("center_x").get<double>();
        b.center_y = jb.at("center_y").get<double>();
        b.width = jb.at("width").get<double>();
        b.height = jb.at("height").get<double>();
        n.detections.push_back(b);
      }
      g.nodes.push_back(std::move(n));
    }
    for (const auto& jt : j.at("tracks")) {
      DetectionTrack t;
      t.track_id = jt.at("track_id").get<int>();
      const auto& obs = jt.at("observations");
      for (auto it = obs.begin(); it != obs.end(); ++it) {
        t.observations[std::stoi(it.key())] = it.value().get<int>();
      }
      g.tracks.push_back(std::move(t));
    }
    for (const auto& je : j.at("edges")) {
      RelativePoseEdge e;
      e.src = je.at("src").get<int>();
      e.dst = je.at("dst").get<int>();
      e.shared_tracks = je.at("shared_tracks").get<std::vector<int>>();
      if (je.contains("pose")) {
        RelativePose p;
        p.rotation = quat_from_json(je.at("pose").at("rotation"));
        p.translation_dir = vec3_from_json(je.at("pose").at("translation_dir"));
        e.pose = p;
      }
      if (je.contains("outlier")) e.outlier = je.at("outlier").get<bool>();
      g.edges.push_back(std::move(e));
    }
    if (j.contains("ground_truth")) {
      g.ground_truth = pose_map_from_json(j["ground_truth"]);
    }
    if (j.contains("estimated_poses")) {
      g.estimated_poses = pose_map_from_json(j["estimated_poses"]);
    }
    validate_graph(g);
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::LoadError, std::string("malformed document: ") +
                                          e.what());
  }
}

void save_graph(const ViewGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << serialize(graph);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

ViewGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace vgr
