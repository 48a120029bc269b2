#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "geometry.hpp"

namespace situ3d {

/// One annotated object. `heading_explicit` records whether the scene file
/// supplied a heading (axis-aligned boxes default to 0 without one).
struct ObjectInstance {
    int id = 0;
    std::string category;
    OrientedBox box;
    bool heading_explicit = false;
    std::map<std::string, std::string> attributes;  // color/shape/material/state
};

struct AgentPose {
    Vec3 position;
    Quaternion rotation;
};

/// Immutable annotated scene. Objects iterate in ascending id; that order
/// is the determinism contract for everything built on top.
class Scene {
  public:
    Scene() = default;
    Scene(std::string scene_id, std::vector<ObjectInstance> objects, AgentPose agent,
          Vec3 forward_axis = {1.0, 0.0, 0.0});

    const std::string& scene_id() const { return scene_id_; }
    const std::vector<ObjectInstance>& objects() const { return objects_; }
    const AgentPose& agent() const { return agent_; }
    const Vec3& forward_axis() const { return forward_axis_; }

    const ObjectInstance* find(int id) const;

    /// Deterministic dump used for purity checks and debugging.
    nlohmann::json canonical_json() const;

    /// Copy with the agent pose replaced (per-question situations).
    Scene with_agent(const AgentPose& pose) const;

  private:
    std::string scene_id_;
    std::vector<ObjectInstance> objects_;  // sorted by id
    AgentPose agent_;
    Vec3 forward_axis_{1.0, 0.0, 0.0};
};

/// Parses and validates a scene file. Throws LoadError naming the offending
/// object id/field. Quaternions are renormalized and sign-canonicalized.
Scene load_scene(const std::string& bytes);
Scene scene_from_json(const nlohmann::json& doc);
Scene load_scene_file(const std::string& path);

}  // namespace situ3d
