#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scene.hpp"

namespace situ3d {

/// Geometric thresholds for every relation predicate. The defaults are
/// arbitrary-but-fixed and can be overridden from the `relations` block of
/// the config file.
struct RelationConfig {
    double epsilon_m = 0.05;        // closest/farthest margin
    double wr_dist_m = 1.0;         // "within reach" distance
    double ar_dist_m = 2.0;         // "around" distance
    double min_iou = 0.25;          // XY IoU floor for "on"
    double on_gap_m = 0.20;         // max vertical gap for "on"
    double min_overlap_ratio = 0.30;  // overlap area / target footprint for "on"
    double dead_zone_deg = 22.5;    // egocentric axis dead zone
    double allo_depth_m = 3.0;      // directional region extent
    double allo_min_overlap = 0.50;  // fraction of target footprint inside region

    void validate() const;  // throws ConfigError
    static RelationConfig from_json(const nlohmann::json& block);
    nlohmann::json to_json() const;
};

enum class VerticalRelation { none, on, above, below };

double center_distance(const Vec3& a, const Vec3& b);

/// Intersection over union of the two XY footprints, in [0, 1].
double xy_iou(const OrientedBox& a, const OrientedBox& b);

/// Nearest candidate to `anchor`, but only when it beats the runner-up by
/// more than epsilon. A lone candidate wins unconditionally.
const ObjectInstance* closest_among(const std::vector<const ObjectInstance*>& candidates,
                                    const Vec3& anchor, const RelationConfig& cfg);
const ObjectInstance* farthest_among(const std::vector<const ObjectInstance*>& candidates,
                                     const Vec3& anchor, const RelationConfig& cfg);

bool is_within_reach(const ObjectInstance& target, const ObjectInstance& anchor,
                     const RelationConfig& cfg);
bool is_around(const ObjectInstance& target, const ObjectInstance& anchor,
               const RelationConfig& cfg);

VerticalRelation vertical_relation(const ObjectInstance& target,
                                   const ObjectInstance& anchor,
                                   const RelationConfig& cfg);

/// Directional labels of `target` relative to `anchor` as seen from
/// `viewer_forward` (horizontal unit vector). Subset of
/// {left, right, front, back}; left/right and front/back never pair.
std::vector<std::string> allocentric_relations(const ObjectInstance& target,
                                               const ObjectInstance& anchor,
                                               const Vec3& viewer_forward,
                                               const RelationConfig& cfg);

/// Direction labels of a point relative to the agent's own facing.
/// Canonical order left, right, front, back, then the o'clock sector.
/// Throws ApiError when the point coincides with the agent position.
std::vector<std::string> egocentric_relations(const Vec3& target_center,
                                              const AgentPose& pose,
                                              const Vec3& forward_axis,
                                              const RelationConfig& cfg,
                                              bool include_oclock);

/// Clock sector (1..12) for a clockwise angle from straight ahead, degrees.
int oclock_sector(double clockwise_deg);

/// Every relation between target and reference: allocentric, vertical, then
/// horizontal (closest, farthest, within reach, around). closest/farthest
/// are judged against all other scene objects. The viewer frame is the
/// reference's own heading when explicit, otherwise the agent's facing.
/// Throws ApiError when target == reference.
std::vector<std::string> all_relations(const ObjectInstance& target,
                                       const ObjectInstance& reference,
                                       const Scene& scene, const RelationConfig& cfg);

/// Full pairwise relation table plus agent-relative labels, used by the
/// `relations` CLI subcommand and the invariance tests.
nlohmann::json relation_table(const Scene& scene, const RelationConfig& cfg);

}  // namespace situ3d
