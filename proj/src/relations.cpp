#include "relations.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace situ3d {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct FrameBounds {
    double umin, umax, vmin, vmax;
};

// Axis-aligned bounds of a footprint in the (forward, left) viewer frame.
FrameBounds frame_bounds(const Footprint& fp, const Vec2& fwd, const Vec2& left) {
    FrameBounds b{1e300, -1e300, 1e300, -1e300};
    for (const Vec2& p : fp) {
        double u = p.dot(fwd);
        double v = p.dot(left);
        b.umin = std::min(b.umin, u);
        b.umax = std::max(b.umax, u);
        b.vmin = std::min(b.vmin, v);
        b.vmax = std::max(b.vmax, v);
    }
    return b;
}

// Fraction of the target footprint inside an axis-aligned rectangle of the
// viewer frame. Near-zero footprints fall back to center membership.
double region_fraction(const Footprint& target_fp, const Vec2& fwd, const Vec2& left,
                       double u0, double u1, double v0, double v1) {
    std::vector<Vec2> target;
    target.reserve(4);
    for (const Vec2& p : target_fp) target.push_back({p.dot(fwd), p.dot(left)});
    double area = polygon_area(target);
    if (area < 0.0) {
        std::reverse(target.begin(), target.end());
        area = -area;
    }
    if (area < 1e-12) {
        double cu = (target[0].x + target[2].x) / 2.0;
        double cv = (target[0].y + target[2].y) / 2.0;
        return (cu >= u0 && cu <= u1 && cv >= v0 && cv <= v1) ? 1.0 : 0.0;
    }
    std::vector<Vec2> rect{{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
    std::vector<Vec2> inter = convex_intersection(target, rect);
    if (inter.size() < 3) return 0.0;
    double ia = polygon_area(inter);
    return std::max(ia, 0.0) / area;
}

const ObjectInstance* extreme_among(const std::vector<const ObjectInstance*>& candidates,
                                    const Vec3& anchor, double epsilon, bool nearest) {
    if (candidates.empty()) return nullptr;
    if (candidates.size() == 1) return candidates[0];
    const ObjectInstance* best = nullptr;
    double best_d = 0.0, second_d = 0.0;
    bool have_second = false;
    for (const ObjectInstance* o : candidates) {
        double d = center_distance(o->box.center, anchor);
        bool better = best == nullptr || (nearest ? d < best_d : d > best_d);
        if (better) {
            if (best != nullptr) {
                second_d = best_d;
                have_second = true;
            }
            best = o;
            best_d = d;
        } else if (!have_second || (nearest ? d < second_d : d > second_d)) {
            second_d = d;
            have_second = true;
        }
    }
    double margin = nearest ? second_d - best_d : best_d - second_d;
    return margin > epsilon ? best : nullptr;
}

}  // namespace

void RelationConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string("relations.") + name + " must be > 0");
    };
    positive(epsilon_m, "epsilon_m");
    positive(wr_dist_m, "wr_dist_m");
    positive(ar_dist_m, "ar_dist_m");
    positive(on_gap_m, "on_gap_m");
    positive(allo_depth_m, "allo_depth_m");
    auto ratio = [](double v, const char* name) {
        if (!(v > 0.0 && v <= 1.0))
            throw ConfigError(std::string("relations.") + name + " must be in (0, 1]");
    };
    ratio(min_iou, "min_iou");
    ratio(min_overlap_ratio, "min_overlap_ratio");
    ratio(allo_min_overlap, "allo_min_overlap");
    if (!(dead_zone_deg >= 0.0 && dead_zone_deg < 45.0))
        throw ConfigError("relations.dead_zone_deg must be in [0, 45)");
}

RelationConfig RelationConfig::from_json(const nlohmann::json& block) {
    RelationConfig cfg;
    if (!block.is_object()) throw ConfigError("relations block must be an object");
    auto get = [&](const char* key, double& into) {
        if (block.contains(key)) {
            if (!block[key].is_number())
                throw ConfigError(std::string("relations.") + key + " must be a number");
            into = block[key].get<double>();
        }
    };
    get("epsilon_m", cfg.epsilon_m);
    get("wr_dist_m", cfg.wr_dist_m);
    get("ar_dist_m", cfg.ar_dist_m);
    get("min_iou", cfg.min_iou);
    get("on_gap_m", cfg.on_gap_m);
    get("min_overlap_ratio", cfg.min_overlap_ratio);
    get("dead_zone_deg", cfg.dead_zone_deg);
    get("allo_depth_m", cfg.allo_depth_m);
    get("allo_min_overlap", cfg.allo_min_overlap);
    cfg.validate();
    return cfg;
}

nlohmann::json RelationConfig::to_json() const {
    return {
        {"epsilon_m", epsilon_m},
        {"wr_dist_m", wr_dist_m},
        {"ar_dist_m", ar_dist_m},
        {"min_iou", min_iou},
        {"on_gap_m", on_gap_m},
        {"min_overlap_ratio", min_overlap_ratio},
        {"dead_zone_deg", dead_zone_deg},
        {"allo_depth_m", allo_depth_m},
        {"allo_min_overlap", allo_min_overlap},
    };
}

double center_distance(const Vec3& a, const Vec3& b) {
    return (a - b).norm();
}

double xy_iou(const OrientedBox& a, const OrientedBox& b) {
    if (a.center.x == b.center.x && a.center.y == b.center.y && a.lwh[0] == b.lwh[0] &&
        a.lwh[1] == b.lwh[1] && a.heading == b.heading) {
        return 1.0;
    }
    Footprint fa = footprint(a);
    Footprint fb = footprint(b);
    double inter = intersection_area(fa, fb);
    if (inter <= 1e-12) return 0.0;
    double area_a = a.lwh[0] * a.lwh[1];
    double area_b = b.lwh[0] * b.lwh[1];
    double uni = area_a + area_b - inter;
    if (uni <= 0.0) return 1.0;
    double iou = inter / uni;
    return std::clamp(iou, 0.0, 1.0);
}

const ObjectInstance* closest_among(const std::vector<const ObjectInstance*>& candidates,
                                    const Vec3& anchor, const RelationConfig& cfg) {
    return extreme_among(candidates, anchor, cfg.epsilon_m, true);
}

const ObjectInstance* farthest_among(const std::vector<const ObjectInstance*>& candidates,
                                     const Vec3& anchor, const RelationConfig& cfg) {
    return extreme_among(candidates, anchor, cfg.epsilon_m, false);
}

bool is_within_reach(const ObjectInstance& target, const ObjectInstance& anchor,
                     const RelationConfig& cfg) {
    return center_distance(target.box.center, anchor.box.center) < cfg.wr_dist_m;
}

bool is_around(const ObjectInstance& target, const ObjectInstance& anchor,
               const RelationConfig& cfg) {
    return center_distance(target.box.center, anchor.box.center) < cfg.ar_dist_m;
}

VerticalRelation vertical_relation(const ObjectInstance& target,
                                   const ObjectInstance& anchor,
                                   const RelationConfig& cfg) {
    double iou = xy_iou(target.box, anchor.box);
    double gap = target.box.bottom() - anchor.box.top();
    if (iou > cfg.min_iou && gap >= 0.0 && gap <= cfg.on_gap_m) {
        double overlap = intersection_area(footprint(target.box), footprint(anchor.box));
        double target_area = target.box.lwh[0] * target.box.lwh[1];
        if (target_area > 0.0 && overlap / target_area >= cfg.min_overlap_ratio) {
            return VerticalRelation::on;
        }
    }
    if (gap >= 0.0 && iou > 0.0) return VerticalRelation::above;
    double anchor_gap = anchor.box.bottom() - target.box.top();
    if (anchor_gap >= 0.0 && iou > 0.0) {
        // mirror case: the anchor would be "on" the target, not merely above it
        double overlap = intersection_area(footprint(anchor.box), footprint(target.box));
        double anchor_area = anchor.box.lwh[0] * anchor.box.lwh[1];
        bool anchor_on = iou > cfg.min_iou && anchor_gap <= cfg.on_gap_m &&
                         anchor_area > 0.0 &&
                         overlap / anchor_area >= cfg.min_overlap_ratio;
        if (!anchor_on) return VerticalRelation::below;
    }
    return VerticalRelation::none;
}

std::vector<std::string> allocentric_relations(const ObjectInstance& target,
                                               const ObjectInstance& anchor,
                                               const Vec3& viewer_forward,
                                               const RelationConfig& cfg) {
    Vec2 fwd{viewer_forward.x, viewer_forward.y};
    Vec2 left{-fwd.y, fwd.x};
    Footprint afp = footprint(anchor.box);
    Footprint tfp = footprint(target.box);
    FrameBounds a = frame_bounds(afp, fwd, left);
    double d = cfg.allo_depth_m;

    // Each directional band extends `d` outward from the anchor's side and is
    // widened by `d` laterally so corner placements can earn paired labels
    // (e.g. left + front).
    double front = region_fraction(tfp, fwd, left, a.umax, a.umax + d, a.vmin - d, a.vmax + d);
    double back = region_fraction(tfp, fwd, left, a.umin - d, a.umin, a.vmin - d, a.vmax + d);
    double lf = region_fraction(tfp, fwd, left, a.umin - d, a.umax + d, a.vmax, a.vmax + d);
    double rf = region_fraction(tfp, fwd, left, a.umin - d, a.umax + d, a.vmin - d, a.vmin);

    bool is_left = lf >= cfg.allo_min_overlap;
    bool is_right = rf >= cfg.allo_min_overlap;
    if (is_left && is_right) {
        is_left = lf > rf;
        is_right = rf > lf;
    }
    bool is_front = front >= cfg.allo_min_overlap;
    bool is_back = back >= cfg.allo_min_overlap;
    if (is_front && is_back) {
        is_front = front > back;
        is_back = back > front;
    }

    std::vector<std::string> out;
    if (is_left) out.push_back("left");
    if (is_right) out.push_back("right");
    if (is_front) out.push_back("front");
    if (is_back) out.push_back("back");
    return out;
}

int oclock_sector(double clockwise_deg) {
    double cw = std::fmod(clockwise_deg, 360.0);
    if (cw < 0.0) cw += 360.0;
    int sector = static_cast<int>(std::floor(std::fmod(cw + 15.0, 360.0) / 30.0));
    return sector == 0 ? 12 : sector;
}

std::vector<std::string> egocentric_relations(const Vec3& target_center,
                                              const AgentPose& pose,
                                              const Vec3& forward_axis,
                                              const RelationConfig& cfg,
                                              bool include_oclock) {
    Vec3 fwd = forward_vector(pose.rotation, forward_axis);
    double dx = target_center.x - pose.position.x;
    double dy = target_center.y - pose.position.y;
    if (std::hypot(dx, dy) < 1e-12) {
        throw ApiError("object center coincides with the agent position (zero direction)");
    }
    double theta = std::atan2(dy, dx) - std::atan2(fwd.y, fwd.x);
    double deg = wrap_angle(theta) / kDegToRad;  // ccw-positive, in [-180, 180)
    double dz = cfg.dead_zone_deg;

    std::vector<std::string> out;
    if (deg >= dz && deg <= 180.0 - dz) out.push_back("left");
    if (deg <= -dz && deg >= -180.0 + dz) out.push_back("right");
    if (std::abs(deg) <= 90.0 - dz) out.push_back("front");
    if (std::abs(deg) >= 90.0 + dz) out.push_back("back");
    if (include_oclock) {
        out.push_back(std::to_string(oclock_sector(-deg)) + " o'clock");
    }
    return out;
}

std::vector<std::string> all_relations(const ObjectInstance& target,
                                       const ObjectInstance& reference,
                                       const Scene& scene, const RelationConfig& cfg) {
    if (&target == &reference || target.id == reference.id) {
        throw ApiError("object and reference_object must be different");
    }

    Vec3 viewer;
    if (reference.heading_explicit) {
        viewer = {std::cos(reference.box.heading), std::sin(reference.box.heading), 0.0};
    } else {
        viewer = forward_vector(scene.agent().rotation, scene.forward_axis());
    }

    std::vector<std::string> out = allocentric_relations(target, reference, viewer, cfg);

    switch (vertical_relation(target, reference, cfg)) {
        case VerticalRelation::on: out.push_back("on"); break;
        case VerticalRelation::above: out.push_back("above"); break;
        case VerticalRelation::below: out.push_back("below"); break;
        case VerticalRelation::none: break;
    }

    std::vector<const ObjectInstance*> others;
    for (const ObjectInstance& o : scene.objects()) {
        if (o.id != reference.id) others.push_back(&o);
    }
    const ObjectInstance* nearest = closest_among(others, reference.box.center, cfg);
    const ObjectInstance* extreme = farthest_among(others, reference.box.center, cfg);
    if (nearest && nearest->id == target.id) out.push_back("closest");
    if (extreme && extreme->id == target.id) out.push_back("farthest");
    if (is_within_reach(target, reference, cfg)) out.push_back("within reach");
    if (is_around(target, reference, cfg)) out.push_back("around");
    return out;
}

nlohmann::json relation_table(const Scene& scene, const RelationConfig& cfg) {
    nlohmann::json agent_rel = nlohmann::json::array();
    std::vector<const ObjectInstance*> all;
    for (const ObjectInstance& o : scene.objects()) all.push_back(&o);

    const ObjectInstance* agent_nearest =
        closest_among(all, scene.agent().position, cfg);
    const ObjectInstance* agent_farthest =
        farthest_among(all, scene.agent().position, cfg);

    for (const ObjectInstance& o : scene.objects()) {
        std::vector<std::string> labels = egocentric_relations(
            o.box.center, scene.agent(), scene.forward_axis(), cfg, true);
        double d = center_distance(o.box.center, scene.agent().position);
        if (agent_nearest && agent_nearest->id == o.id) labels.push_back("closest");
        if (agent_farthest && agent_farthest->id == o.id) labels.push_back("farthest");
        if (d < cfg.wr_dist_m) labels.push_back("within reach");
        if (d < cfg.ar_dist_m) labels.push_back("around");
        agent_rel.push_back({{"object_id", o.id}, {"relations", labels}});
    }

    nlohmann::json pairs = nlohmann::json::array();
    for (const ObjectInstance& target : scene.objects()) {
        for (const ObjectInstance& reference : scene.objects()) {
            if (target.id == reference.id) continue;
            pairs.push_back({{"target_id", target.id},
                             {"reference_id", reference.id},
                             {"relations", all_relations(target, reference, scene, cfg)}});
        }
    }
    return {{"scene_id", scene.scene_id()},
            {"agent_relations", std::move(agent_rel)},
            {"object_relations", std::move(pairs)}};
}

}  // namespace situ3d
