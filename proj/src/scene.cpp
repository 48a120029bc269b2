#include "scene.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace situ3d {

namespace {

const std::set<std::string> kAttributeKeys = {"color", "shape", "material", "state"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

double require_finite(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw LoadError(where + ": expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw LoadError(where + ": value must be finite");
    return d;
}

Vec3 parse_vec3(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3)
        throw LoadError(where + ": expected an array of 3 numbers");
    return {require_finite(v[0], where), require_finite(v[1], where),
            require_finite(v[2], where)};
}

Quaternion parse_quat(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 4)
        throw LoadError(where + ": expected an array of 4 numbers [qx,qy,qz,qw]");
    Quaternion q{require_finite(v[0], where), require_finite(v[1], where),
                 require_finite(v[2], where), require_finite(v[3], where)};
    if (q.norm() < 1e-6) throw LoadError(where + ": quaternion norm too small");
    return q.normalized().canonical();
}

}  // namespace

Scene::Scene(std::string scene_id, std::vector<ObjectInstance> objects, AgentPose agent,
             Vec3 forward_axis)
    : scene_id_(std::move(scene_id)),
      objects_(std::move(objects)),
      agent_(agent),
      forward_axis_(forward_axis) {
    std::sort(objects_.begin(), objects_.end(),
              [](const ObjectInstance& a, const ObjectInstance& b) { return a.id < b.id; });
}

const ObjectInstance* Scene::find(int id) const {
    auto it = std::lower_bound(
        objects_.begin(), objects_.end(), id,
        [](const ObjectInstance& o, int key) { return o.id < key; });
    if (it == objects_.end() || it->id != id) return nullptr;
    return &*it;
}

nlohmann::json Scene::canonical_json() const {
    nlohmann::json objs = nlohmann::json::array();
    for (const ObjectInstance& o : objects_) {
        nlohmann::json jo{
            {"id", o.id},
            {"category", o.category},
            {"center", {o.box.center.x, o.box.center.y, o.box.center.z}},
            {"lwh", {o.box.lwh[0], o.box.lwh[1], o.box.lwh[2]}},
            {"heading", o.box.heading},
            {"heading_explicit", o.heading_explicit},
        };
        nlohmann::json attrs = nlohmann::json::object();
        for (const auto& [k, v] : o.attributes) attrs[k] = v;
        jo["attributes"] = attrs;
        objs.push_back(std::move(jo));
    }
    return nlohmann::json{
        {"scene_id", scene_id_},
        {"forward_axis", {forward_axis_.x, forward_axis_.y, forward_axis_.z}},
        {"agent",
         {{"position", {agent_.position.x, agent_.position.y, agent_.position.z}},
          {"rotation",
           {agent_.rotation.x, agent_.rotation.y, agent_.rotation.z, agent_.rotation.w}}}},
        {"objects", std::move(objs)},
    };
}

Scene Scene::with_agent(const AgentPose& pose) const {
    Scene copy = *this;
    copy.agent_.position = pose.position;
    copy.agent_.rotation = pose.rotation.normalized().canonical();
    return copy;
}

Scene scene_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw LoadError("scene file: top level must be an object");
    if (!doc.contains("scene_id") || !doc["scene_id"].is_string())
        throw LoadError("scene file: missing string field 'scene_id'");
    if (!doc.contains("agent") || !doc["agent"].is_object())
        throw LoadError("scene file: missing object field 'agent'");
    if (!doc.contains("objects") || !doc["objects"].is_array())
        throw LoadError("scene file: missing array field 'objects'");

    const nlohmann::json& ja = doc["agent"];
    if (!ja.contains("position")) throw LoadError("agent: missing field 'position'");
    if (!ja.contains("rotation")) throw LoadError("agent: missing field 'rotation'");
    AgentPose agent{parse_vec3(ja["position"], "agent.position"),
                    parse_quat(ja["rotation"], "agent.rotation")};

    Vec3 axis{1.0, 0.0, 0.0};
    if (doc.contains("forward_axis")) {
        axis = parse_vec3(doc["forward_axis"], "forward_axis");
        double n = axis.norm();
        if (n < 1e-9) throw LoadError("forward_axis: must be non-zero");
        axis = axis * (1.0 / n);
    }

    std::vector<ObjectInstance> objects;
    std::set<int> seen;
    for (const nlohmann::json& jo : doc["objects"]) {
        if (!jo.is_object()) throw LoadError("objects: entries must be objects");
        if (!jo.contains("id") || !jo["id"].is_number_integer())
            throw LoadError("objects: entry missing integer field 'id'");
        int id = jo["id"].get<int>();
        std::string where = "object " + std::to_string(id);
        if (id < 0) throw LoadError(where + ": id must be non-negative");
        if (!seen.insert(id).second) throw LoadError(where + ": duplicate id");

        if (!jo.contains("category") || !jo["category"].is_string())
            throw LoadError(where + ": missing string field 'category'");
        std::string category = lower(jo["category"].get<std::string>());
        if (category.empty()) throw LoadError(where + ": category must be non-empty");

        if (!jo.contains("center")) throw LoadError(where + ": missing field 'center'");
        if (!jo.contains("lwh")) throw LoadError(where + ": missing field 'lwh'");
        const nlohmann::json& jl = jo["lwh"];
        if (!jl.is_array() || jl.size() != 3)
            throw LoadError(where + ": lwh must be an array of 3 numbers");

        ObjectInstance obj;
        obj.id = id;
        obj.category = std::move(category);
        obj.box.center = parse_vec3(jo["center"], where + ".center");
        for (int i = 0; i < 3; ++i) {
            double d = require_finite(jl[i], where + ".lwh");
            if (d <= 0.0)
                throw LoadError(where + ": lwh[" + std::to_string(i) + "] must be > 0");
            obj.box.lwh[i] = d;
        }
        if (jo.contains("heading") && !jo["heading"].is_null()) {
            obj.box.heading = wrap_angle(require_finite(jo["heading"], where + ".heading"));
            obj.heading_explicit = true;
        }
        if (jo.contains("attributes")) {
            const nlohmann::json& jattrs = jo["attributes"];
            if (!jattrs.is_object())
                throw LoadError(where + ": attributes must be an object");
            for (auto it = jattrs.begin(); it != jattrs.end(); ++it) {
                if (!kAttributeKeys.count(it.key()))
                    throw LoadError(where + ": unknown attribute key '" + it.key() + "'");
                if (!it.value().is_string())
                    throw LoadError(where + ": attribute '" + it.key() +
                                    "' must be a string");
                obj.attributes[it.key()] = it.value().get<std::string>();
            }
        }
        objects.push_back(std::move(obj));
    }

    return Scene(doc["scene_id"].get<std::string>(), std::move(objects), agent, axis);
}

Scene load_scene(const std::string& bytes) {
    nlohmann::json doc = nlohmann::json::parse(bytes, nullptr, false);
    if (doc.is_discarded()) throw LoadError("scene file: invalid JSON");
    return scene_from_json(doc);
}

Scene load_scene_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open scene file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str());
}

}  // namespace situ3d
