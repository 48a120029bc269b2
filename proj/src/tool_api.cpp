#include "tool_api.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "errors.hpp"

namespace situ3d {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string quote_list(const std::vector<std::string>& items) {
    std::ostringstream ss;
    ss << "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) ss << ", ";
        ss << "'" << items[i] << "'";
    }
    ss << "]";
    return ss.str();
}

// "<n> o'clock" with n in 1..12
std::optional<int> parse_oclock(const std::string& token) {
    size_t pos = token.find(" o'clock");
    if (pos == std::string::npos || pos + 8 != token.size() || pos == 0) return std::nullopt;
    int n = 0;
    for (size_t i = 0; i < pos; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(token[i]))) return std::nullopt;
        n = n * 10 + (token[i] - '0');
    }
    if (n < 1 || n > 12) return std::nullopt;
    return n;
}

ObjectSet sorted_by_id(ObjectSet set) {
    std::sort(set.begin(), set.end(),
              [](const ObjectInstance* a, const ObjectInstance* b) { return a->id < b->id; });
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

}  // namespace

ToolApi::ToolApi(const Scene& scene, RelationConfig relations, ApiOptions options,
                 AttributeClassifierHook hook)
    : scene_(&scene),
      relations_(relations),
      options_(std::move(options)),
      hook_(std::move(hook)) {}

const std::vector<std::string>& ToolApi::object_relation_vocabulary() {
    static const std::vector<std::string> vocab = {
        "left", "right", "front", "back", "on",           "above",
        "below", "closest", "farthest", "within reach", "around"};
    return vocab;
}

const std::vector<std::string>& ToolApi::agent_relation_vocabulary() {
    static const std::vector<std::string> vocab = {
        "left", "right", "front", "back", "closest", "farthest", "within reach", "around"};
    return vocab;
}

const std::vector<std::string>& ToolApi::attribute_types() {
    static const std::vector<std::string> kinds = {"lwh", "distance", "color", "shape",
                                                   "material"};
    return kinds;
}

std::optional<std::string> ToolApi::canonical_relation(const std::string& token) {
    std::string t = lower(token);
    if (t == "behind") return "back";
    if (t == "in front" || t == "in front of") return "front";
    if (t == "close") return "within reach";
    if (t == "o'clock") return "o'clock";
    if (parse_oclock(t)) return t;
    const auto& vocab = object_relation_vocabulary();
    if (std::find(vocab.begin(), vocab.end(), t) != vocab.end()) return t;
    return std::nullopt;
}

ObjectSet ToolApi::scene_all() const {
    ObjectSet out;
    out.reserve(scene_->objects().size());
    for (const ObjectInstance& o : scene_->objects()) out.push_back(&o);
    return out;
}

ObjectSet ToolApi::filter(const ObjectSet& objects, const std::string& category) const {
    std::string wanted = lower(category);
    std::vector<std::string> extra;
    if (options_.synonyms_enabled) {
        auto it = options_.synonyms.find(wanted);
        if (it != options_.synonyms.end()) {
            for (const std::string& s : it->second) extra.push_back(lower(s));
        }
    }
    ObjectSet out;
    for (const ObjectInstance* o : objects) {
        if (o->category == wanted ||
            std::find(extra.begin(), extra.end(), o->category) != extra.end()) {
            out.push_back(o);
        }
    }
    return sorted_by_id(std::move(out));
}

ObjectSet ToolApi::relate(const ObjectSet& objects, const ObjectInstance& reference,
                          const std::string& relation) const {
    std::optional<std::string> canon = canonical_relation(relation);
    if (!canon || *canon == "o'clock" || parse_oclock(*canon)) {
        throw ApiError("unknown relation '" + relation +
                       "'; valid relations: " + quote_list(object_relation_vocabulary()));
    }

    ObjectSet candidates;
    for (const ObjectInstance* o : objects) {
        if (o->id != reference.id) candidates.push_back(o);
    }
    candidates = sorted_by_id(std::move(candidates));

    if (*canon == "closest" || *canon == "farthest") {
        const ObjectInstance* pick =
            *canon == "closest"
                ? closest_among(candidates, reference.box.center, relations_)
                : farthest_among(candidates, reference.box.center, relations_);
        ObjectSet out;
        if (pick) out.push_back(pick);
        return out;
    }

    ObjectSet out;
    for (const ObjectInstance* o : candidates) {
        std::vector<std::string> rels = all_relations(*o, reference, *scene_, relations_);
        if (std::find(rels.begin(), rels.end(), *canon) != rels.end()) out.push_back(o);
    }
    return out;
}

std::vector<std::string> ToolApi::egocentric_for(const ObjectInstance& object,
                                                 bool include_oclock) const {
    return egocentric_relations(object.box.center, scene_->agent(), scene_->forward_axis(),
                                relations_, include_oclock);
}

ObjectSet ToolApi::relate_agent(const ObjectSet& objects, const std::string& relation) const {
    std::optional<std::string> canon = canonical_relation(relation);
    bool valid = canon.has_value();
    if (canon) {
        if (*canon == "o'clock") {
            throw ApiError("relation 'o'clock' needs a sector, e.g. \"3 o'clock\"");
        }
        if (*canon == "on" || *canon == "above" || *canon == "below") valid = false;
    }
    if (!valid) {
        std::vector<std::string> vocab = agent_relation_vocabulary();
        vocab.push_back("<n> o'clock");
        throw ApiError("unknown relation '" + relation +
                       "'; valid relations: " + quote_list(vocab));
    }

    ObjectSet candidates = sorted_by_id(objects);
    const Vec3& agent_pos = scene_->agent().position;

    if (*canon == "closest" || *canon == "farthest") {
        const ObjectInstance* pick = *canon == "closest"
                                         ? closest_among(candidates, agent_pos, relations_)
                                         : farthest_among(candidates, agent_pos, relations_);
        ObjectSet out;
        if (pick) out.push_back(pick);
        return out;
    }

    ObjectSet out;
    for (const ObjectInstance* o : candidates) {
        bool match = false;
        if (*canon == "within reach") {
            match = center_distance(o->box.center, agent_pos) < relations_.wr_dist_m;
        } else if (*canon == "around") {
            match = center_distance(o->box.center, agent_pos) < relations_.ar_dist_m;
        } else {
            std::vector<std::string> labels = egocentric_for(*o, parse_oclock(*canon).has_value());
            match = std::find(labels.begin(), labels.end(), *canon) != labels.end();
        }
        if (match) out.push_back(o);
    }
    return out;
}

std::vector<std::string> ToolApi::query_relation(
    const ObjectInstance& object, const ObjectInstance& reference,
    const std::optional<std::vector<std::string>>& candidates) const {
    if (object.id == reference.id) {
        throw ApiError("object and reference_object must be different");
    }
    std::vector<std::string> wanted =
        candidates.value_or(std::vector<std::string>{"left", "right", "front", "back"});
    std::vector<std::string> rels = all_relations(object, reference, *scene_, relations_);

    // canonical order, echoing the caller's token for matched aliases
    std::vector<std::string> out;
    for (const std::string& rel : rels) {
        for (const std::string& token : wanted) {
            std::optional<std::string> canon = canonical_relation(token);
            if (canon && *canon == rel) {
                out.push_back(token);
                break;
            }
        }
    }
    return out;
}

std::vector<std::string> ToolApi::query_relation_agent(
    const ObjectInstance& object,
    const std::optional<std::vector<std::string>>& candidates) const {
    // The sector label is emitted only when the caller asked for o'clock
    // explicitly; the documented default-candidate example returns sides only.
    std::vector<std::string> wanted = candidates.value_or(
        std::vector<std::string>{"left", "right", "front", "back"});
    bool want_oclock = false;
    if (candidates) {
        for (const std::string& token : *candidates) {
            std::optional<std::string> canon = canonical_relation(token);
            if (canon && (*canon == "o'clock" || parse_oclock(*canon))) {
                want_oclock = true;
            }
        }
    }
    std::vector<std::string> labels = egocentric_for(object, want_oclock);

    std::vector<std::string> out;
    for (const std::string& label : labels) {
        bool is_sector = parse_oclock(label).has_value();
        for (const std::string& token : wanted) {
            std::optional<std::string> canon = canonical_relation(token);
            if (!canon) continue;
            if (*canon == label || (is_sector && *canon == "o'clock")) {
                out.push_back(is_sector ? label : token);
                break;
            }
        }
    }
    return out;
}

AttributeValue ToolApi::query_attribute(
    const ObjectInstance& object, const std::string& attribute_type,
    const std::optional<std::vector<std::string>>& candidates) const {
    const std::vector<std::string>& kinds = attribute_types();
    if (std::find(kinds.begin(), kinds.end(), attribute_type) == kinds.end()) {
        throw ApiError("invalid attribute_type '" + attribute_type +
                       "'; must be chosen from [\"lwh\", \"distance\", \"color\", "
                       "\"shape\", \"material\"]");
    }
    if (attribute_type == "lwh") {
        return std::vector<double>{object.box.lwh[0], object.box.lwh[1], object.box.lwh[2]};
    }
    if (attribute_type == "distance") {
        return center_distance(object.box.center, scene_->agent().position);
    }

    auto it = object.attributes.find(attribute_type);
    std::optional<std::string> stored;
    if (it != object.attributes.end()) stored = it->second;

    if (!candidates) {
        if (stored) return *stored;
        if (hook_) return hook_(object, attribute_type, {});
        throw ApiError("attribute '" + attribute_type + "' unavailable for object " +
                       std::to_string(object.id));
    }
    if (candidates->empty()) {
        throw ApiError("candidate_attribute_values must be non-empty when provided");
    }
    if (stored &&
        std::find(candidates->begin(), candidates->end(), *stored) != candidates->end()) {
        return *stored;
    }
    if (hook_) {
        std::string picked = hook_(object, attribute_type, *candidates);
        if (std::find(candidates->begin(), candidates->end(), picked) == candidates->end()) {
            throw ApiError("attribute classifier returned '" + picked +
                           "', which is not among candidates " + quote_list(*candidates));
        }
        return picked;
    }
    if (stored) {
        throw ApiError("attribute '" + attribute_type + "' of object " +
                       std::to_string(object.id) + " is not among candidates " +
                       quote_list(*candidates));
    }
    throw ApiError("attribute '" + attribute_type + "' unavailable for object " +
                   std::to_string(object.id));
}

std::string ToolApi::query_state(const ObjectInstance& object,
                                 const std::vector<std::string>& candidates) const {
    if (candidates.empty()) {
        throw ApiError("candidate_states must be non-empty");
    }
    auto it = object.attributes.find("state");
    std::optional<std::string> stored;
    if (it != object.attributes.end()) stored = it->second;

    if (stored && std::find(candidates.begin(), candidates.end(), *stored) != candidates.end()) {
        return *stored;
    }
    if (hook_) {
        std::string picked = hook_(object, "state", candidates);
        if (std::find(candidates.begin(), candidates.end(), picked) == candidates.end()) {
            throw ApiError("attribute classifier returned '" + picked +
                           "', which is not among candidates " + quote_list(candidates));
        }
        return picked;
    }
    if (stored) {
        throw ApiError("attribute 'state' of object " + std::to_string(object.id) +
                       " is not among candidates " + quote_list(candidates));
    }
    throw ApiError("attribute 'state' unavailable for object " + std::to_string(object.id));
}

}  // namespace situ3d
