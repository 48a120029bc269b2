#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relations.hpp"
#include "scene.hpp"

namespace situ3d {

/// Category-matching options. Synonyms are off by default so that rigid
/// label matching (a known failure mode) stays reproducible.
struct ApiOptions {
    bool synonyms_enabled = false;
    // query category -> extra stored categories it should match
    std::map<std::string, std::vector<std::string>> synonyms;
};

/// Pluggable fallback for attribute queries whose stored value is missing or
/// not among the requested candidates. Must return one of `candidates` when
/// candidates are given. The default (unset) hook raises an ApiError instead
/// of guessing.
using AttributeClassifierHook = std::function<std::string(
    const ObjectInstance& object, const std::string& kind,
    const std::vector<std::string>& candidates)>;

using AttributeValue = std::variant<std::vector<double>, double, std::string>;

using ObjectSet = std::vector<const ObjectInstance*>;  // kept ascending by id

/// The eight documented scene-query functions, bound to one immutable scene.
/// All calls are pure; bad arguments raise ApiError with a message meant to
/// be fed back to the calling model.
class ToolApi {
  public:
    ToolApi(const Scene& scene, RelationConfig relations, ApiOptions options = {},
            AttributeClassifierHook hook = nullptr);

    const Scene& scene() const { return *scene_; }
    const RelationConfig& relations_config() const { return relations_; }

    ObjectSet scene_all() const;
    ObjectSet filter(const ObjectSet& objects, const std::string& category) const;
    ObjectSet relate(const ObjectSet& objects, const ObjectInstance& reference,
                     const std::string& relation) const;
    ObjectSet relate_agent(const ObjectSet& objects, const std::string& relation) const;
    std::vector<std::string> query_relation(
        const ObjectInstance& object, const ObjectInstance& reference,
        const std::optional<std::vector<std::string>>& candidates) const;
    std::vector<std::string> query_relation_agent(
        const ObjectInstance& object,
        const std::optional<std::vector<std::string>>& candidates) const;
    AttributeValue query_attribute(
        const ObjectInstance& object, const std::string& attribute_type,
        const std::optional<std::vector<std::string>>& candidates) const;
    std::string query_state(const ObjectInstance& object,
                            const std::vector<std::string>& candidates) const;

    static const std::vector<std::string>& object_relation_vocabulary();
    static const std::vector<std::string>& agent_relation_vocabulary();
    static const std::vector<std::string>& attribute_types();

    /// Resolves aliases (behind -> back, "in front" -> front, close ->
    /// "within reach") and validates o'clock tokens. Returns nothing for
    /// unknown tokens.
    static std::optional<std::string> canonical_relation(const std::string& token);

  private:
    std::vector<std::string> egocentric_for(const ObjectInstance& object,
                                            bool include_oclock) const;

    const Scene* scene_;
    RelationConfig relations_;
    ApiOptions options_;
    AttributeClassifierHook hook_;
};

}  // namespace situ3d
