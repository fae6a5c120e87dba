#pragma once

#include <string_view>
#include <variant>

#include <json.hpp>

#include "mechsearch/geometry.hpp"

namespace mechsearch {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec2 xy() const { return {x, y}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

enum class Primitive { ParallelJaw, Suction, Push };

std::string_view to_string(Primitive p);
Primitive primitive_from_string(std::string_view s);

struct ParallelJawGrasp {
    Vec3 p;
    double phi = 0.0;  // jaw axis angle in the bin plane
    friend bool operator==(const ParallelJawGrasp&, const ParallelJawGrasp&) = default;
};

struct SuctionGrasp {
    Vec3 p;
    double phi = 0.0;
    double theta = 0.0;  // approach axis; (0, 0) is straight down
    friend bool operator==(const SuctionGrasp&, const SuctionGrasp&) = default;
};

struct Push {
    Vec3 p;        // gripper tip at the start
    Vec3 p_prime;  // gripper tip at the end
    friend bool operator==(const Push&, const Push&) = default;
};

struct ActionPlan {
    std::variant<ParallelJawGrasp, SuctionGrasp, Push> action;
    double quality = 0.0;
    int goal_id = -1;

    Primitive primitive() const { return static_cast<Primitive>(action.index()); }
    bool is_grasp() const { return primitive() != Primitive::Push; }

    friend bool operator==(const ActionPlan&, const ActionPlan&) = default;
};

nlohmann::json plan_to_json(const ActionPlan& plan);
ActionPlan plan_from_json(const nlohmann::json& j);

/// Hardware dimensions shared by the planners and the transition model (meters).
struct GripperGeometry {
    double jaw_max_opening = 0.085;
    double finger_depth = 0.01;
    double finger_width = 0.02;
    /// Closed-gripper footprint used for pushing: `push_width` across the push
    /// direction, `push_length` behind the tip.
    double push_width = 0.02;
    double push_length = 0.09;
    double suction_cup_radius = 0.01;

    double push_half_width() const { return 0.5 * push_width; }
};

/// Closed-gripper footprint with its tip centered on `tip`, facing `dir`.
Polygon push_footprint(Vec2 tip, Vec2 dir, const GripperGeometry& g);

}  // namespace mechsearch
