#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace situ3d {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
};

/// Unit quaternion (x, y, z, w). Stored sign-canonicalized with w >= 0.
struct Quaternion {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double w = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z + w * w); }
    Quaternion normalized() const;
    /// Flips the sign so that w >= 0 (w == 0: first nonzero of x,y,z > 0).
    Quaternion canonical() const;
    Vec3 rotate(const Vec3& v) const;

    static Quaternion from_yaw(double radians);
    /// Hamilton product: (*this) applied after `o`.
    Quaternion operator*(const Quaternion& o) const;
};

/// Box footprint in the XY plane: length along the heading axis, width
/// across it, height along +z. heading is the rotation about +z.
struct OrientedBox {
    Vec3 center;
    std::array<double, 3> lwh = {1.0, 1.0, 1.0};
    double heading = 0.0;

    double bottom() const { return center.z - lwh[2] / 2.0; }
    double top() const { return center.z + lwh[2] / 2.0; }
};

using Footprint = std::array<Vec2, 4>;

/// The box's XY outline as a counter-clockwise quadrilateral.
Footprint footprint(const OrientedBox& box);

/// Signed shoelace area; positive for counter-clockwise rings.
double polygon_area(const std::vector<Vec2>& poly);
double polygon_area(const Footprint& poly);

/// Intersection of two convex polygons (Sutherland-Hodgman). The clip
/// polygon must be counter-clockwise.
std::vector<Vec2> convex_intersection(const std::vector<Vec2>& subject,
                                      const std::vector<Vec2>& clip);

double intersection_area(const Footprint& a, const Footprint& b);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double radians);

/// Horizontal unit facing direction: `reference_axis` rotated by
/// `rotation`, projected to the XY plane and normalized.
/// Throws GeometryError when the rotated axis is (near-)vertical.
Vec3 forward_vector(const Quaternion& rotation, const Vec3& reference_axis = {1.0, 0.0, 0.0});

/// Shortest round-trip decimal text for a double, Python-repr style
/// ("2.0", "0.1", "1e+16").
std::string format_double(double v);

}  // namespace situ3d
