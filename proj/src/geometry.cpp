#include "geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "errors.hpp"

namespace situ3d {

Quaternion Quaternion::normalized() const {
    double n = norm();
    if (n < 1e-12) throw GeometryError("quaternion has zero norm");
    return {x / n, y / n, z / n, w / n};
}

Quaternion Quaternion::canonical() const {
    bool flip;
    if (w != 0.0) {
        flip = w < 0.0;
    } else if (x != 0.0) {
        flip = x < 0.0;
    } else if (y != 0.0) {
        flip = y < 0.0;
    } else {
        flip = z < 0.0;
    }
    if (!flip) return *this;
    return {-x, -y, -z, -w};
}

Vec3 Quaternion::rotate(const Vec3& v) const {
    // v' = v + 2*q_vec x (q_vec x v + w*v)
    Vec3 q{x, y, z};
    Vec3 t{2.0 * (q.y * v.z - q.z * v.y), 2.0 * (q.z * v.x - q.x * v.z),
           2.0 * (q.x * v.y - q.y * v.x)};
    return {v.x + w * t.x + (q.y * t.z - q.z * t.y),
            v.y + w * t.y + (q.z * t.x - q.x * t.z),
            v.z + w * t.z + (q.x * t.y - q.y * t.x)};
}

Quaternion Quaternion::from_yaw(double radians) {
    return {0.0, 0.0, std::sin(radians / 2.0), std::cos(radians / 2.0)};
}

Quaternion Quaternion::operator*(const Quaternion& o) const {
    return {w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w,
            w * o.w - x * o.x - y * o.y - z * o.z};
}

Footprint footprint(const OrientedBox& box) {
    double hl = box.lwh[0] / 2.0;
    double hw = box.lwh[1] / 2.0;
    double c = std::cos(box.heading);
    double s = std::sin(box.heading);
    auto corner = [&](double u, double v) -> Vec2 {
        return {box.center.x + u * c - v * s, box.center.y + u * s + v * c};
    };
    // counter-clockwise: (+,+), (-,+), (-,-), (+,-) in the local frame
    return {corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)};
}

double polygon_area(const std::vector<Vec2>& poly) {
    double acc = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        acc += a.cross(b);
    }
    return acc / 2.0;
}

double polygon_area(const Footprint& poly) {
    return polygon_area(std::vector<Vec2>(poly.begin(), poly.end()));
}

std::vector<Vec2> convex_intersection(const std::vector<Vec2>& subject,
                                      const std::vector<Vec2>& clip) {
    std::vector<Vec2> out = subject;
    size_t n = clip.size();
    for (size_t i = 0; i < n && !out.empty(); ++i) {
        Vec2 a = clip[i];
        Vec2 b = clip[(i + 1) % n];
        Vec2 edge = b - a;
        std::vector<Vec2> in;
        in.swap(out);
        size_t m = in.size();
        for (size_t j = 0; j < m; ++j) {
            const Vec2& p = in[j];
            const Vec2& q = in[(j + 1) % m];
            double side_p = edge.cross(p - a);
            double side_q = edge.cross(q - a);
            bool p_in = side_p >= -1e-12;
            bool q_in = side_q >= -1e-12;
            if (p_in) out.push_back(p);
            if (p_in != q_in) {
                double t = side_p / (side_p - side_q);
                out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
            }
        }
    }
    return out;
}

double intersection_area(const Footprint& a, const Footprint& b) {
    std::vector<Vec2> sub(a.begin(), a.end());
    std::vector<Vec2> clip(b.begin(), b.end());
    std::vector<Vec2> inter = convex_intersection(sub, clip);
    if (inter.size() < 3) return 0.0;
    double area = polygon_area(inter);
    return area > 0.0 ? area : 0.0;
}

double wrap_angle(double radians) {
    double two_pi = 2.0 * M_PI;
    double r = std::fmod(radians + M_PI, two_pi);
    if (r < 0.0) r += two_pi;
    return r - M_PI;
}

Vec3 forward_vector(const Quaternion& rotation, const Vec3& reference_axis) {
    Vec3 rotated = rotation.rotate(reference_axis);
    double horiz = std::sqrt(rotated.x * rotated.x + rotated.y * rotated.y);
    if (horiz < 1e-9) {
        throw GeometryError(
            "agent facing direction is vertical; forward direction undefined");
    }
    return {rotated.x / horiz, rotated.y / horiz, 0.0};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    // match mainstream float repr: integral values keep a trailing ".0"
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

}  // namespace situ3d
