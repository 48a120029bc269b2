#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "errors.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

using namespace situ3d;

TEST_CASE("footprint of an axis-aligned box") {
    OrientedBox box{{0, 0, 0}, {2.0, 1.0, 1.0}, 0.0};
    Footprint fp = footprint(box);
    CHECK(fp[0].x == doctest::Approx(1.0));
    CHECK(fp[0].y == doctest::Approx(0.5));
    CHECK(fp[1].x == doctest::Approx(-1.0));
    CHECK(fp[1].y == doctest::Approx(0.5));
    CHECK(fp[2].x == doctest::Approx(-1.0));
    CHECK(fp[2].y == doctest::Approx(-0.5));
    CHECK(fp[3].x == doctest::Approx(1.0));
    CHECK(fp[3].y == doctest::Approx(-0.5));
    CHECK(polygon_area(fp) == doctest::Approx(2.0));  // counter-clockwise
}

TEST_CASE("footprint after a quarter turn swaps extents") {
    OrientedBox box{{0, 0, 0}, {2.0, 1.0, 1.0}, M_PI / 2.0};
    Footprint fp = footprint(box);
    double max_x = 0, max_y = 0;
    for (const Vec2& p : fp) {
        max_x = std::max(max_x, std::abs(p.x));
        max_y = std::max(max_y, std::abs(p.y));
    }
    CHECK(max_x == doctest::Approx(0.5));
    CHECK(max_y == doctest::Approx(1.0));
}

TEST_CASE("footprint matches rotate-corner oracle for random headings") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(-5, 5), size(0.1, 3), angle(-M_PI, M_PI);
    for (int i = 0; i < 200; ++i) {
        OrientedBox box{{pos(rng), pos(rng), pos(rng)},
                        {size(rng), size(rng), size(rng)},
                        angle(rng)};
        Footprint fp = footprint(box);
        std::vector<oracle::Pt> expected = oracle::box_corners(box);
        for (int k = 0; k < 4; ++k) {
            CHECK(fp[k].x == doctest::Approx(expected[k].x).epsilon(1e-12));
            CHECK(fp[k].y == doctest::Approx(expected[k].y).epsilon(1e-12));
        }
    }
}

TEST_CASE("footprint area equals length*width for 1000 random boxes") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(-10, 10), size(1e-3, 5), angle(-M_PI, M_PI);
    for (int i = 0; i < 1000; ++i) {
        OrientedBox box{{pos(rng), pos(rng), 0}, {size(rng), size(rng), 1}, angle(rng)};
        double area = polygon_area(footprint(box));
        CHECK(std::abs(area - box.lwh[0] * box.lwh[1]) <= 1e-9);
    }
}

TEST_CASE("forward_vector conventions") {
    CHECK(forward_vector({0, 0, 0, 1}).x == doctest::Approx(1.0));
    CHECK(forward_vector({0, 0, 0, 1}).y == doctest::Approx(0.0));

    Quaternion yaw90 = Quaternion::from_yaw(M_PI / 2.0);
    Vec3 f = forward_vector(yaw90);
    CHECK(f.x == doctest::Approx(0.0));
    CHECK(f.y == doctest::Approx(1.0));
    CHECK(f.z == 0.0);
}

TEST_CASE("forward_vector of pure yaw equals (cos, sin, 0)") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    for (int i = 0; i < 500; ++i) {
        double theta = angle(rng);
        Vec3 f = forward_vector(Quaternion::from_yaw(theta));
        CHECK(std::abs(f.x - std::cos(theta)) <= 1e-9);
        CHECK(std::abs(f.y - std::sin(theta)) <= 1e-9);
        CHECK(f.z == 0.0);
    }
}

TEST_CASE("forward_vector matches independent quaternion-matrix oracle") {
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int tested = 0;
    while (tested < 300) {
        Quaternion q{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        if (q.norm() < 1e-3) continue;
        q = q.normalized();
        Vec3 rotated = q.rotate({1, 0, 0});
        if (std::hypot(rotated.x, rotated.y) < 1e-3) continue;  // near-vertical facing
        Vec3 f = forward_vector(q);
        Vec3 expected = oracle::forward(q, {1, 0, 0});
        CHECK(f.x == doctest::Approx(expected.x).epsilon(1e-9));
        CHECK(f.y == doctest::Approx(expected.y).epsilon(1e-9));
        CHECK(std::hypot(f.x, f.y) == doctest::Approx(1.0));
        ++tested;
    }
}

TEST_CASE("forward_vector rejects vertical facing") {
    // rotate +x onto +z: 90 degree pitch about +y
    Quaternion pitch{0.0, -std::sin(M_PI / 4.0), 0.0, std::cos(M_PI / 4.0)};
    CHECK_THROWS_AS(forward_vector(pitch), GeometryError);
}

TEST_CASE("quaternion canonicalization and normalization") {
    Quaternion q{0, 0, 0, -1};
    Quaternion canon = q.canonical();
    CHECK(canon.w == 1.0);
    CHECK(canon.x == 0.0);

    Quaternion scaled{0, 0, 0, 2};
    CHECK(scaled.normalized().w == doctest::Approx(1.0));
    CHECK_THROWS_AS((Quaternion{0, 0, 0, 0}.normalized()), GeometryError);

    // w == 0: sign fixed by the first non-zero component
    Quaternion half{-1, 0, 0, 0};
    CHECK(half.canonical().x == 1.0);
}

TEST_CASE("wrap_angle lands in [-pi, pi)") {
    CHECK(wrap_angle(M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(3 * M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(-M_PI));
    CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> angle(-50, 50);
    for (int i = 0; i < 200; ++i) {
        double w = wrap_angle(angle(rng));
        CHECK(w >= -M_PI);
        CHECK(w < M_PI);
    }
}

TEST_CASE("format_double renders shortest round-trip text") {
    CHECK(format_double(2.0) == "2.0");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.3456789) == "2.3456789");
    CHECK(format_double(0.68883693) == "0.68883693");
    CHECK(format_double(-1.5) == "-1.5");
}

TEST_CASE("convex intersection of identical and disjoint rectangles") {
    OrientedBox a{{0, 0, 0}, {2, 2, 1}, 0.0};
    OrientedBox b{{5, 5, 0}, {2, 2, 1}, 0.0};
    CHECK(intersection_area(footprint(a), footprint(a)) == doctest::Approx(4.0));
    CHECK(intersection_area(footprint(a), footprint(b)) == 0.0);
}
