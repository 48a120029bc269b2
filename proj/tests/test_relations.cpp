#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "errors.hpp"
#include "oracles.hpp"
#include "relations.hpp"
#include "test_util.hpp"

using namespace situ3d;
using situ3d::test::make_object;
using situ3d::test::make_scene;

namespace {
const RelationConfig kCfg{};
}

TEST_CASE("center_distance basics and random recomputation") {
    CHECK(center_distance({0, 0, 0}, {0, 0, 0}) == 0.0);
    CHECK(center_distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> pos(-100, 100);
    for (int i = 0; i < 500; ++i) {
        Vec3 a{pos(rng), pos(rng), pos(rng)};
        Vec3 b{pos(rng), pos(rng), pos(rng)};
        double d = center_distance(a, b);
        CHECK(d == doctest::Approx(oracle::distance(a, b)).epsilon(1e-12));
        CHECK(d == doctest::Approx(center_distance(b, a)));
        CHECK(d >= 0.0);
    }
}

TEST_CASE("xy_iou on identical, disjoint and offset squares") {
    OrientedBox unit{{0, 0, 0}, {1, 1, 1}, 0.0};
    CHECK(xy_iou(unit, unit) == 1.0);

    OrientedBox far{{10, 10, 0}, {1, 1, 1}, 0.0};
    CHECK(xy_iou(unit, far) == 0.0);

    // two unit squares offset by (0.5, 0): overlap 0.5, union 1.5
    OrientedBox shifted{{0.5, 0, 0}, {1, 1, 1}, 0.0};
    CHECK(xy_iou(unit, shifted) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    std::mt19937 rng(23);
    double mc = oracle::iou_monte_carlo(unit, shifted, 200000, rng);
    CHECK(std::abs(mc - 1.0 / 3.0) < 1e-2);
}

TEST_CASE("xy_iou is symmetric and in [0,1] for 1000 random pairs") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> pos(-3, 3), size(0.2, 2.5), angle(-M_PI, M_PI);
    for (int i = 0; i < 1000; ++i) {
        OrientedBox a{{pos(rng), pos(rng), 0}, {size(rng), size(rng), 1}, angle(rng)};
        OrientedBox b{{pos(rng), pos(rng), 0}, {size(rng), size(rng), 1}, angle(rng)};
        double ab = xy_iou(a, b);
        double ba = xy_iou(b, a);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
    }
}

TEST_CASE("xy_iou agrees with the analytic oracle on rotated pairs") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> pos(-2, 2), size(0.3, 2.0), angle(-M_PI, M_PI);
    for (int i = 0; i < 300; ++i) {
        OrientedBox a{{pos(rng), pos(rng), 0}, {size(rng), size(rng), 1}, angle(rng)};
        OrientedBox b{{pos(rng), pos(rng), 0}, {size(rng), size(rng), 1}, angle(rng)};
        CHECK(xy_iou(a, b) == doctest::Approx(oracle::iou(a, b)).epsilon(1e-6));
    }
}

TEST_CASE("closest_among honors the margin rule") {
    ObjectInstance a = make_object(1, "a", {1.0, 0, 0}, {0.1, 0.1, 0.1});
    ObjectInstance b = make_object(2, "b", {2.0, 0, 0}, {0.1, 0.1, 0.1});
    Vec3 anchor{0, 0, 0};

    SUBCASE("single candidate wins unconditionally") {
        ObjectInstance lone = make_object(3, "c", {7.0, 0, 0}, {0.1, 0.1, 0.1});
        CHECK(closest_among({&lone}, anchor, kCfg) == &lone);
    }
    SUBCASE("clear margin") {
        CHECK(closest_among({&a, &b}, anchor, kCfg) == &a);
    }
    SUBCASE("margin violated") {
        ObjectInstance close_b = make_object(2, "b", {1.03, 0, 0}, {0.1, 0.1, 0.1});
        CHECK(closest_among({&a, &close_b}, anchor, kCfg) == nullptr);
    }
    SUBCASE("empty set is empty, not an error") {
        CHECK(closest_among({}, anchor, kCfg) == nullptr);
    }
}

TEST_CASE("farthest_among mirrors closest_among") {
    Vec3 anchor{0, 0, 0};
    ObjectInstance a = make_object(1, "a", {1.0, 0, 0}, {0.1, 0.1, 0.1});
    ObjectInstance b = make_object(2, "b", {2.0, 0, 0}, {0.1, 0.1, 0.1});
    CHECK(farthest_among({&a, &b}, anchor, kCfg) == &b);

    ObjectInstance near_b = make_object(2, "b", {1.97, 0, 0}, {0.1, 0.1, 0.1});
    ObjectInstance at2 = make_object(3, "c", {2.0, 0, 0}, {0.1, 0.1, 0.1});
    CHECK(farthest_among({&near_b, &at2}, anchor, kCfg) == nullptr);
}

TEST_CASE("closest/farthest match the sort-based oracle on random candidates") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> pos(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ObjectInstance> objects;
        for (int i = 0; i < 10; ++i) {
            objects.push_back(
                make_object(i, "o", {pos(rng), pos(rng), pos(rng)}, {0.1, 0.1, 0.1}));
        }
        std::vector<const ObjectInstance*> candidates;
        for (const ObjectInstance& o : objects) candidates.push_back(&o);
        Vec3 anchor{pos(rng), pos(rng), pos(rng)};
        CHECK(closest_among(candidates, anchor, kCfg) ==
              oracle::extreme(candidates, anchor, kCfg.epsilon_m, true));
        CHECK(farthest_among(candidates, anchor, kCfg) ==
              oracle::extreme(candidates, anchor, kCfg.epsilon_m, false));
    }
}

TEST_CASE("within reach and around thresholds") {
    ObjectInstance anchor = make_object(1, "anchor", {0, 0, 0}, {0.1, 0.1, 0.1});
    auto at = [&](double d) { return make_object(2, "t", {d, 0, 0}, {0.1, 0.1, 0.1}); };
    ObjectInstance near = at(0.5), mid = at(1.5), far = at(2.5);
    CHECK(is_within_reach(near, anchor, kCfg));
    CHECK(is_around(near, anchor, kCfg));
    CHECK_FALSE(is_within_reach(mid, anchor, kCfg));
    CHECK(is_around(mid, anchor, kCfg));
    CHECK_FALSE(is_within_reach(far, anchor, kCfg));
    CHECK_FALSE(is_around(far, anchor, kCfg));
}

TEST_CASE("vertical relation: resting, hovering, nested footprints") {
    // book resting exactly on the table top, footprints nested, similar scale
    ObjectInstance table = make_object(1, "table", {0, 0, 0.2}, {0.5, 0.3, 0.4});
    ObjectInstance book = make_object(2, "book", {0, 0, 0.425}, {0.3, 0.2, 0.05});
    CHECK(vertical_relation(book, table, kCfg) == VerticalRelation::on);
    CHECK(vertical_relation(table, book, kCfg) == VerticalRelation::none);

    // lamp 1 m above the table with overlapping footprints
    ObjectInstance lamp = make_object(3, "lamp", {0, 0, 1.55}, {0.3, 0.2, 0.3});
    CHECK(vertical_relation(lamp, table, kCfg) == VerticalRelation::above);
    CHECK(vertical_relation(table, lamp, kCfg) == VerticalRelation::below);
}

TEST_CASE("vertical relation matches the literal-definition oracle on 500 pairs") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> pos(-1.5, 1.5), z(0, 2), size(0.2, 1.5),
        angle(-M_PI, M_PI);
    for (int i = 0; i < 500; ++i) {
        ObjectInstance a = make_object(1, "a", {pos(rng), pos(rng), z(rng)},
                                       {size(rng), size(rng), size(rng)}, angle(rng));
        ObjectInstance b = make_object(2, "b", {pos(rng), pos(rng), z(rng)},
                                       {size(rng), size(rng), size(rng)}, angle(rng));
        CHECK(vertical_relation(a, b, kCfg) == oracle::vertical(a, b, kCfg));
        CHECK(vertical_relation(b, a, kCfg) == oracle::vertical(b, a, kCfg));
    }
}

TEST_CASE("vertical exclusivity and mirror properties") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> pos(-1, 1), z(0, 1.5), size(0.2, 1.2);
    for (int i = 0; i < 500; ++i) {
        ObjectInstance a =
            make_object(1, "a", {pos(rng), pos(rng), z(rng)}, {size(rng), size(rng), size(rng)});
        ObjectInstance b =
            make_object(2, "b", {pos(rng), pos(rng), z(rng)}, {size(rng), size(rng), size(rng)});
        VerticalRelation ab = vertical_relation(a, b, kCfg);
        VerticalRelation ba = vertical_relation(b, a, kCfg);
        if (ab == VerticalRelation::on) {
            CHECK(ab != VerticalRelation::above);
            CHECK(ab != VerticalRelation::below);
        }
        CHECK((ab == VerticalRelation::above) == (ba == VerticalRelation::below));
        CHECK((ab == VerticalRelation::below) == (ba == VerticalRelation::above));
    }
}

TEST_CASE("allocentric conventions: +y is left of a viewer facing +x") {
    ObjectInstance anchor = make_object(1, "anchor", {0, 0, 0}, {0.6, 0.6, 0.5});
    Vec3 forward{1, 0, 0};

    ObjectInstance left_target = make_object(2, "t", {0, 1.0, 0}, {0.2, 0.2, 0.2});
    CHECK(allocentric_relations(left_target, anchor, forward, kCfg) ==
          std::vector<std::string>{"left"});

    ObjectInstance back_target = make_object(3, "t", {-1.0, 0, 0}, {0.2, 0.2, 0.2});
    CHECK(allocentric_relations(back_target, anchor, forward, kCfg) ==
          std::vector<std::string>{"back"});

    ObjectInstance corner = make_object(4, "t", {1.0, 1.0, 0}, {0.2, 0.2, 0.2});
    CHECK(allocentric_relations(corner, anchor, forward, kCfg) ==
          std::vector<std::string>{"left", "front"});
}

TEST_CASE("allocentric matches the region-construction oracle on 500 configurations") {
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> pos(-2.5, 2.5), size(0.2, 1.2),
        angle(-M_PI, M_PI);
    for (int i = 0; i < 500; ++i) {
        ObjectInstance anchor = make_object(1, "a", {pos(rng), pos(rng), 0},
                                            {size(rng), size(rng), 0.5}, angle(rng));
        ObjectInstance target = make_object(2, "t", {pos(rng), pos(rng), 0},
                                            {size(rng), size(rng), 0.5}, angle(rng));
        double theta = angle(rng);
        Vec3 viewer{std::cos(theta), std::sin(theta), 0};
        CHECK(allocentric_relations(target, anchor, viewer, kCfg) ==
              oracle::allocentric(target, anchor, viewer, kCfg));
    }
}

TEST_CASE("swapping point-like target/anchor flips left/right and front/back") {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), angle(-M_PI, M_PI);
    std::uniform_int_distribution<int> axis_pick(0, 3);
    auto flipped = [](const std::string& label) -> std::string {
        if (label == "left") return "right";
        if (label == "right") return "left";
        if (label == "front") return "back";
        return "front";
    };
    for (int i = 0; i < 400; ++i) {
        double theta = angle(rng);
        Vec3 viewer{std::cos(theta), std::sin(theta), 0};
        Vec3 a_pos{pos(rng), pos(rng), 0};
        Vec3 b_pos;
        if (i % 2 == 0) {
            // axis-aligned offsets in the viewer frame produce non-empty labels
            double d = 0.3 + std::abs(pos(rng));
            Vec3 offsets[4] = {{viewer.x * d, viewer.y * d, 0},
                               {-viewer.x * d, -viewer.y * d, 0},
                               {-viewer.y * d, viewer.x * d, 0},
                               {viewer.y * d, -viewer.x * d, 0}};
            Vec3 off = offsets[axis_pick(rng)];
            b_pos = {a_pos.x + off.x, a_pos.y + off.y, 0};
        } else {
            b_pos = {pos(rng), pos(rng), 0};
        }
        ObjectInstance a = make_object(1, "a", a_pos, {1e-6, 1e-6, 1e-6});
        ObjectInstance b = make_object(2, "b", b_pos, {1e-6, 1e-6, 1e-6});
        std::vector<std::string> ab = allocentric_relations(b, a, viewer, kCfg);
        std::vector<std::string> ba = allocentric_relations(a, b, viewer, kCfg);
        std::vector<std::string> expected;
        for (const std::string& label : ab) expected.push_back(flipped(label));
        std::sort(expected.begin(), expected.end());
        std::vector<std::string> got = ba;
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
    }
}

TEST_CASE("egocentric conventions and o'clock sectors") {
    AgentPose pose{{0, 0, 0}, {0, 0, 0, 1}};
    Vec3 axis{1, 0, 0};

    CHECK(egocentric_relations({1, 0, 0}, pose, axis, kCfg, true) ==
          std::vector<std::string>{"front", "12 o'clock"});
    CHECK(egocentric_relations({0, 1, 0}, pose, axis, kCfg, true) ==
          std::vector<std::string>{"left", "9 o'clock"});
    CHECK(egocentric_relations({-1, 1, 0}, pose, axis, kCfg, false) ==
          std::vector<std::string>{"left", "back"});
    CHECK_THROWS_AS(egocentric_relations({0, 0, 5}, pose, axis, kCfg, false), ApiError);
}

TEST_CASE("o'clock sector boundaries") {
    CHECK(oclock_sector(0.0) == 12);
    CHECK(oclock_sector(14.999) == 12);
    CHECK(oclock_sector(15.0) == 1);
    CHECK(oclock_sector(90.0) == 3);
    CHECK(oclock_sector(180.0) == 6);
    CHECK(oclock_sector(270.0) == 9);
    CHECK(oclock_sector(344.0) == 11);
    CHECK(oclock_sector(345.0) == 12);
    CHECK(oclock_sector(-90.0) == 9);
}

TEST_CASE("egocentric matches the angle oracle on random poses") {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> pos(-4, 4), angle(-M_PI, M_PI);
    for (int i = 0; i < 500; ++i) {
        AgentPose pose{{pos(rng), pos(rng), 0.5},
                       Quaternion::from_yaw(angle(rng)).canonical()};
        Vec3 target{pos(rng), pos(rng), pos(rng)};
        if (std::hypot(target.x - pose.position.x, target.y - pose.position.y) < 1e-6) {
            continue;
        }
        CHECK(egocentric_relations(target, pose, {1, 0, 0}, kCfg, true) ==
              oracle::egocentric(target, pose, {1, 0, 0}, kCfg, true));
    }
}

TEST_CASE("all_relations on the paper-shaped chair/table fixture") {
    Scene scene = test::load_fixture_scene("scene_basic");
    const ObjectInstance* chair = scene.find(5);
    const ObjectInstance* table = scene.find(4);
    REQUIRE(chair);
    REQUIRE(table);
    std::vector<std::string> rels = all_relations(*chair, *table, scene, kCfg);
    REQUIRE(rels.size() >= 2);
    CHECK(rels[0] == "left");
    CHECK(rels[1] == "front");
}

TEST_CASE("all_relations combines on and closest for a nested fixture") {
    std::vector<ObjectInstance> objects;
    objects.push_back(make_object(1, "table", {0, 0, 0.2}, {0.5, 0.3, 0.4}));
    objects.push_back(make_object(2, "book", {0, 0, 0.425}, {0.3, 0.2, 0.05}));
    objects.push_back(make_object(3, "lamp", {4, 4, 0.5}, {0.3, 0.3, 1.0}));
    Scene scene = make_scene(std::move(objects));
    const ObjectInstance* book = scene.find(2);
    const ObjectInstance* table = scene.find(1);
    std::vector<std::string> rels = all_relations(*book, *table, scene, kCfg);
    CHECK(std::find(rels.begin(), rels.end(), "on") != rels.end());
    CHECK(std::find(rels.begin(), rels.end(), "closest") != rels.end());
    // verify against single-predicate oracles
    CHECK(oracle::vertical(*book, *table, kCfg) == VerticalRelation::on);
    std::vector<const ObjectInstance*> others{book, scene.find(3)};
    CHECK(oracle::extreme(others, table->box.center, kCfg.epsilon_m, true) == book);
}

TEST_CASE("identical twins are neither closest nor farthest") {
    std::vector<ObjectInstance> objects;
    objects.push_back(make_object(1, "anchor", {0, 0, 0}, {0.2, 0.2, 0.2}));
    objects.push_back(make_object(2, "twin", {0, 2, 0}, {0.2, 0.2, 0.2}));
    objects.push_back(make_object(3, "twin", {0, -2, 0}, {0.2, 0.2, 0.2}));
    Scene scene = make_scene(std::move(objects));
    std::vector<std::string> rels =
        all_relations(*scene.find(2), *scene.find(1), scene, kCfg);
    CHECK(std::find(rels.begin(), rels.end(), "closest") == rels.end());
    CHECK(std::find(rels.begin(), rels.end(), "farthest") == rels.end());
}

TEST_CASE("all_relations rejects target == reference") {
    Scene scene = test::load_fixture_scene("scene_basic");
    CHECK_THROWS_AS(all_relations(*scene.find(1), *scene.find(1), scene, kCfg), ApiError);
}

TEST_CASE("anchor heading frame is used when explicit") {
    // anchor faces +y, target sits at +x: in the anchor frame that is "right"
    std::vector<ObjectInstance> objects;
    objects.push_back(
        make_object(1, "anchor", {0, 0, 0}, {0.6, 0.6, 0.5}, M_PI / 2.0, true));
    objects.push_back(make_object(2, "t", {1.0, 0, 0}, {0.2, 0.2, 0.2}));
    Scene scene = make_scene(std::move(objects));
    std::vector<std::string> rels =
        all_relations(*scene.find(2), *scene.find(1), scene, kCfg);
    CHECK(std::find(rels.begin(), rels.end(), "right") != rels.end());
    CHECK(std::find(rels.begin(), rels.end(), "left") == rels.end());
}

TEST_CASE("every predicate matches its oracle on 100 random scenes") {
    std::mt19937 rng(61);
    for (int s = 0; s < 100; ++s) {
        Scene scene = test::random_scene(rng, 12);
        for (const ObjectInstance& target : scene.objects()) {
            for (const ObjectInstance& reference : scene.objects()) {
                if (target.id == reference.id) continue;
                CHECK(all_relations(target, reference, scene, kCfg) ==
                      oracle::all_relations(target, reference, scene, kCfg));
            }
            CHECK(egocentric_relations(target.box.center, scene.agent(),
                                       scene.forward_axis(), kCfg, true) ==
                  oracle::egocentric(target.box.center, scene.agent(),
                                     scene.forward_axis(), kCfg, true));
        }
    }
}

TEST_CASE("relation tables are invariant under global yaw + translation") {
    std::mt19937 rng(67);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI), shift(-10, 10);
    for (int s = 0; s < 10; ++s) {
        Scene scene = test::random_scene(rng, 10);
        std::string baseline = relation_table(scene, kCfg).dump();
        for (int t = 0; t < 10; ++t) {
            Scene moved = test::transform_scene(
                scene, angle(rng), {shift(rng), shift(rng), shift(rng)});
            CHECK(relation_table(moved, kCfg).dump() == baseline);
        }
    }
}

TEST_CASE("RelationConfig validation") {
    RelationConfig bad = kCfg;
    bad.min_iou = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = kCfg;
    bad.dead_zone_deg = 45.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = kCfg;
    bad.epsilon_m = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    nlohmann::json block{{"epsilon_m", 0.1}, {"wr_dist_m", 1.5}};
    RelationConfig loaded = RelationConfig::from_json(block);
    CHECK(loaded.epsilon_m == 0.1);
    CHECK(loaded.wr_dist_m == 1.5);
    CHECK(loaded.ar_dist_m == kCfg.ar_dist_m);
}
