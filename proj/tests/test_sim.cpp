#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "sreid/sim.hpp"

using namespace sreid;

namespace {

ScenarioConfig noiseless_config(std::uint64_t seed = 1, int vehicles = 2) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.n_vehicles = vehicles;
    cfg.duration_frames = 240;
    cfg.noise.drift_sigma = 0.0;
    cfg.noise.edge_noise_gain = 0.0;
    cfg.noise.conf_noise = 0.0;
    cfg.noise.kp_jitter_px = 0.0;
    cfg.embedding.identity_sigma = 0.0;
    cfg.embedding.camera_view_sigma = 0.0;
    cfg.tracker.walk_rate = 0.0;
    cfg.tracker.prop_jitter_px = 0.0;
    cfg.tracker.episode_rate = 0.0;
    cfg.tracker.breath_sigma = 0.0;
    cfg.tracker.conf_noise = 0.0;
    return cfg;
}

ProjectionConfig clean_rig() {
    ProjectionConfig proj;
    for (auto& cam : proj.cameras) cam.calib_noise_sigma = 0.0;
    return proj;
}

bool embeddings_equal(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("world generation is deterministic per seed") {
    const auto cfg = noiseless_config(11, 4);
    const auto proj = clean_rig();
    const auto w1 = generate_world(cfg, proj);
    const auto w2 = generate_world(cfg, proj);
    REQUIRE(w1.vehicles.size() == w2.vehicles.size());
    for (std::size_t i = 0; i < w1.vehicles.size(); ++i) {
        CHECK(w1.vehicles[i].speed == w2.vehicles[i].speed);
        CHECK(w1.vehicles[i].lane_y == w2.vehicles[i].lane_y);
        CHECK(embeddings_equal(w1.vehicles[i].anchor, w2.vehicles[i].anchor));
    }

    const auto w3 = generate_world(noiseless_config(12, 4), proj);
    bool any_difference = false;
    for (std::size_t i = 0; i < w1.vehicles.size(); ++i)
        if (w1.vehicles[i].speed != w3.vehicles[i].speed) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("rendering is a pure function of world and frame") {
    auto cfg = noiseless_config(3, 3);
    cfg.noise.drift_sigma = 1.5;
    cfg.embedding.identity_sigma = 0.1;
    const auto proj = clean_rig();
    const auto world = generate_world(cfg, proj);
    const auto a = render_frame(world, 60, proj);
    const auto b = render_frame(world, 60, proj);
    for (int c = 0; c < 3; ++c) {
        REQUIRE(a[c].size() == b[c].size());
        for (std::size_t i = 0; i < a[c].size(); ++i) {
            CHECK(a[c][i].box.cx == b[c][i].box.cx);
            CHECK(a[c][i].conf == b[c][i].conf);
            REQUIRE(a[c][i].embedding.has_value());
            CHECK(embeddings_equal(*a[c][i].embedding, *b[c][i].embedding));
        }
    }
}

TEST_CASE("a vehicle's trajectory crosses at least two camera views") {
    const auto cfg = noiseless_config(5, 2);
    const auto proj = clean_rig();
    const auto world = generate_world(cfg, proj);
    for (int v = 0; v < cfg.n_vehicles; ++v) {
        std::set<int> seen;
        for (FrameIndex t = 0; t < cfg.duration_frames; ++t) {
            const auto frame = render_frame(world, t, proj);
            for (int c = 0; c < 3; ++c)
                for (const auto& det : frame[c])
                    if (det.gt_id && *det.gt_id == v + 1) seen.insert(c);
        }
        CHECK(seen.size() >= 2);
    }
}

TEST_CASE("handoff frames see the vehicle in two cameras at once") {
    const auto cfg = noiseless_config(7, 2);
    const auto proj = clean_rig();
    const auto world = generate_world(cfg, proj);
    int co_visible_frames = 0;
    for (FrameIndex t = 0; t < cfg.duration_frames; ++t) {
        const auto frame = render_frame(world, t, proj);
        std::map<GlobalId, int> count;
        for (int c = 0; c < 3; ++c)
            for (const auto& det : frame[c])
                if (det.gt_id) count[*det.gt_id] += 1;
        for (const auto& [_, n] : count)
            if (n >= 2) ++co_visible_frames;
    }
    CHECK(co_visible_frames > 0);
}

TEST_CASE("lookalike anchors sit at the exact configured distance") {
    auto cfg = noiseless_config(9, 4);
    cfg.embedding.lookalike_pairs.push_back({0, 1, 0.1, 6.0});
    const auto proj = clean_rig();
    const auto world = generate_world(cfg, proj);
    CHECK(euclidean_distance(world.vehicles[0].anchor, world.vehicles[1].anchor) ==
          Catch::Approx(0.1).margin(1e-9));
    // Other pairs keep the orthogonal-separation distance.
    const double base = cfg.embedding.norm * std::sqrt(2.0);
    CHECK(euclidean_distance(world.vehicles[0].anchor, world.vehicles[2].anchor) ==
          Catch::Approx(base).margin(1e-9));
    CHECK(euclidean_distance(world.vehicles[1].anchor, world.vehicles[2].anchor) ==
          Catch::Approx(base).margin(1e-6));
}

TEST_CASE("noiseless rendering reproduces the projected boxes exactly") {
    const auto cfg = noiseless_config(13, 2);
    const auto proj = clean_rig();
    const auto world = generate_world(cfg, proj);
    int checked = 0;
    for (FrameIndex t = 0; t < cfg.duration_frames; t += 7) {
        const auto frame = render_frame(world, t, proj);
        for (CameraId cam : kAllCameras) {
            for (const auto& det : frame[static_cast<int>(cam)]) {
                const auto& veh = world.vehicles[static_cast<std::size_t>(*det.gt_id - 1)];
                const auto gt_box = detail::project_vehicle_box(
                    veh, veh.position(t, cfg.fps), veh.heading(), proj.camera(cam),
                    cfg.traffic.max_range);
                REQUIRE(gt_box.has_value());
                CHECK(det.box.cx == Catch::Approx(gt_box->cx).margin(1e-12));
                CHECK(det.box.w == Catch::Approx(gt_box->w).margin(1e-12));
                ++checked;
            }
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("scripted occlusion suppresses the victim and covers its box") {
    auto cfg = noiseless_config(21, 4);
    cfg.embedding.lookalike_pairs.push_back({0, 1, 2.4, 5.0});  // co-traveling pair
    const auto proj = clean_rig();
    auto world0 = generate_world(cfg, proj);
    const auto onset = find_occlusion_onset(world0, proj, 0, 1, 5);
    REQUIRE(onset.has_value());
    cfg.noise.occlusions.push_back({0, *onset, 5});
    const auto world = generate_world(cfg, proj);

    for (FrameIndex t = *onset; t < *onset + 5; ++t) {
        const auto frame = render_frame(world, t, proj);
        bool victim_seen = false;
        bool covered = false;
        for (CameraId cam : kAllCameras) {
            const auto& veh = world.vehicles[0];
            const auto victim_box = detail::project_vehicle_box(
                veh, veh.position(t, cfg.fps), veh.heading(), proj.camera(cam),
                cfg.traffic.max_range);
            for (const auto& det : frame[static_cast<int>(cam)]) {
                if (det.gt_id == GlobalId{1}) victim_seen = true;
                if (det.gt_id == GlobalId{2} && victim_box &&
                    occlusion_coefficient(*victim_box, det.box) > 0.6)
                    covered = true;
            }
        }
        CHECK_FALSE(victim_seen);
        CHECK(covered);
    }
}

TEST_CASE("oracle tracker drift starts at zero and resets on reinitialize") {
    auto cfg = noiseless_config(31, 1);
    cfg.tracker.walk_rate = 0.1;
    const auto proj = clean_rig();
    SimTrackerBackend backend(cfg, proj);

    Detection seed;
    seed.camera = CameraId::Front;
    seed.frame = 0;
    seed.box = {640, 360, 120, 80};
    seed.conf = 0.9;
    seed.gt_id = 1;
    backend.open_track(CameraId::Front, 1, seed);
    CHECK(backend.drift_magnitude(CameraId::Front, 1).value() == 0.0);

    std::vector<Detection> dets = {seed};
    for (FrameIndex t = 1; t <= 25; ++t) {
        dets[0].frame = t;
        FrameInput input{CameraId::Front, t, &dets};
        REQUIRE(backend.propose(CameraId::Front, 1, input).has_value());
    }
    CHECK(backend.drift_magnitude(CameraId::Front, 1).value() > 0.0);

    backend.reinitialize(CameraId::Front, 1, seed.box, 26);
    CHECK(backend.drift_magnitude(CameraId::Front, 1).value() == 0.0);

    // age restarts: the first post-update proposal stays put
    dets[0].frame = 26;
    FrameInput input{CameraId::Front, 26, &dets};
    const auto prop = backend.propose(CameraId::Front, 1, input);
    REQUIRE(prop.has_value());
    CHECK(backend.drift_magnitude(CameraId::Front, 1).value() == 0.0);
}

TEST_CASE("edge proximity amplifies accumulated drift at equal template age") {
    auto base = noiseless_config(0, 1);
    base.tracker.walk_rate = 0.05;
    base.tracker.walk_edge_gain = 2.0;
    const auto proj = clean_rig();

    auto mean_drift = [&](double cx, std::uint64_t seeds) {
        double acc = 0.0;
        for (std::uint64_t s = 1; s <= seeds; ++s) {
            auto cfg = base;
            cfg.seed = s;
            SimTrackerBackend backend(cfg, proj);
            Detection det;
            det.camera = CameraId::Front;
            det.box = {cx, 360, 100, 70};
            det.conf = 0.9;
            det.gt_id = 1;
            backend.open_track(CameraId::Front, 1, det);
            std::vector<Detection> dets = {det};
            for (FrameIndex t = 1; t <= 30; ++t) {
                dets[0].frame = t;
                FrameInput input{CameraId::Front, t, &dets};
                backend.propose(CameraId::Front, 1, input);
            }
            acc += backend.drift_magnitude(CameraId::Front, 1).value();
        }
        return acc / static_cast<double>(seeds);
    };

    const double center = mean_drift(640.0, 1000);
    const double edge = mean_drift(1200.0, 1000);
    CHECK(edge > center);
}

TEST_CASE("hidden targets are reacquired only within the memory span") {
    auto cfg = noiseless_config(41, 1);
    const auto proj = clean_rig();
    cfg.tracker.reacquire_max_frames = 4;

    auto run_hide = [&](int hide_frames) {
        SimTrackerBackend backend(cfg, proj);
        Detection own;
        own.camera = CameraId::Front;
        own.box = {600, 300, 100, 70};
        own.conf = 0.9;
        own.gt_id = 1;
        Detection cover = own;
        cover.box = {610, 300, 170, 120};
        cover.gt_id = 2;
        backend.open_track(CameraId::Front, 1, own);

        FrameIndex t = 1;
        // visible phase
        for (; t <= 3; ++t) {
            std::vector<Detection> dets = {own, cover};
            FrameInput input{CameraId::Front, t, &dets};
            REQUIRE(backend.propose(CameraId::Front, 1, input).has_value());
        }
        // hidden phase: only the covering box remains
        for (int k = 0; k < hide_frames; ++k, ++t) {
            std::vector<Detection> dets = {cover};
            FrameInput input{CameraId::Front, t, &dets};
            REQUIRE(backend.propose(CameraId::Front, 1, input).has_value());  // glides
        }
        // reappearance
        std::vector<Detection> dets = {own, cover};
        FrameInput input{CameraId::Front, t, &dets};
        const auto prop = backend.propose(CameraId::Front, 1, input);
        REQUIRE(prop.has_value());
        return prop->box;
    };

    // Short hide: re-locks onto the original target's box.
    const auto short_box = run_hide(3);
    CHECK(short_box.cx == Catch::Approx(600.0).margin(1.0));
    // Long hide: the tracker stays with the covering vehicle.
    const auto long_box = run_hide(8);
    CHECK(long_box.cx == Catch::Approx(610.0).margin(1.0));
}
