#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "sreid/io.hpp"
#include "sreid/rng.hpp"

using namespace sreid;

namespace {

std::vector<DatasetRecord> random_records(Rng& rng, int n) {
    std::vector<DatasetRecord> records;
    for (int i = 0; i < n; ++i) {
        DatasetRecord rec;
        rec.seq = "seq-a";
        rec.cam = static_cast<CameraId>(rng.uniform_int(0, 2));
        rec.frame = i;
        const int dets = static_cast<int>(rng.uniform_int(0, 4));
        for (int d = 0; d < dets; ++d) {
            Detection det;
            det.camera = rec.cam;
            det.frame = rec.frame;
            det.box = {rng.uniform(0, 1280), rng.uniform(0, 720), rng.uniform(5, 200),
                       rng.uniform(5, 200)};
            det.conf = rng.uniform();
            if (rng.uniform() < 0.7) {
                WheelKeypoints kp;
                if (rng.uniform() < 0.8) kp.front = PixelPoint{rng.uniform(0, 1280), rng.uniform(0, 720)};
                if (rng.uniform() < 0.8) kp.rear = PixelPoint{rng.uniform(0, 1280), rng.uniform(0, 720)};
                if (kp.front || kp.rear) det.keypoints = kp;
            }
            if (rng.uniform() < 0.8) {
                Embedding e(8);
                for (auto& x : e) x = rng.gauss();
                det.embedding = e;
            }
            if (rng.uniform() < 0.9) det.gt_id = rng.uniform_int(1, 6);
            rec.dets.push_back(std::move(det));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

TEST_CASE("dataset serialization round-trips losslessly") {
    Rng rng(77);
    const auto records = random_records(rng, 40);
    std::ostringstream os;
    write_dataset(os, records);
    std::istringstream is(os.str());
    const auto back = read_dataset(is);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].seq == records[i].seq);
        CHECK(back[i].cam == records[i].cam);
        CHECK(back[i].frame == records[i].frame);
        REQUIRE(back[i].dets.size() == records[i].dets.size());
        for (std::size_t d = 0; d < records[i].dets.size(); ++d) {
            const auto& a = records[i].dets[d];
            const auto& b = back[i].dets[d];
            CHECK(a.box.cx == b.box.cx);
            CHECK(a.box.h == b.box.h);
            CHECK(a.conf == b.conf);
            CHECK(a.gt_id == b.gt_id);
            CHECK(a.keypoints.has_value() == b.keypoints.has_value());
            if (a.embedding) {
                REQUIRE(b.embedding);
                CHECK(*a.embedding == *b.embedding);
            }
        }
    }

    // A second serialization is byte-identical.
    std::ostringstream os2;
    write_dataset(os2, back);
    CHECK(os2.str() == os.str());
}

TEST_CASE("results serialization round-trips") {
    ResultsRecord rec;
    rec.seq = "seq-a";
    rec.cam = CameraId::Right;
    rec.frame = 12;
    rec.outputs = {{5, {100, 50, 40, 30}, 0.8}, {9, {300, 60, 50, 35}, 0.4}};
    rec.occluded = {9};
    rec.events = {{TrackEventType::TemplateUpdated, 5}, {TrackEventType::Deleted, 2}};
    AssociationEvent ev;
    ev.camera = rec.cam;
    ev.frame = rec.frame;
    ev.region = ImageRegion::RightEdge;
    ev.assigned = 5;
    ev.inherited = true;
    ev.score = 1.25;
    ev.query_gt = 3;
    ev.inherited_gt = 3;
    CandidateScore cs;
    cs.id = 5;
    cs.camera = CameraId::Front;
    cs.d_f = 0.4;
    cs.s1 = 1.2;
    cs.d_k = 0.3;
    cs.s2 = 1.4;
    cs.fused = 1.3;
    cs.gate_passed = true;
    cs.spatial_used = true;
    ev.candidates.push_back(cs);
    rec.associations.push_back(ev);

    std::ostringstream os;
    write_results(os, {rec});
    std::istringstream is(os.str());
    const auto back = read_results(is);
    REQUIRE(back.size() == 1);
    CHECK(back[0].outputs.size() == 2);
    CHECK(back[0].outputs[1].c_r == 0.4);
    CHECK(back[0].occluded == std::vector<GlobalId>{9});
    REQUIRE(back[0].events.size() == 2);
    CHECK(back[0].events[0].type == TrackEventType::TemplateUpdated);
    REQUIRE(back[0].associations.size() == 1);
    const auto& bev = back[0].associations[0];
    CHECK(bev.assigned == 5);
    CHECK(bev.inherited);
    CHECK(bev.query_gt == GlobalId{3});
    REQUIRE(bev.candidates.size() == 1);
    CHECK(bev.candidates[0].s2 == 1.4);
    CHECK(bev.candidates[0].gate_passed);
}

TEST_CASE("malformed dataset lines report the line number") {
    std::istringstream is("{\"seq\":\"a\",\"cam\":\"left\",\"frame\":0,\"dets\":[]}\nnot json\n");
    try {
        read_dataset(is);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("config parsing rejects unknown keys with their location") {
    const auto good = json::parse(R"({"quality": {"t1": 0.5}})");
    CHECK(run_config_from_json(good).quality.t1 == 0.5);

    const auto bad = json::parse(R"({"quality": {"t1": 0.5, "bogus": 1}})");
    try {
        run_config_from_json(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("quality") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
    }

    const auto top = json::parse(R"({"qualty": {}})");
    CHECK_THROWS_AS(run_config_from_json(top), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
    CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"quality": {"t1": 1.5}})")),
                    ConfigError);
    CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"quality": {"m_window": 0}})")),
                    ConfigError);
    CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"mct": {"alpha": 0, "beta": 0}})")),
                    ConfigError);
    CHECK_THROWS_AS(
        run_config_from_json(json::parse(R"({"sim": {"n_vehicles": 100}})")),
        ConfigError);
    CHECK_THROWS_AS(
        run_config_from_json(json::parse(
            R"({"sim": {"noise": {"occlusions": [{"vehicle": 9, "start": 0, "length": 3}]}}})")),
        ConfigError);
}

TEST_CASE("camera rig parsing places cameras by name") {
    const auto root = json::parse(R"({
      "projection": {
        "r0": 0.3,
        "cameras": [
          {"name": "front", "x": 2.0, "yaw_deg": 0, "hfov_deg": 100},
          {"name": "left", "x": 0.4, "y": 1.0, "yaw_deg": 85},
          {"name": "right", "x": 0.4, "y": -1.0, "yaw_deg": -85}
        ]
      }
    })");
    const auto cfg = run_config_from_json(root);
    CHECK(cfg.projection.r0 == 0.3);
    CHECK(cfg.projection.camera(CameraId::Front).position.x == 2.0);
    CHECK(cfg.projection.camera(CameraId::Left).yaw ==
          Catch::Approx(deg_to_rad(85.0)));
    CHECK(cfg.projection.camera(CameraId::Right).position.y == -1.0);
}

TEST_CASE("update metric and state scope parse from strings") {
    auto cfg = run_config_from_json(json::parse(
        R"({"quality": {"update_metric": "iou_t"}, "eval": {"state_scope": "global"}})"));
    CHECK(cfg.quality.update_metric == UpdateMetric::IouT);
    CHECK(cfg.eval.scope == StateScope::Global);
    CHECK_THROWS_AS(
        run_config_from_json(json::parse(R"({"quality": {"update_metric": "nope"}})")),
        ConfigError);
}
