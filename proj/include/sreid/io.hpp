// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sreid/core.hpp"
#include "sreid/engine.hpp"
#include "sreid/metrics.hpp"
#include "sreid/mct.hpp"
#include "sreid/projection.hpp"
#include "sreid/quality.hpp"
#include "sreid/sim.hpp"

namespace sreid {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : DataError {
    using DataError::DataError;
};

struct SequenceMismatchError : DataError {
    using DataError::DataError;
};

/// One dataset line: every detection of one camera in one frame.
struct DatasetRecord {
    std::string seq;
    CameraId cam = CameraId::Front;
    FrameIndex frame = 0;
    std::vector<Detection> dets;
};

/// One results line: tracker outputs and events of one camera in one frame.
struct ResultsRecord {
    std::string seq;
    CameraId cam = CameraId::Front;
    FrameIndex frame = 0;
    std::vector<TrackOutput> outputs;
    std::vector<GlobalId> occluded;
    std::vector<TrackEvent> events;
    std::vector<AssociationEvent> associations;
};

struct EvalConfig {
    double iou_min = 0.5;
    StateScope scope = StateScope::PerCamera;

    void validate() const {
        if (!(iou_min > 0.0 && iou_min <= 1.0))
            throw std::invalid_argument("eval.iou_min must be in (0,1]");
    }
};

struct RunConfig {
    QualityConfig quality;
    MctConfig mct;
    ProjectionConfig projection;
    ScenarioConfig sim;
    EvalConfig eval;

    void validate() const {
        quality.validate();
        mct.validate();
        projection.validate();
        sim.validate();
        eval.validate();
    }
};

// ---------------------------------------------------------------------------
// JSON helpers

namespace ioheck {

inline void expect_keys(const json& obj, const std::string& where,
                        std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) obj.at(key).get_to(out);
}

}  // namespace ioheck

inline json box_to_json(const BoundingBox& b) { return json::array({b.cx, b.cy, b.w, b.h}); }

inline BoundingBox box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw DataError("box must be [cx,cy,w,h]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json detection_to_json(const Detection& det) {
    json j;
    j["box"] = box_to_json(det.box);
    j["conf"] = det.conf;
    if (det.keypoints) {
        json kp;
        kp["front"] = det.keypoints->front
                          ? json::array({det.keypoints->front->x, det.keypoints->front->y})
                          : json(nullptr);
        kp["rear"] = det.keypoints->rear
                         ? json::array({det.keypoints->rear->x, det.keypoints->rear->y})
                         : json(nullptr);
        j["kp"] = kp;
    } else {
        j["kp"] = nullptr;
    }
    j["emb"] = det.embedding ? json(*det.embedding) : json(nullptr);
    j["gt"] = det.gt_id ? json(*det.gt_id) : json(nullptr);
    return j;
}

inline Detection detection_from_json(const json& j, CameraId cam, FrameIndex frame) {
    Detection det;
    det.camera = cam;
    det.frame = frame;
    det.box = box_from_json(j.at("box"));
    det.conf = j.at("conf").get<double>();
    if (j.contains("kp") && !j.at("kp").is_null()) {
        const auto& kp = j.at("kp");
        WheelKeypoints w;
        if (kp.contains("front") && !kp.at("front").is_null())
            w.front = PixelPoint{kp.at("front")[0].get<double>(), kp.at("front")[1].get<double>()};
        if (kp.contains("rear") && !kp.at("rear").is_null())
            w.rear = PixelPoint{kp.at("rear")[0].get<double>(), kp.at("rear")[1].get<double>()};
        if (w.front || w.rear) det.keypoints = w;
    }
    if (j.contains("emb") && !j.at("emb").is_null())
        det.embedding = j.at("emb").get<Embedding>();
    if (j.contains("gt") && !j.at("gt").is_null()) det.gt_id = j.at("gt").get<GlobalId>();
    return det;
}

inline void write_dataset(std::ostream& os, const std::vector<DatasetRecord>& records) {
    for (const auto& rec : records) {
        json j;
        j["seq"] = rec.seq;
        j["cam"] = to_string(rec.cam);
        j["frame"] = rec.frame;
        json dets = json::array();
        for (const auto& det : rec.dets) dets.push_back(detection_to_json(det));
        j["dets"] = std::move(dets);
        os << j.dump() << '\n';
    }
}

inline std::vector<DatasetRecord> read_dataset(std::istream& is) {
    std::vector<DatasetRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            DatasetRecord rec;
            rec.seq = j.at("seq").get<std::string>();
            const auto cam = camera_from_string(j.at("cam").get<std::string>());
            if (!cam) throw DataError("unknown camera name");
            rec.cam = *cam;
            rec.frame = j.at("frame").get<FrameIndex>();
            for (const auto& dj : j.at("dets"))
                rec.dets.push_back(detection_from_json(dj, rec.cam, rec.frame));
            records.push_back(std::move(rec));
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

inline json association_event_to_json(const AssociationEvent& ev) {
    json j;
    j["region"] = to_string(ev.region);
    j["assigned"] = ev.assigned;
    j["inherited"] = ev.inherited;
    j["score"] = ev.score;
    j["query_gt"] = ev.query_gt ? json(*ev.query_gt) : json(nullptr);
    j["inherited_gt"] = ev.inherited_gt ? json(*ev.inherited_gt) : json(nullptr);
    json cands = json::array();
    for (const auto& c : ev.candidates) {
        json cj;
        cj["id"] = c.id;
        cj["cam"] = to_string(c.camera);
        cj["df"] = c.d_f;
        cj["s1"] = c.s1;
        cj["dk"] = c.d_k ? json(*c.d_k) : json(nullptr);
        cj["s2"] = c.s2 ? json(*c.s2) : json(nullptr);
        cj["s"] = c.fused;
        cj["gate"] = c.gate_passed;
        cands.push_back(std::move(cj));
    }
    j["candidates"] = std::move(cands);
    return j;
}

inline AssociationEvent association_event_from_json(const json& j, CameraId cam,
                                                    FrameIndex frame) {
    AssociationEvent ev;
    ev.camera = cam;
    ev.frame = frame;
    const std::string region = j.at("region").get<std::string>();
    ev.region = region == "left_edge" ? ImageRegion::LeftEdge
                : region == "right_edge" ? ImageRegion::RightEdge
                                         : ImageRegion::Interior;
    ev.assigned = j.at("assigned").get<GlobalId>();
    ev.inherited = j.at("inherited").get<bool>();
    ev.score = j.at("score").get<double>();
    if (!j.at("query_gt").is_null()) ev.query_gt = j.at("query_gt").get<GlobalId>();
    if (!j.at("inherited_gt").is_null()) ev.inherited_gt = j.at("inherited_gt").get<GlobalId>();
    for (const auto& cj : j.at("candidates")) {
        CandidateScore c;
        c.id = cj.at("id").get<GlobalId>();
        c.camera = *camera_from_string(cj.at("cam").get<std::string>());
        c.d_f = cj.at("df").get<double>();
        c.s1 = cj.at("s1").get<double>();
        if (!cj.at("dk").is_null()) c.d_k = cj.at("dk").get<double>();
        if (!cj.at("s2").is_null()) {
            c.s2 = cj.at("s2").get<double>();
            c.spatial_used = true;
        }
        c.fused = cj.at("s").get<double>();
        c.gate_passed = cj.at("gate").get<bool>();
        ev.candidates.push_back(std::move(c));
    }
    return ev;
}

inline void write_results(std::ostream& os, const std::vector<ResultsRecord>& records) {
    for (const auto& rec : records) {
        json j;
        j["seq"] = rec.seq;
        j["cam"] = to_string(rec.cam);
        j["frame"] = rec.frame;
        json outs = json::array();
        for (const auto& o : rec.outputs)
            outs.push_back(json{{"id", o.id}, {"box", box_to_json(o.box)}, {"cr", o.c_r}});
        j["outputs"] = std::move(outs);
        j["occ"] = rec.occluded;
        json evs = json::array();
        for (const auto& e : rec.events)
            evs.push_back(json{{"type", to_string(e.type)}, {"id", e.id}});
        j["events"] = std::move(evs);
        json assoc = json::array();
        for (const auto& a : rec.associations) assoc.push_back(association_event_to_json(a));
        j["assoc"] = std::move(assoc);
        os << j.dump() << '\n';
    }
}

inline std::vector<ResultsRecord> read_results(std::istream& is) {
    std::vector<ResultsRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            ResultsRecord rec;
            rec.seq = j.at("seq").get<std::string>();
            const auto cam = camera_from_string(j.at("cam").get<std::string>());
            if (!cam) throw DataError("unknown camera name");
            rec.cam = *cam;
            rec.frame = j.at("frame").get<FrameIndex>();
            for (const auto& oj : j.at("outputs"))
                rec.outputs.push_back({oj.at("id").get<GlobalId>(),
                                       box_from_json(oj.at("box")), oj.at("cr").get<double>()});
            rec.occluded = j.at("occ").get<std::vector<GlobalId>>();
            for (const auto& ej : j.at("events")) {
                const std::string type = ej.at("type").get<std::string>();
                TrackEvent te;
                te.id = ej.at("id").get<GlobalId>();
                te.type = type == "created" ? TrackEventType::Created
                          : type == "template_updated" ? TrackEventType::TemplateUpdated
                          : type == "occluded" ? TrackEventType::Occluded
                                               : TrackEventType::Deleted;
                rec.events.push_back(te);
            }
            for (const auto& aj : j.at("assoc"))
                rec.associations.push_back(association_event_from_json(aj, rec.cam, rec.frame));
            records.push_back(std::move(rec));
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("results line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Run configuration

inline CameraModel camera_from_config(const json& j, const std::string& where) {
    ioheck::expect_keys(j, where,
                        {"name", "x", "y", "yaw_deg", "hfov_deg", "vfov_deg", "height_m",
                         "pitch_deg", "width", "height", "calib_sigma"});
    CameraModel cam;
    if (j.contains("name")) {
        const auto id = camera_from_string(j.at("name").get<std::string>());
        if (!id) throw ConfigError(where + ": unknown camera name");
        cam.id = *id;
    }
    if (j.contains("x")) cam.position.x = j.at("x").get<double>();
    if (j.contains("y")) cam.position.y = j.at("y").get<double>();
    if (j.contains("yaw_deg")) cam.yaw = deg_to_rad(j.at("yaw_deg").get<double>());
    if (j.contains("hfov_deg")) cam.hfov = deg_to_rad(j.at("hfov_deg").get<double>());
    if (j.contains("vfov_deg")) cam.vfov = deg_to_rad(j.at("vfov_deg").get<double>());
    if (j.contains("height_m")) cam.height = j.at("height_m").get<double>();
    if (j.contains("pitch_deg")) cam.pitch = deg_to_rad(j.at("pitch_deg").get<double>());
    if (j.contains("width")) cam.image_width = j.at("width").get<double>();
    if (j.contains("height")) cam.image_height = j.at("height").get<double>();
    if (j.contains("calib_sigma")) cam.calib_noise_sigma = j.at("calib_sigma").get<double>();
    return cam;
}

inline RunConfig run_config_from_json(const json& root) {
    RunConfig cfg;
    ioheck::expect_keys(root, "config", {"quality", "mct", "projection", "sim", "eval"});

    if (root.contains("quality")) {
        const auto& q = root.at("quality");
        ioheck::expect_keys(q, "quality",
                            {"r_side", "t1", "t2", "m_window", "t_o", "n_occl", "update_metric"});
        ioheck::read_into(q, "r_side", cfg.quality.r_side);
        ioheck::read_into(q, "t1", cfg.quality.t1);
        ioheck::read_into(q, "t2", cfg.quality.t2);
        ioheck::read_into(q, "m_window", cfg.quality.m_window);
        ioheck::read_into(q, "t_o", cfg.quality.t_o);
        ioheck::read_into(q, "n_occl", cfg.quality.n_occl);
        if (q.contains("update_metric")) {
            const std::string m = q.at("update_metric").get<std::string>();
            if (m == "iou_r")
                cfg.quality.update_metric = UpdateMetric::IouR;
            else if (m == "iou_t")
                cfg.quality.update_metric = UpdateMetric::IouT;
            else if (m == "none")
                cfg.quality.update_metric = UpdateMetric::None;
            else
                throw ConfigError("quality.update_metric: expected iou_r|iou_t|none");
        }
    }

    if (root.contains("mct")) {
        const auto& m = root.at("mct");
        ioheck::expect_keys(m, "mct",
                            {"gallery_size", "tau_s", "edge_fraction", "alpha", "beta", "epsilon",
                             "spatial_gate", "kp_max_age", "spawn_iou"});
        ioheck::read_into(m, "gallery_size", cfg.mct.gallery_size);
        ioheck::read_into(m, "tau_s", cfg.mct.tau_s);
        ioheck::read_into(m, "edge_fraction", cfg.mct.edge_fraction);
        ioheck::read_into(m, "alpha", cfg.mct.weights.alpha);
        ioheck::read_into(m, "beta", cfg.mct.weights.beta);
        ioheck::read_into(m, "epsilon", cfg.mct.epsilon);
        ioheck::read_into(m, "spatial_gate", cfg.mct.spatial_gate);
        ioheck::read_into(m, "kp_max_age", cfg.mct.kp_max_age);
        ioheck::read_into(m, "spawn_iou", cfg.mct.spawn_iou);
    }

    if (root.contains("projection")) {
        const auto& p = root.at("projection");
        ioheck::expect_keys(p, "projection", {"r0", "k_per_meter", "cameras"});
        ioheck::read_into(p, "r0", cfg.projection.r0);
        ioheck::read_into(p, "k_per_meter", cfg.projection.k_per_meter);
        if (p.contains("cameras")) {
            const auto& cams = p.at("cameras");
            if (!cams.is_array() || cams.size() != 3)
                throw ConfigError("projection.cameras: expected exactly 3 cameras");
            for (std::size_t i = 0; i < 3; ++i) {
                auto cam = camera_from_config(cams[i], "projection.cameras[" +
                                                           std::to_string(i) + "]");
                cfg.projection.cameras[static_cast<int>(cam.id)] = cam;
            }
        }
    }

    if (root.contains("sim")) {
        const auto& s = root.at("sim");
        ioheck::expect_keys(s, "sim",
                            {"seed", "sequence_id", "n_vehicles", "duration_frames", "fps",
                             "noise", "embedding", "tracker", "traffic"});
        ioheck::read_into(s, "seed", cfg.sim.seed);
        ioheck::read_into(s, "sequence_id", cfg.sim.sequence_id);
        ioheck::read_into(s, "n_vehicles", cfg.sim.n_vehicles);
        ioheck::read_into(s, "duration_frames", cfg.sim.duration_frames);
        ioheck::read_into(s, "fps", cfg.sim.fps);
        if (s.contains("noise")) {
            const auto& n = s.at("noise");
            ioheck::expect_keys(n, "sim.noise",
                                {"drift_sigma", "edge_noise_gain", "conf_noise", "kp_jitter_px",
                                 "occlusions"});
            ioheck::read_into(n, "drift_sigma", cfg.sim.noise.drift_sigma);
            ioheck::read_into(n, "edge_noise_gain", cfg.sim.noise.edge_noise_gain);
            ioheck::read_into(n, "conf_noise", cfg.sim.noise.conf_noise);
            ioheck::read_into(n, "kp_jitter_px", cfg.sim.noise.kp_jitter_px);
            if (n.contains("occlusions")) {
                for (const auto& ej : n.at("occlusions")) {
                    ioheck::expect_keys(ej, "sim.noise.occlusions[]",
                                        {"vehicle", "start", "length"});
                    OcclusionEpisode ep;
                    ep.vehicle = ej.at("vehicle").get<int>();
                    ep.start = ej.at("start").get<FrameIndex>();
                    ep.length = ej.at("length").get<int>();
                    cfg.sim.noise.occlusions.push_back(ep);
                }
            }
        }
        if (s.contains("embedding")) {
            const auto& e = s.at("embedding");
            ioheck::expect_keys(e, "sim.embedding",
                                {"dim", "norm", "identity_sigma", "camera_view_sigma",
                                 "lookalike_pairs"});
            ioheck::read_into(e, "dim", cfg.sim.embedding.dim);
            ioheck::read_into(e, "norm", cfg.sim.embedding.norm);
            ioheck::read_into(e, "identity_sigma", cfg.sim.embedding.identity_sigma);
            ioheck::read_into(e, "camera_view_sigma", cfg.sim.embedding.camera_view_sigma);
            if (e.contains("lookalike_pairs")) {
                for (const auto& lj : e.at("lookalike_pairs")) {
                    ioheck::expect_keys(lj, "sim.embedding.lookalike_pairs[]",
                                        {"a", "b", "delta", "gap_m"});
                    LookalikePair lp;
                    lp.a = lj.at("a").get<int>();
                    lp.b = lj.at("b").get<int>();
                    ioheck::read_into(lj, "delta", lp.delta);
                    ioheck::read_into(lj, "gap_m", lp.gap_m);
                    cfg.sim.embedding.lookalike_pairs.push_back(lp);
                }
            }
        }
        if (s.contains("tracker")) {
            const auto& t = s.at("tracker");
            ioheck::expect_keys(
                t, "sim.tracker",
                {"walk_rate", "walk_edge_gain", "prop_jitter_px", "episode_rate",
                 "episode_edge_gain", "episode_min_len", "episode_max_len", "episode_step_frac",
                 "breath_sigma", "bad_update_base", "bad_update_size_gain", "conf_base",
                 "conf_step_gain", "conf_size_gain", "conf_noise", "glide", "cover_min",
                 "reacquire_max_frames", "stale_conf_scale"});
            auto& tk = cfg.sim.tracker;
            ioheck::read_into(t, "walk_rate", tk.walk_rate);
            ioheck::read_into(t, "walk_edge_gain", tk.walk_edge_gain);
            ioheck::read_into(t, "prop_jitter_px", tk.prop_jitter_px);
            ioheck::read_into(t, "episode_rate", tk.episode_rate);
            ioheck::read_into(t, "episode_edge_gain", tk.episode_edge_gain);
            ioheck::read_into(t, "episode_min_len", tk.episode_min_len);
            ioheck::read_into(t, "episode_max_len", tk.episode_max_len);
            ioheck::read_into(t, "episode_step_frac", tk.episode_step_frac);
            ioheck::read_into(t, "breath_sigma", tk.breath_sigma);
            ioheck::read_into(t, "bad_update_base", tk.bad_update_base);
            ioheck::read_into(t, "bad_update_size_gain", tk.bad_update_size_gain);
            ioheck::read_into(t, "conf_base", tk.conf_base);
            ioheck::read_into(t, "conf_step_gain", tk.conf_step_gain);
            ioheck::read_into(t, "conf_size_gain", tk.conf_size_gain);
            ioheck::read_into(t, "conf_noise", tk.conf_noise);
            ioheck::read_into(t, "glide", tk.glide);
            ioheck::read_into(t, "cover_min", tk.cover_min);
            ioheck::read_into(t, "reacquire_max_frames", tk.reacquire_max_frames);
            ioheck::read_into(t, "stale_conf_scale", tk.stale_conf_scale);
        }
        if (s.contains("traffic")) {
            const auto& tr = s.at("traffic");
            ioheck::expect_keys(tr, "sim.traffic",
                                {"speed_min", "speed_max", "lane_near", "lane_far", "max_range",
                                 "spawn_gap_frames"});
            auto& tc = cfg.sim.traffic;
            ioheck::read_into(tr, "speed_min", tc.speed_min);
            ioheck::read_into(tr, "speed_max", tc.speed_max);
            ioheck::read_into(tr, "lane_near", tc.lane_near);
            ioheck::read_into(tr, "lane_far", tc.lane_far);
            ioheck::read_into(tr, "max_range", tc.max_range);
            ioheck::read_into(tr, "spawn_gap_frames", tc.spawn_gap_frames);
        }
    }

    if (root.contains("eval")) {
        const auto& e = root.at("eval");
        ioheck::expect_keys(e, "eval", {"iou_min", "state_scope"});
        ioheck::read_into(e, "iou_min", cfg.eval.iou_min);
        if (e.contains("state_scope")) {
            const std::string sc = e.at("state_scope").get<std::string>();
            if (sc == "per_camera")
                cfg.eval.scope = StateScope::PerCamera;
            else if (sc == "global")
                cfg.eval.scope = StateScope::Global;
            else
                throw ConfigError("eval.state_scope: expected per_camera|global");
        }
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return run_config_from_json(root);
}

}  // namespace sreid
