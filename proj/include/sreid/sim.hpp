// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sreid/core.hpp"
#include "sreid/projection.hpp"
#include "sreid/quality.hpp"
#include "sreid/rng.hpp"
#include "sreid/sct.hpp"

namespace sreid {

struct OcclusionEpisode {
    int vehicle = 0;
    FrameIndex start = 0;
    int length = 0;
};

struct LookalikePair {
    int a = 0;
    int b = 0;
    double delta = 0.1;  // exact anchor embedding distance
    double gap_m = 8.0;  // longitudinal spacing between the two vehicles
};

struct SimNoiseConfig {
    double drift_sigma = 1.0;     // detection box noise, pixels
    double edge_noise_gain = 1.5;  // extra noise toward image edges
    double conf_noise = 0.02;
    double kp_jitter_px = 1.0;
    std::vector<OcclusionEpisode> occlusions;
};

struct SimEmbeddingConfig {
    int dim = 64;
    double norm = 1.75;             // anchors live on a sphere of this radius
    double identity_sigma = 0.08;   // per-observation offset, expected norm
    double camera_view_sigma = 0.30;  // per (vehicle, camera) offset, expected norm
    std::vector<LookalikePair> lookalike_pairs;
};

/// Behavior knobs of the simulated single-object tracker.
struct SimTrackerConfig {
    double walk_rate = 0.02;        // px of walk step per frame of template age
    double walk_edge_gain = 2.0;
    double prop_jitter_px = 0.6;    // iid per-frame proposal jitter
    double episode_rate = 0.0;      // per-frame chance of a distortion burst
    double episode_edge_gain = 2.0;
    int episode_min_len = 5;
    int episode_max_len = 10;
    double episode_step_frac = 0.33;  // burst step sigma as a fraction of box width
    double breath_sigma = 0.0;        // box size jitter at full edge proximity
    double bad_update_base = 0.0;     // chance a template update corrupts the track
    double bad_update_size_gain = 0.0;
    double conf_base = 0.92;
    double conf_step_gain = 1.8;
    double conf_size_gain = 1.6;
    double conf_noise = 0.02;
    double glide = 0.45;            // approach rate toward a covering box while hidden
    double cover_min = 0.5;         // coverage needed to latch onto an occluder
    int reacquire_max_frames = 4;   // template memory: longer absences lose the target
    double stale_conf_scale = 0.8;  // confidence penalty after locking onto the wrong car
};

struct SimTrafficConfig {
    double speed_min = 6.0;   // m/s
    double speed_max = 9.0;
    // Lane offsets keep per-frame image motion inside the drift square even
    // at closest approach, so clean traffic never looks like center drift.
    double lane_near = 14.0;  // meters off the ego centerline
    double lane_far = 18.0;
    double max_range = 28.0;  // detector range, meters
    int spawn_gap_frames = 36;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::string sequence_id;  // defaults to "seq-<seed>"
    int n_vehicles = 4;
    FrameIndex duration_frames = 300;
    double fps = 30.0;
    SimNoiseConfig noise;
    SimEmbeddingConfig embedding;
    SimTrackerConfig tracker;
    SimTrafficConfig traffic;

    std::string effective_sequence_id() const {
        return sequence_id.empty() ? "seq-" + std::to_string(seed) : sequence_id;
    }

    void validate() const {
        if (duration_frames < 1) throw std::invalid_argument("sim.duration_frames must be >= 1");
        if (n_vehicles < 0) throw std::invalid_argument("sim.n_vehicles must be >= 0");
        if (!(fps > 0.0)) throw std::invalid_argument("sim.fps must be > 0");
        if (embedding.dim < 1) throw std::invalid_argument("sim.embedding.dim must be >= 1");
        if (n_vehicles > embedding.dim)
            throw std::invalid_argument("sim.n_vehicles must not exceed the embedding dimension");
        if (noise.drift_sigma < 0.0 || noise.kp_jitter_px < 0.0 || noise.conf_noise < 0.0 ||
            embedding.identity_sigma < 0.0 || embedding.camera_view_sigma < 0.0)
            throw std::invalid_argument("sim noise sigmas must be >= 0");
        for (const auto& ep : noise.occlusions) {
            if (ep.vehicle < 0 || ep.vehicle >= n_vehicles)
                throw std::invalid_argument("sim occlusion episode names an unknown vehicle");
            if (ep.length < 1) throw std::invalid_argument("sim occlusion length must be >= 1");
        }
        for (const auto& lp : embedding.lookalike_pairs)
            if (lp.a < 0 || lp.b < 0 || lp.a >= n_vehicles || lp.b >= n_vehicles || lp.a == lp.b)
                throw std::invalid_argument("sim lookalike pair names an unknown vehicle");
    }
};

/// Ground truth the paper's dataset would provide: trajectories, vehicle
/// shapes, appearance anchors, and the rig's systematic calibration error.
struct ScenarioWorld {
    struct Vehicle {
        bool oncoming = false;
        double lane_y = 0.0;
        double speed = 0.0;      // m/s along x
        double spawn_x = 0.0;
        FrameIndex spawn_frame = 0;
        double length = 4.5, width = 1.8, height = 1.5, wheelbase = 2.8;
        Embedding anchor;
        std::array<Embedding, 3> view_offset;  // per camera

        GroundPoint position(FrameIndex t, double fps) const {
            const double dt = static_cast<double>(t - spawn_frame) / fps;
            const double dir = oncoming ? -1.0 : 1.0;
            return {spawn_x + dir * speed * dt, lane_y};
        }
        double heading() const { return oncoming ? kPi : 0.0; }
    };

    ScenarioConfig cfg;
    std::vector<Vehicle> vehicles;
    std::array<GroundPoint, 3> calib_offset{};  // per camera, meters
    std::vector<int> episode_occluder;          // resolved per configured episode
};

namespace detail {

inline Embedding gauss_vector(Rng& rng, int dim, double expected_norm) {
    Embedding v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = rng.gauss();
    const double scale = expected_norm / std::sqrt(static_cast<double>(dim));
    for (auto& x : v) x *= scale;
    return v;
}

inline double dot(const Embedding& a, const Embedding& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm(const Embedding& a) { return std::sqrt(dot(a, a)); }

/// Mutually orthogonal anchors on the sphere of the configured radius keep
/// non-lookalike identities far apart regardless of the vehicle count.
inline std::vector<Embedding> orthogonal_anchors(Rng& rng, int count, int dim, double radius) {
    std::vector<Embedding> basis;
    int guard = 0;
    while (static_cast<int>(basis.size()) < count) {
        if (++guard > 100 * count + 100)
            throw std::runtime_error("anchor orthogonalization failed to converge");
        Embedding v = gauss_vector(rng, dim, 1.0);
        for (const auto& b : basis) {
            const double d = dot(v, b);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
        }
        const double n = norm(v);
        if (n < 1e-6) continue;
        for (auto& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    for (auto& b : basis)
        for (auto& x : b) x *= radius;
    return basis;
}

inline double edge_proximity(const BoundingBox& box, const CameraModel& cam) {
    const double ex = std::abs(box.cx - 0.5 * cam.image_width) / (0.5 * cam.image_width);
    const double ey = std::abs(box.cy - 0.5 * cam.image_height) / (0.5 * cam.image_height);
    return std::clamp(std::max(ex, ey), 0.0, 1.0);
}

/// Axis-aligned footprint box of a vehicle as seen by one camera, clipped to
/// the image; nullopt when effectively invisible.
inline std::optional<BoundingBox> project_vehicle_box(const ScenarioWorld::Vehicle& veh,
                                                      const GroundPoint& pos, double heading,
                                                      const CameraModel& cam, double max_range) {
    if (ground_distance(pos, cam.position) > max_range) return std::nullopt;
    const double ch = std::cos(heading), sh = std::sin(heading);
    double min_x = 1e18, max_x = -1e18, min_y = 1e18, max_y = -1e18;
    int kept = 0;
    for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
            const double lx = 0.5 * veh.length * sx, ly = 0.5 * veh.width * sy;
            const GroundPoint corner{pos.x + lx * ch - ly * sh, pos.y + lx * sh + ly * ch};
            const double dx = corner.x - cam.position.x, dy = corner.y - cam.position.y;
            const double range = std::hypot(dx, dy);
            if (range < 0.3) continue;
            const double wrap = wrap_angle(cam.yaw - std::atan2(dy, dx));
            if (std::abs(wrap) > 0.62 * kPi) continue;  // behind the camera
            const double col = cam.image_width * (0.5 + wrap / cam.hfov);
            for (double z : {0.0, veh.height}) {
                const double row = cam.row_of_elevation(std::atan2(z - cam.height, range));
                min_x = std::min(min_x, col);
                max_x = std::max(max_x, col);
                min_y = std::min(min_y, row);
                max_y = std::max(max_y, row);
                ++kept;
            }
        }
    }
    if (kept < 6) return std::nullopt;
    min_x = std::clamp(min_x, 0.0, cam.image_width);
    max_x = std::clamp(max_x, 0.0, cam.image_width);
    min_y = std::clamp(min_y, 0.0, cam.image_height);
    max_y = std::clamp(max_y, 0.0, cam.image_height);
    const double w = max_x - min_x, h = max_y - min_y;
    if (w < 6.0 || h < 6.0) return std::nullopt;
    BoundingBox box{min_x + 0.5 * w, min_y + 0.5 * h, w, h};
    if (box.cx < 0.0 || box.cx > cam.image_width || box.cy < 0.0 || box.cy > cam.image_height)
        return std::nullopt;
    return box;
}

inline BoundingBox union_box(const BoundingBox& a, const BoundingBox& b, double inflate) {
    const double l = std::min(a.left(), b.left()), r = std::max(a.right(), b.right());
    const double t = std::min(a.top(), b.top()), bo = std::max(a.bottom(), b.bottom());
    const double w = (r - l) * inflate, h = (bo - t) * inflate;
    return {0.5 * (l + r), 0.5 * (t + bo), w, h};
}

}  // namespace detail

/// Deterministic world construction: lane trajectories, appearance anchors,
/// per-camera calibration offsets and resolved occluders.
inline ScenarioWorld generate_world(const ScenarioConfig& cfg, const ProjectionConfig& proj) {
    cfg.validate();
    ScenarioWorld world;
    world.cfg = cfg;

    Rng anchor_rng(hash_combine(cfg.seed, "anchors"));
    auto anchors =
        detail::orthogonal_anchors(anchor_rng, cfg.n_vehicles, cfg.embedding.dim, cfg.embedding.norm);

    // Lookalike members share a lane family; the follower trails the leader.
    std::map<int, const LookalikePair*> as_leader, as_follower;
    for (const auto& lp : cfg.embedding.lookalike_pairs) {
        as_leader[lp.a] = &lp;
        as_follower[lp.b] = &lp;
    }

    Rng traffic_rng(hash_combine(cfg.seed, "traffic"));
    world.vehicles.reserve(static_cast<std::size_t>(cfg.n_vehicles));
    for (int i = 0; i < cfg.n_vehicles; ++i) {
        ScenarioWorld::Vehicle v;
        v.oncoming = (i % 2 == 0) && !as_leader.count(i) && !as_follower.count(i);
        const bool far_lane = (i / 2) % 2 == 1;
        v.lane_y = (v.oncoming ? 1.0 : -1.0) * (far_lane ? cfg.traffic.lane_far
                                                         : cfg.traffic.lane_near);
        v.speed = traffic_rng.uniform(cfg.traffic.speed_min, cfg.traffic.speed_max);
        v.spawn_frame = static_cast<FrameIndex>(i) * cfg.traffic.spawn_gap_frames;
        v.spawn_x = v.oncoming ? cfg.traffic.max_range + 3.0 : -14.0;
        v.anchor = anchors[static_cast<std::size_t>(i)];
        world.vehicles.push_back(std::move(v));
    }

    // Pair overrides: same direction, adjacent lanes, fixed gap, shared
    // speed. The lead takes the far lane so that when either member crosses
    // into the front camera its partner is still observed by the right one.
    // The follower's anchor is rotated to the exact configured chord
    // distance; rotation within the orthogonal basis keeps every other
    // pairwise anchor distance unchanged.
    for (const auto& lp : cfg.embedding.lookalike_pairs) {
        auto& lead = world.vehicles[static_cast<std::size_t>(lp.a)];
        auto& tail = world.vehicles[static_cast<std::size_t>(lp.b)];
        lead.oncoming = tail.oncoming = false;
        lead.lane_y = -cfg.traffic.lane_far;
        tail.lane_y = -cfg.traffic.lane_near;
        tail.speed = lead.speed;
        tail.spawn_frame = lead.spawn_frame;
        tail.spawn_x = lead.spawn_x - lp.gap_m;

        const double c = cfg.embedding.norm;
        const double chord = std::min(lp.delta, 2.0 * c - 1e-9);
        const double theta = 2.0 * std::asin(chord / (2.0 * c));
        Embedding u = tail.anchor;  // orthogonal to lead.anchor by construction
        const double un = detail::norm(u);
        Embedding rotated(lead.anchor.size());
        for (std::size_t k = 0; k < rotated.size(); ++k)
            rotated[k] = std::cos(theta) * lead.anchor[k] + std::sin(theta) * c * (u[k] / un);
        tail.anchor = std::move(rotated);
    }

    for (int i = 0; i < cfg.n_vehicles; ++i) {
        auto& v = world.vehicles[static_cast<std::size_t>(i)];
        for (CameraId cam : kAllCameras) {
            Rng view_rng(hash_combine(hash_combine(cfg.seed, "view"),
                                      static_cast<std::uint64_t>(i * 8 + static_cast<int>(cam))));
            v.view_offset[static_cast<int>(cam)] =
                detail::gauss_vector(view_rng, cfg.embedding.dim, cfg.embedding.camera_view_sigma);
        }
    }

    Rng calib_rng(hash_combine(cfg.seed, "calib"));
    for (CameraId cam : kAllCameras) {
        const double sigma = proj.camera(cam).calib_noise_sigma;
        world.calib_offset[static_cast<int>(cam)] = {calib_rng.gauss(0.0, sigma),
                                                     calib_rng.gauss(0.0, sigma)};
    }

    // Resolve each episode's occluder: the nearest other vehicle at onset.
    world.episode_occluder.reserve(cfg.noise.occlusions.size());
    for (const auto& ep : cfg.noise.occlusions) {
        const auto victim_pos = world.vehicles[static_cast<std::size_t>(ep.vehicle)].position(
            ep.start, cfg.fps);
        int best = -1;
        double best_d = 1e18;
        for (int j = 0; j < cfg.n_vehicles; ++j) {
            if (j == ep.vehicle) continue;
            const double d = ground_distance(
                world.vehicles[static_cast<std::size_t>(j)].position(ep.start, cfg.fps),
                victim_pos);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        world.episode_occluder.push_back(best);
    }
    return world;
}

/// Renders one frame: per camera, every visible vehicle becomes a Detection
/// with noisy box, keypoints, appearance embedding and the ground-truth id.
/// Occlusion episodes suppress the hidden vehicle and stretch the occluder's
/// box over it. Pure function of (world, frame).
inline std::array<std::vector<Detection>, 3> render_frame(const ScenarioWorld& world,
                                                          FrameIndex frame,
                                                          const ProjectionConfig& proj) {
    const auto& cfg = world.cfg;
    std::array<std::vector<Detection>, 3> out;

    // Active episode lookup: victim -> episode index, occluder -> victim.
    std::map<int, int> hidden;     // victim vehicle -> episode idx
    std::map<int, int> occluding;  // occluder vehicle -> victim vehicle
    for (std::size_t e = 0; e < cfg.noise.occlusions.size(); ++e) {
        const auto& ep = cfg.noise.occlusions[e];
        if (frame >= ep.start && frame < ep.start + ep.length) {
            hidden[ep.vehicle] = static_cast<int>(e);
            const int occ = world.episode_occluder[e];
            if (occ >= 0) occluding[occ] = ep.vehicle;
        }
    }

    for (CameraId cam_id : kAllCameras) {
        const auto& cam = proj.camera(cam_id);
        auto& dets = out[static_cast<int>(cam_id)];
        for (int i = 0; i < cfg.n_vehicles; ++i) {
            if (hidden.count(i)) continue;
            const auto& veh = world.vehicles[static_cast<std::size_t>(i)];
            const auto pos = veh.position(frame, cfg.fps);
            auto box = detail::project_vehicle_box(veh, pos, veh.heading(), cam,
                                                   cfg.traffic.max_range);
            if (!box) continue;

            auto occ_it = occluding.find(i);
            if (occ_it != occluding.end()) {
                const auto& victim = world.vehicles[static_cast<std::size_t>(occ_it->second)];
                const auto vbox = detail::project_vehicle_box(
                    victim, victim.position(frame, cfg.fps), victim.heading(), cam,
                    cfg.traffic.max_range);
                if (vbox) box = detail::union_box(*box, *vbox, 1.06);
            }

            Rng rng(hash_combine(
                hash_combine(cfg.seed, "render"),
                static_cast<std::uint64_t>((frame * 64 + i) * 8 + static_cast<int>(cam_id))));

            const double eprox = detail::edge_proximity(*box, cam);
            const double sigma_c = cfg.noise.drift_sigma * (1.0 + cfg.noise.edge_noise_gain * eprox);
            Detection det;
            det.camera = cam_id;
            det.frame = frame;
            const double ndx = rng.gauss(0.0, sigma_c), ndy = rng.gauss(0.0, sigma_c);
            const double size_sigma = 0.01 * cfg.noise.drift_sigma *
                                      (1.0 + cfg.noise.edge_noise_gain * eprox);
            const double sw = std::exp(rng.gauss(0.0, size_sigma));
            const double sh = std::exp(rng.gauss(0.0, size_sigma));
            det.box = {box->cx + ndx, box->cy + ndy, std::max(4.0, box->w * sw),
                       std::max(4.0, box->h * sh)};
            det.conf = clamp01(0.97 - 0.15 * eprox * std::min(1.0, sigma_c) -
                               cfg.noise.conf_noise * std::abs(rng.gauss()));
            det.gt_id = static_cast<GlobalId>(i + 1);

            // Axle grounding keypoints through the (mis)calibrated camera.
            const double ch = std::cos(veh.heading()), sh2 = std::sin(veh.heading());
            const auto& off = world.calib_offset[static_cast<int>(cam_id)];
            WheelKeypoints kps;
            for (int axle = 0; axle < 2; ++axle) {
                const double sign = axle == 0 ? 1.0 : -1.0;
                const GroundPoint wp{pos.x + sign * 0.5 * veh.wheelbase * ch + off.x,
                                     pos.y + sign * 0.5 * veh.wheelbase * sh2 + off.y};
                auto px = project_from_world(wp, 0.0, cam);
                if (px) {
                    PixelPoint jittered{px->x + rng.gauss(0.0, cfg.noise.kp_jitter_px),
                                        px->y + rng.gauss(0.0, cfg.noise.kp_jitter_px)};
                    jittered.x = std::clamp(jittered.x, 0.0, cam.image_width);
                    jittered.y = std::clamp(jittered.y, 0.0, cam.image_height);
                    if (axle == 0)
                        kps.front = jittered;
                    else
                        kps.rear = jittered;
                }
            }
            if (kps.front || kps.rear) det.keypoints = kps;

            Embedding emb = veh.anchor;
            const auto& view = veh.view_offset[static_cast<int>(cam_id)];
            for (std::size_t k = 0; k < emb.size(); ++k) emb[k] += view[k];
            if (cfg.embedding.identity_sigma > 0.0) {
                const auto obs =
                    detail::gauss_vector(rng, cfg.embedding.dim, cfg.embedding.identity_sigma);
                for (std::size_t k = 0; k < emb.size(); ++k) emb[k] += obs[k];
            }
            const double n = detail::norm(emb);
            if (n > 1e-12)
                for (auto& x : emb) x *= cfg.embedding.norm / n;
            det.embedding = std::move(emb);

            dets.push_back(std::move(det));
        }
    }
    return out;
}

/// Onset frame for a scripted occlusion: the victim and occluder co-visible
/// in exactly one camera (victim nowhere else) through the whole episode,
/// favoring a small and slowly-changing image gap. Returns nullopt when no
/// such window exists.
inline std::optional<FrameIndex> find_occlusion_onset(const ScenarioWorld& world,
                                                      const ProjectionConfig& proj, int victim,
                                                      int occluder, int length) {
    const auto& cfg = world.cfg;

    auto window_gap = [&](FrameIndex t) -> std::optional<double> {
        int shared_cam = -1;
        bool victim_elsewhere = false;
        double gap = 1e18;
        for (CameraId cam_id : kAllCameras) {
            const auto& cam = proj.camera(cam_id);
            const auto& v = world.vehicles[static_cast<std::size_t>(victim)];
            const auto& o = world.vehicles[static_cast<std::size_t>(occluder)];
            const auto vb = detail::project_vehicle_box(v, v.position(t, cfg.fps), v.heading(),
                                                        cam, cfg.traffic.max_range);
            const auto ob = detail::project_vehicle_box(o, o.position(t, cfg.fps), o.heading(),
                                                        cam, cfg.traffic.max_range);
            if (vb && ob) {
                shared_cam = static_cast<int>(cam_id);
                gap = std::hypot(vb->cx - ob->cx, vb->cy - ob->cy);
            } else if (vb) {
                victim_elsewhere = true;
            }
        }
        if (shared_cam < 0 || victim_elsewhere) return std::nullopt;
        return gap;
    };

    std::optional<FrameIndex> best;
    double best_cost = 1e18;
    for (FrameIndex t = 1; t + length + 2 < cfg.duration_frames; ++t) {
        bool ok = true;
        for (FrameIndex u = t - 1; u <= t + length + 1 && ok; ++u)
            if (!window_gap(u)) ok = false;
        if (!ok) continue;
        const double g0 = *window_gap(t);
        const double g1 = *window_gap(t + 1);
        const double cost = g0 + 10.0 * std::abs(g1 - g0);
        if (cost < best_cost) {
            best_cost = cost;
            best = t;
        }
    }
    return best;
}

/// Stand-in for the Siamese tracker: proposes the followed vehicle's detected
/// box plus an accumulating drift walk whose step grows with template age and
/// edge proximity. While the target is hidden it slides onto whatever covers
/// it and may permanently lock onto that vehicle if the target reappears too
/// far away. Template re-initialization zeroes the accumulated drift but
/// carries a small corruption risk.
class SimTrackerBackend : public TrackerBackend {
public:
    SimTrackerBackend(const ScenarioConfig& cfg, const ProjectionConfig& proj)
        : cfg_(cfg), proj_(proj) {}

    void open_track(CameraId cam, GlobalId id, const Detection& seed) override {
        Slot slot;
        slot.followed_gt = seed.gt_id;
        slot.last_box = seed.box;
        slot.init_frame = seed.frame;
        slot.rng = std::make_unique<Rng>(
            hash_combine(hash_combine(cfg_.seed, "tracker"),
                         static_cast<std::uint64_t>(id * 8 + static_cast<int>(cam))));
        slots_[key(cam, id)] = std::move(slot);
    }

    void reinitialize(CameraId cam, GlobalId id, const BoundingBox& box, FrameIndex frame) override {
        auto& slot = slots_.at(key(cam, id));
        const double instability = std::abs(slot.last_stretch - 1.0);
        const double p_bad =
            cfg_.tracker.bad_update_base + cfg_.tracker.bad_update_size_gain * instability;
        if (slot.rng->uniform() < p_bad) {
            slot.dead = true;  // template grabbed background; the track is gone
            return;
        }
        slot.offset_x = slot.offset_y = 0.0;
        slot.init_frame = frame;
        slot.last_box = box;
    }

    std::optional<TrackProposal> propose(CameraId cam, GlobalId id,
                                         const FrameInput& input) override {
        auto& slot = slots_.at(key(cam, id));
        if (slot.dead || !slot.followed_gt) return std::nullopt;
        const auto& cam_model = proj_.camera(cam);
        const auto& tk = cfg_.tracker;
        Rng& rng = *slot.rng;

        const Detection* own = find_det(input, *slot.followed_gt);

        if (own && slot.hidden_frames > 0) {
            // Target back in view. Within the template memory span the
            // tracker re-locks; past it, it stays with whatever hid the
            // target, or gives up entirely if nothing did.
            if (slot.hidden_frames <= tk.reacquire_max_frames) {
                slot.cover_gt.reset();
                slot.offset_x = slot.offset_y = 0.0;
            } else if (slot.cover_gt) {
                slot.followed_gt = slot.cover_gt;
                slot.cover_gt.reset();
                slot.stale = true;
                slot.offset_x = slot.offset_y = 0.0;
                own = find_det(input, *slot.followed_gt);
            } else {
                slot.dead = true;
                return std::nullopt;
            }
            slot.hidden_frames = 0;
        }

        if (!own) {
            slot.hidden_frames += 1;
            if (!slot.cover_gt) {
                double best_oc = tk.cover_min;
                for (const auto& det : *input.detections) {
                    if (!det.gt_id) continue;
                    const double oc = occlusion_coefficient(slot.last_box, det.box);
                    if (oc > best_oc) {
                        best_oc = oc;
                        slot.cover_gt = det.gt_id;
                    }
                }
            }
            if (slot.cover_gt) {
                const Detection* cover = find_det(input, *slot.cover_gt);
                if (cover) {
                    BoundingBox box = slot.last_box;
                    box.cx += tk.glide * (cover->box.cx - box.cx);
                    box.cy += tk.glide * (cover->box.cy - box.cy);
                    slot.last_box = box;
                    return TrackProposal{box, 0.5};
                }
                slot.cover_gt.reset();
            }
            return std::nullopt;
        }

        const double eprox = detail::edge_proximity(own->box, cam_model);
        const int age = static_cast<int>(std::max<FrameIndex>(0, input.frame - slot.init_frame));

        if (slot.episode_left == 0 &&
            rng.uniform() < tk.episode_rate * (1.0 + tk.episode_edge_gain * eprox))
            slot.episode_left =
                static_cast<int>(rng.uniform_int(tk.episode_min_len, tk.episode_max_len));

        double sigma = tk.walk_rate * age * (1.0 + tk.walk_edge_gain * eprox);
        if (slot.episode_left > 0) {
            sigma += tk.episode_step_frac * own->box.w;
            --slot.episode_left;
        }
        const double step_x = rng.gauss(0.0, sigma), step_y = rng.gauss(0.0, sigma);
        slot.offset_x += step_x;
        slot.offset_y += step_y;

        const double stretch =
            std::clamp(1.0 + rng.gauss(0.0, tk.breath_sigma * eprox), 0.55, 1.8);
        const double jx = rng.gauss(0.0, tk.prop_jitter_px), jy = rng.gauss(0.0, tk.prop_jitter_px);

        BoundingBox box{own->box.cx + slot.offset_x + jx, own->box.cy + slot.offset_y + jy,
                        own->box.w * stretch, own->box.h * stretch};
        const double step_mag = std::hypot(step_x, step_y);
        double conf = tk.conf_base - tk.conf_step_gain * step_mag / std::max(own->box.w, 30.0) -
                      tk.conf_size_gain * std::abs(stretch - slot.last_stretch) - 0.05 * eprox;
        if (slot.stale) conf *= tk.stale_conf_scale;
        conf = clamp01(conf + tk.conf_noise * rng.gauss());

        slot.last_stretch = stretch;
        slot.last_box = box;
        return TrackProposal{box, conf};
    }

    void close_track(CameraId cam, GlobalId id) override { slots_.erase(key(cam, id)); }

    /// Introspection for tests.
    std::optional<double> drift_magnitude(CameraId cam, GlobalId id) const {
        auto it = slots_.find(key(cam, id));
        if (it == slots_.end()) return std::nullopt;
        return std::hypot(it->second.offset_x, it->second.offset_y);
    }

private:
    struct Slot {
        std::optional<GlobalId> followed_gt;
        std::optional<GlobalId> cover_gt;
        BoundingBox last_box;
        double offset_x = 0.0, offset_y = 0.0;
        double last_stretch = 1.0;
        FrameIndex init_frame = 0;
        int episode_left = 0;
        int hidden_frames = 0;
        bool stale = false;
        bool dead = false;
        std::unique_ptr<Rng> rng;
    };

    static std::pair<int, GlobalId> key(CameraId cam, GlobalId id) {
        return {static_cast<int>(cam), id};
    }

    static const Detection* find_det(const FrameInput& input, GlobalId gt) {
        for (const auto& det : *input.detections)
            if (det.gt_id && *det.gt_id == gt) return &det;
        return nullptr;
    }

    ScenarioConfig cfg_;
    ProjectionConfig proj_;
    std::map<std::pair<int, GlobalId>, Slot> slots_;
};

/// Factory matching the module surface: the oracle tracker for a scenario.
inline std::unique_ptr<TrackerBackend> oracle_tracker(const ScenarioConfig& cfg,
                                                      const ProjectionConfig& proj) {
    return std::make_unique<SimTrackerBackend>(cfg, proj);
}

}  // namespace sreid
