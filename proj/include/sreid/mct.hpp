// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "sreid/core.hpp"
#include "sreid/projection.hpp"

namespace sreid {

struct FusionWeights {
    double alpha = 1.0;
    double beta = 1.0;
};

struct MctConfig {
    int gallery_size = 5;       // K embeddings kept per (id, camera)
    double tau_s = 0.35;        // fused-score floor for inheriting an id
    double edge_fraction = 0.25;
    FusionWeights weights;
    double epsilon = 1e-6;      // distance clamp in the score transform
    bool spatial_gate = true;
    int kp_max_age = 2;         // gallery keypoints older than this many frames are ignored
    double spawn_iou = 0.3;     // detection/track overlap below which a detection is a new target

    void validate() const {
        if (gallery_size < 1) throw std::invalid_argument("mct.gallery_size must be >= 1");
        if (!(edge_fraction > 0.0 && edge_fraction < 0.5))
            throw std::invalid_argument("mct.edge_fraction must be in (0, 0.5)");
        if (weights.alpha < 0.0 || weights.beta < 0.0)
            throw std::invalid_argument("mct fusion weights must be >= 0");
        if (!(weights.alpha + weights.beta > 0.0))
            throw std::invalid_argument("mct fusion weights must not both be zero");
        if (!(epsilon > 0.0)) throw std::invalid_argument("mct.epsilon must be > 0");
        if (kp_max_age < 0) throw std::invalid_argument("mct.kp_max_age must be >= 0");
        if (!(spawn_iou > 0.0 && spawn_iou <= 1.0))
            throw std::invalid_argument("mct.spawn_iou must be in (0,1]");
    }
};

/// Minimum Euclidean distance from the query to any stored embedding.
/// Absent when the entry list is empty.
inline std::optional<double> feature_distance(const Embedding& query,
                                              const std::deque<Embedding>& entries) {
    if (entries.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) best = std::min(best, euclidean_distance(query, e));
    return best;
}

inline double distance_score(double d, double eps) {
    if (d < 0.0) throw std::domain_error("distance score: negative distance");
    return std::log(1.0 / std::max(d, eps) + 1.0);
}

/// Feature confidence s1 from the feature distance D_F.
inline double score_s1(double d_f, double eps = 1e-6) { return distance_score(d_f, eps); }

/// Spatial confidence s2 from the keypoint projection distance D_K.
inline double score_s2(double d_k, double eps = 1e-6) { return distance_score(d_k, eps); }

/// Weighted mean of the two confidence scores.
inline double fuse(double s1, double s2, const FusionWeights& w) {
    if (w.alpha < 0.0 || w.beta < 0.0) throw std::invalid_argument("fuse: negative weight");
    if (!(w.alpha + w.beta > 0.0)) throw std::invalid_argument("fuse: alpha + beta must be > 0");
    return (w.alpha * s1 + w.beta * s2) / (w.alpha + w.beta);
}

enum class ImageRegion { LeftEdge, Interior, RightEdge };

inline const char* to_string(ImageRegion r) {
    switch (r) {
        case ImageRegion::LeftEdge: return "left_edge";
        case ImageRegion::Interior: return "interior";
        case ImageRegion::RightEdge: return "right_edge";
    }
    return "?";
}

/// Horizontal image region of a box center; the edge bands are strict.
inline ImageRegion region_of(double center_x, double image_width, double edge_fraction) {
    if (!(edge_fraction > 0.0 && edge_fraction < 0.5))
        throw std::invalid_argument("region_of: edge_fraction must be in (0, 0.5)");
    if (center_x < edge_fraction * image_width) return ImageRegion::LeftEdge;
    if (center_x > (1.0 - edge_fraction) * image_width) return ImageRegion::RightEdge;
    return ImageRegion::Interior;
}

/// Which cameras' gallery entries a new target may inherit from. The outward
/// edges of the side cameras look back into themselves; everything else
/// points at the adjacent camera. A target surfacing mid-front has no
/// cross-camera source and gets a fresh id.
inline std::vector<CameraId> candidate_cameras(CameraId cam, ImageRegion region) {
    switch (cam) {
        case CameraId::Left:
            return region == ImageRegion::LeftEdge ? std::vector<CameraId>{CameraId::Left}
                                                   : std::vector<CameraId>{CameraId::Front};
        case CameraId::Right:
            return region == ImageRegion::RightEdge ? std::vector<CameraId>{CameraId::Right}
                                                    : std::vector<CameraId>{CameraId::Front};
        case CameraId::Front:
            if (region == ImageRegion::LeftEdge) return {CameraId::Left};
            if (region == ImageRegion::RightEdge) return {CameraId::Right};
            return {};
    }
    return {};
}

/// Per-identity store of recent appearance embeddings and the last projected
/// wheel keypoints, kept separately per camera. Entries exist only for live
/// ids; reviving a removed id is a lifecycle error.
class Gallery {
public:
    struct CameraEntry {
        std::deque<Embedding> embeddings;  // ring of the K most recent
        std::optional<ProjectedKeypoints> keypoints;
        FrameIndex kp_frame = -1;
    };

    void insert(GlobalId id, CameraId cam, const Embedding& emb,
                const std::optional<ProjectedKeypoints>& kpts, FrameIndex frame, int ring_size) {
        if (dead_.count(id)) throw std::logic_error("gallery: id was removed and cannot revive");
        auto& entry = entries_[id][static_cast<int>(cam)];
        entry.embeddings.push_back(emb);
        while (entry.embeddings.size() > static_cast<std::size_t>(ring_size))
            entry.embeddings.pop_front();
        if (kpts) {
            entry.keypoints = kpts;
            entry.kp_frame = frame;
        }
    }

    void remove(GlobalId id) {
        entries_.erase(id);
        dead_.insert(id);
    }

    bool has(GlobalId id) const { return entries_.count(id) != 0; }

    const CameraEntry* entry(GlobalId id, CameraId cam) const {
        auto it = entries_.find(id);
        if (it == entries_.end()) return nullptr;
        const auto& e = it->second[static_cast<int>(cam)];
        return e.embeddings.empty() ? nullptr : &e;
    }

    /// Live ids holding at least one embedding for `cam`, ascending.
    std::vector<GlobalId> ids_with_camera(CameraId cam) const {
        std::vector<GlobalId> out;
        for (const auto& [id, percam] : entries_)
            if (!percam[static_cast<int>(cam)].embeddings.empty()) out.push_back(id);
        return out;
    }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<GlobalId, std::array<CameraEntry, 3>> entries_;
    std::set<GlobalId> dead_;
};

/// A new target to be associated: its appearance feature plus its wheel
/// keypoints projected through its own camera.
struct AssociationQuery {
    CameraId camera = CameraId::Front;
    FrameIndex frame = 0;
    std::optional<Embedding> embedding;
    std::optional<ProjectedKeypoints> keypoints;
};

struct CandidateScore {
    GlobalId id = 0;
    CameraId camera = CameraId::Front;
    double d_f = 0.0;
    double s1 = 0.0;
    std::optional<double> d_k;
    std::optional<double> s2;
    double fused = 0.0;
    bool gate_passed = true;  // false: discarded by the spatial gate
    bool spatial_used = false;
};

struct AssociationDecision {
    std::optional<GlobalId> inherited;  // nullopt means a fresh id is created
    double score = 0.0;
    std::vector<CandidateScore> candidates;  // audit trail, gallery order
};

namespace detail {

/// Spatial gate: every keypoint category present on both sides must land in
/// overlapping uncertainty disks. Returns false when the candidate is ruled
/// out; `shared_both` reports whether both categories were comparable.
inline bool spatial_gate_passes(const ProjectedKeypoints& query_kp, CameraId query_cam,
                                const ProjectedKeypoints& cand_kp, CameraId cand_cam,
                                const ProjectionConfig& proj, bool& shared_both) {
    const auto& qcam = proj.camera(query_cam);
    const auto& ccam = proj.camera(cand_cam);
    int shared = 0;
    auto category_ok = [&](const std::optional<GroundPoint>& q,
                           const std::optional<GroundPoint>& c) {
        if (!q || !c) return true;  // category not comparable; no constraint from it
        ++shared;
        UncertaintyDisk qd{*q, uncertainty_radius(*q, qcam, proj.r0, proj.k_per_meter)};
        UncertaintyDisk cd{*c, uncertainty_radius(*c, ccam, proj.r0, proj.k_per_meter)};
        return disks_overlap(qd, cd);
    };
    const bool front_ok = category_ok(query_kp.front, cand_kp.front);
    const bool rear_ok = category_ok(query_kp.rear, cand_kp.rear);
    shared_both = shared == 2;
    if (shared == 0) {
        shared_both = false;
        return true;  // nothing comparable; gate abstains
    }
    return front_ok && rear_ok;
}

}  // namespace detail

/// Scores the query against every live gallery id visible from the candidate
/// cameras and decides between inheriting the best id and creating a new one.
/// Candidates failing the spatial gate are discarded; candidates without
/// comparable keypoints fall back to feature-only scoring.
inline AssociationDecision associate(const AssociationQuery& query, const Gallery& gallery,
                                     const std::vector<CameraId>& cams, const MctConfig& cfg,
                                     const ProjectionConfig& proj) {
    AssociationDecision decision;
    if (!query.embedding) return decision;  // nothing to match on

    for (CameraId cam : cams) {
        for (GlobalId id : gallery.ids_with_camera(cam)) {
            const auto* entry = gallery.entry(id, cam);
            const auto d_f = feature_distance(*query.embedding, entry->embeddings);
            if (!d_f) continue;

            CandidateScore cs;
            cs.id = id;
            cs.camera = cam;
            cs.d_f = *d_f;
            cs.s1 = score_s1(*d_f, cfg.epsilon);

            // Gallery keypoints count only while fresh. With the gate active,
            // a stale position is disqualifying: were this the same vehicle,
            // it would still be observed near the query right now.
            const bool has_kp = entry->keypoints.has_value();
            const bool fresh = has_kp && query.frame - entry->kp_frame <= cfg.kp_max_age;
            std::optional<ProjectedKeypoints> cand_kp;
            if (fresh) cand_kp = entry->keypoints;

            bool shared_both = false;
            bool gate_ok = true;
            if (cfg.spatial_gate && query.keypoints) {
                if (cand_kp)
                    gate_ok = detail::spatial_gate_passes(*query.keypoints, query.camera,
                                                          *cand_kp, cam, proj, shared_both);
                else if (has_kp)
                    gate_ok = false;  // observed there once, gone now
            } else if (query.keypoints && cand_kp) {
                shared_both = keypoint_distance(*query.keypoints, *cand_kp).has_value();
            }

            cs.gate_passed = gate_ok;
            if (gate_ok && shared_both && cfg.weights.beta > 0.0) {
                cs.d_k = keypoint_distance(*query.keypoints, *cand_kp);
                if (cs.d_k) {
                    cs.s2 = score_s2(*cs.d_k, cfg.epsilon);
                    cs.spatial_used = true;
                    cs.fused = fuse(cs.s1, *cs.s2, cfg.weights);
                }
            }
            if (!cs.spatial_used)
                cs.fused = fuse(cs.s1, 0.0, FusionWeights{cfg.weights.alpha, 0.0});
            decision.candidates.push_back(cs);
        }
    }

    const CandidateScore* best = nullptr;
    for (const auto& cs : decision.candidates) {
        if (!cs.gate_passed) continue;
        if (!best || cs.fused > best->fused || (cs.fused == best->fused && cs.id < best->id))
            best = &cs;
    }
    if (best && best->fused >= cfg.tau_s) {
        decision.inherited = best->id;
        decision.score = best->fused;
    }
    return decision;
}

}  // namespace sreid
