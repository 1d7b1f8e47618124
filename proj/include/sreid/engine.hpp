// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "sreid/assignment.hpp"
#include "sreid/core.hpp"
#include "sreid/mct.hpp"
#include "sreid/projection.hpp"
#include "sreid/sct.hpp"

namespace sreid {

/// Appearance feature source for new targets and gallery maintenance. The
/// production system would run a Re-ID network; datasets rendered by the
/// simulator carry the feature on each detection.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::optional<Embedding> embed(const Detection& det, CameraId cam,
                                           FrameIndex frame) = 0;
};

class DetectionEmbeddingProvider : public EmbeddingProvider {
public:
    std::optional<Embedding> embed(const Detection& det, CameraId, FrameIndex) override {
        return det.embedding;
    }
};

struct AssociationEvent {
    CameraId camera = CameraId::Front;
    FrameIndex frame = 0;
    ImageRegion region = ImageRegion::Interior;
    GlobalId assigned = 0;
    bool inherited = false;
    double score = 0.0;
    std::optional<GlobalId> query_gt;      // gt of the new target's detection
    std::optional<GlobalId> inherited_gt;  // gt bound to the inherited id at its creation
    std::vector<CandidateScore> candidates;
};

/// One processed frame tick across all three cameras.
struct TickResult {
    FrameIndex frame = 0;
    std::array<FrameResult, 3> cameras;
    std::vector<AssociationEvent> associations;
};

/// Serial surround-view orchestrator: per-camera single-object pipelines,
/// shared id space, gallery maintenance and the ordered association passes.
class TrackingEngine {
public:
    TrackingEngine(QualityConfig quality, MctConfig mct, ProjectionConfig proj,
                   TrackerBackend& backend, EmbeddingProvider& embedder)
        : mct_(mct), proj_(proj), embedder_(&embedder) {
        quality.validate();
        mct_.validate();
        proj_.validate();
        for (CameraId cam : kAllCameras)
            pipelines_[static_cast<int>(cam)] =
                std::make_unique<SingleCameraPipeline>(cam, quality, backend);
    }

    TickResult process_tick(FrameIndex frame, const std::array<std::vector<Detection>, 3>& dets) {
        TickResult tick;
        tick.frame = frame;

        // 1) Single-camera tracking, serially per camera.
        for (CameraId cam : kAllCameras) {
            FrameInput input{cam, frame, &dets[static_cast<int>(cam)]};
            auto& pipeline = *pipelines_[static_cast<int>(cam)];
            tick.cameras[static_cast<int>(cam)] = pipeline.process_frame(input);
        }
        retire_dead_ids(tick);

        // 2) Detection/track overlap decides gallery refreshes and new targets.
        std::vector<NewTarget> new_targets;
        for (CameraId cam : kAllCameras) {
            const auto& cam_dets = dets[static_cast<int>(cam)];
            const auto& result = tick.cameras[static_cast<int>(cam)];
            std::vector<char> matched(cam_dets.size(), 0);
            if (!cam_dets.empty() && !result.outputs.empty()) {
                std::vector<std::vector<double>> score(
                    cam_dets.size(), std::vector<double>(result.outputs.size(), 0.0));
                for (std::size_t d = 0; d < cam_dets.size(); ++d)
                    for (std::size_t o = 0; o < result.outputs.size(); ++o)
                        score[d][o] = box_iou(cam_dets[d].box, result.outputs[o].box);
                for (const auto& [d, o] : max_score_matching(score, mct_.spawn_iou)) {
                    matched[d] = 1;
                    const GlobalId id = result.outputs[o].id;
                    const bool occluded_now =
                        std::find(result.occluded_ids.begin(), result.occluded_ids.end(), id) !=
                        result.occluded_ids.end();
                    if (!occluded_now) refresh_gallery(id, cam, cam_dets[d], frame);
                }
            }
            for (std::size_t d = 0; d < cam_dets.size(); ++d)
                if (!matched[d]) new_targets.push_back({cam, d});
        }

        // 3) Ordered association: left<->front first, then front<->right.
        run_association_pass(new_targets, dets, frame, tick);
        return tick;
    }

    const Gallery& gallery() const { return gallery_; }
    GlobalId peek_next_id() const { return next_id_; }

    const std::map<GlobalId, GlobalId>& id_gt_bindings() const { return id_gt_binding_; }

private:
    struct NewTarget {
        CameraId camera;
        std::size_t det_index;
    };

    void retire_dead_ids(const TickResult& tick) {
        for (const auto& fr : tick.cameras)
            for (const auto& ev : fr.events)
                if (ev.type == TrackEventType::Deleted) {
                    bool live = false;
                    for (const auto& p : pipelines_)
                        if (p->has_track(ev.id)) live = true;
                    if (!live && gallery_.has(ev.id)) gallery_.remove(ev.id);
                }
    }

    void refresh_gallery(GlobalId id, CameraId cam, const Detection& det, FrameIndex frame) {
        auto emb = embedder_->embed(det, cam, frame);
        if (!emb) return;
        gallery_.insert(id, cam, *emb, project_keypoints(det, cam), frame, mct_.gallery_size);
    }

    std::optional<ProjectedKeypoints> project_keypoints(const Detection& det, CameraId cam) const {
        if (!det.keypoints) return std::nullopt;
        ProjectedKeypoints out;
        const auto& model = proj_.camera(cam);
        if (det.keypoints->front) out.front = try_project_to_ground(*det.keypoints->front, model);
        if (det.keypoints->rear) out.rear = try_project_to_ground(*det.keypoints->rear, model);
        if (!out.front && !out.rear) return std::nullopt;
        return out;
    }

    void run_association_pass(const std::vector<NewTarget>& targets,
                              const std::array<std::vector<Detection>, 3>& dets, FrameIndex frame,
                              TickResult& tick) {
        // left<->front associations first, then front<->right; targets with no
        // cross-camera source sit between the passes.
        auto pass_rank = [&](const NewTarget& t, ImageRegion region) {
            if (t.camera == CameraId::Left) return 0;
            if (t.camera == CameraId::Front) {
                if (region == ImageRegion::LeftEdge) return 1;
                if (region == ImageRegion::Interior) return 2;
                return 3;
            }
            return 4;
        };

        struct Ranked {
            NewTarget target;
            ImageRegion region;
            int rank;
        };
        std::vector<Ranked> ranked;
        for (const auto& t : targets) {
            const auto& det = dets[static_cast<int>(t.camera)][t.det_index];
            const auto region = region_of(det.box.cx, proj_.camera(t.camera).image_width,
                                          mct_.edge_fraction);
            ranked.push_back({t, region, 0});
            ranked.back().rank = pass_rank(t, region);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const Ranked& a, const Ranked& b) { return a.rank < b.rank; });

        for (const auto& r : ranked) {
            const auto& det = dets[static_cast<int>(r.target.camera)][r.target.det_index];
            AssociationQuery query;
            query.camera = r.target.camera;
            query.frame = frame;
            query.embedding = embedder_->embed(det, r.target.camera, frame);
            query.keypoints = project_keypoints(det, r.target.camera);

            const auto cams = candidate_cameras(r.target.camera, r.region);
            const auto decision = associate(query, gallery_, cams, mct_, proj_);

            AssociationEvent ev;
            ev.camera = r.target.camera;
            ev.frame = frame;
            ev.region = r.region;
            ev.query_gt = det.gt_id;
            ev.candidates = decision.candidates;
            GlobalId assigned;
            if (decision.inherited) {
                assigned = *decision.inherited;
                ev.inherited = true;
                ev.score = decision.score;
                auto bind = id_gt_binding_.find(assigned);
                if (bind != id_gt_binding_.end()) ev.inherited_gt = bind->second;
            } else {
                assigned = next_id_++;
                if (det.gt_id) id_gt_binding_[assigned] = *det.gt_id;
            }
            ev.assigned = assigned;

            auto& pipeline = *pipelines_[static_cast<int>(r.target.camera)];
            auto& fr = tick.cameras[static_cast<int>(r.target.camera)];
            if (pipeline.has_track(assigned)) {
                // The id's tracker is still alive here; re-anchor it on the
                // fresh detection instead of duplicating the id. The rebirth
                // is logged as a creation since the tracker state restarts.
                pipeline.reseed_track(det, assigned);
                bool replaced = false;
                for (auto& out : fr.outputs)
                    if (out.id == assigned) {
                        out = {assigned, det.box, det.conf};
                        replaced = true;
                        break;
                    }
                if (!replaced) fr.outputs.push_back({assigned, det.box, det.conf});
                fr.events.push_back({TrackEventType::Created, assigned});
            } else {
                pipeline.create_track(det, assigned);
                fr.events.push_back({TrackEventType::Created, assigned});
                fr.outputs.push_back({assigned, det.box, det.conf});
            }
            if (query.embedding)
                gallery_.insert(assigned, r.target.camera, *query.embedding, query.keypoints,
                                frame, mct_.gallery_size);
            tick.associations.push_back(std::move(ev));
        }
    }

    MctConfig mct_;
    ProjectionConfig proj_;
    EmbeddingProvider* embedder_;
    std::array<std::unique_ptr<SingleCameraPipeline>, 3> pipelines_;
    Gallery gallery_;
    GlobalId next_id_ = 1;
    std::map<GlobalId, GlobalId> id_gt_binding_;
};

}  // namespace sreid
