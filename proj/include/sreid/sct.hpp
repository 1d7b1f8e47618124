// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "sreid/core.hpp"
#include "sreid/quality.hpp"

namespace sreid {

/// One camera frame handed to the tracker backend.
struct FrameInput {
    CameraId camera = CameraId::Front;
    FrameIndex frame = 0;
    const std::vector<Detection>* detections = nullptr;
};

struct TrackProposal {
    BoundingBox box;
    double confidence = 0.0;  // C_T in [0,1]
};

/// Single-object tracker contract. The production system would put a Siamese
/// network behind this; the simulator supplies a deterministic stand-in.
/// Implementations must be deterministic for a fixed seed.
class TrackerBackend {
public:
    virtual ~TrackerBackend() = default;

    /// Registers a per-track slot seeded from the initial detection.
    virtual void open_track(CameraId cam, GlobalId id, const Detection& seed) = 0;

    /// Re-seeds the track's template from a fresh box (template update).
    virtual void reinitialize(CameraId cam, GlobalId id, const BoundingBox& box,
                              FrameIndex frame) = 0;

    /// Proposes the track's box in the current frame; nullopt means the
    /// target is lost this frame.
    virtual std::optional<TrackProposal> propose(CameraId cam, GlobalId id,
                                                 const FrameInput& input) = 0;

    virtual void close_track(CameraId cam, GlobalId id) = 0;
};

struct TrackTemplate {
    BoundingBox box;
    FrameIndex source_frame = 0;
    int age = 0;  // frames since the template was (re)initialized
};

struct TrackerState {
    GlobalId id = 0;
    TrackTemplate tmpl;
    BoundingBox last_box;
    QualityHistory history;
    OcclusionState occl;
    double last_c_r = 0.0;
};

enum class TrackEventType { Created, TemplateUpdated, Occluded, Deleted };

inline const char* to_string(TrackEventType t) {
    switch (t) {
        case TrackEventType::Created: return "created";
        case TrackEventType::TemplateUpdated: return "template_updated";
        case TrackEventType::Occluded: return "occluded";
        case TrackEventType::Deleted: return "deleted";
    }
    return "?";
}

struct TrackEvent {
    TrackEventType type = TrackEventType::Created;
    GlobalId id = 0;
};

struct TrackOutput {
    GlobalId id = 0;
    BoundingBox box;
    double c_r = 0.0;
};

struct FrameResult {
    CameraId camera = CameraId::Front;
    FrameIndex frame = 0;
    std::vector<TrackOutput> outputs;
    std::vector<TrackEvent> events;
    std::vector<GlobalId> occluded_ids;  // every id counted occluded this frame
};

/// Per-camera pipeline: one tracker per object, quality gating, template
/// updates and the occlusion lifecycle. Owned and driven by one thread.
class SingleCameraPipeline {
public:
    SingleCameraPipeline(CameraId cam, QualityConfig cfg, TrackerBackend& backend)
        : camera_(cam), cfg_(cfg), backend_(&backend) {
        cfg_.validate();
    }

    CameraId camera() const { return camera_; }
    const std::vector<TrackerState>& tracks() const { return tracks_; }

    bool has_track(GlobalId id) const {
        for (const auto& t : tracks_)
            if (t.id == id) return true;
        return false;
    }

    /// Re-anchors an existing track on a fresh detection of the same id
    /// (own-camera re-association of a lost target).
    bool reseed_track(const Detection& det, GlobalId id) {
        for (auto& t : tracks_) {
            if (t.id != id) continue;
            backend_->open_track(camera_, id, det);
            t.tmpl = TrackTemplate{det.box, det.frame, 0};
            t.last_box = det.box;
            t.history.clear();
            t.occl = OcclusionState{};
            t.last_c_r = det.conf;
            return true;
        }
        return false;
    }

    /// Starts a tracker on a detection. Id allocation happens upstream, in
    /// the cross-camera association step.
    TrackerState& create_track(const Detection& det, GlobalId id) {
        if (!det.box.valid()) throw std::invalid_argument("create_track: invalid detection box");
        backend_->open_track(camera_, id, det);
        TrackerState state;
        state.id = id;
        state.tmpl = TrackTemplate{det.box, det.frame, 0};
        state.last_box = det.box;
        state.history = QualityHistory(cfg_.m_window);
        state.occl = OcclusionState{};
        state.last_c_r = det.conf;
        tracks_.push_back(std::move(state));
        return tracks_.back();
    }

    FrameResult process_frame(const FrameInput& input) {
        FrameResult result;
        result.camera = camera_;
        result.frame = input.frame;

        struct Row {
            std::size_t track_index;
            BoundingBox box;
            double c_r = 0.0;
            bool lost = false;
            bool updated = false;
            int output_index = -1;
        };
        std::vector<Row> rows;
        rows.reserve(tracks_.size());

        for (std::size_t i = 0; i < tracks_.size(); ++i) {
            auto& track = tracks_[i];
            Row row{i, {}, 0.0, true, false, -1};
            auto proposal = backend_->propose(camera_, track.id, input);
            if (proposal) {
                double c_r = score_proposal(track, *proposal);
                if (cfg_.update_metric != UpdateMetric::None &&
                    should_update_template(track.history, cfg_)) {
                    backend_->reinitialize(camera_, track.id, proposal->box, input.frame);
                    track.tmpl = TrackTemplate{proposal->box, input.frame, 0};
                    track.history.clear();
                    result.events.push_back({TrackEventType::TemplateUpdated, track.id});
                    row.updated = true;
                    // "another tracking process" with the fresh template
                    auto second = backend_->propose(camera_, track.id, input);
                    if (second) {
                        proposal = second;
                        c_r = score_proposal(track, *proposal);
                    } else {
                        proposal.reset();
                    }
                }
                if (proposal) {
                    row.lost = false;
                    row.box = proposal->box;
                    row.c_r = c_r;
                }
            }
            if (!row.lost) {
                row.output_index = static_cast<int>(result.outputs.size());
                result.outputs.push_back({track.id, row.box, row.c_r});
            }
            rows.push_back(row);
        }

        // A lost track counts as occluded for the lifecycle; visible tracks
        // are cross-checked for mutual coverage.
        std::vector<OcclusionInput> overlap_inputs;
        for (const auto& row : rows)
            if (!row.lost)
                overlap_inputs.push_back({tracks_[row.track_index].id, row.box, row.c_r});
        std::set<GlobalId> occluded = resolve_occlusions(overlap_inputs, cfg_);
        for (const auto& row : rows)
            if (row.lost) occluded.insert(tracks_[row.track_index].id);

        std::vector<std::size_t> dead;
        std::set<int> dropped_outputs;
        for (auto& row : rows) {
            auto& track = tracks_[row.track_index];
            const bool occluded_now = occluded.count(track.id) != 0;
            if (occluded_now) result.occluded_ids.push_back(track.id);
            const bool was_visible = track.occl.status == OcclusionStatus::Visible;
            track.occl = step_occlusion(track.occl, occluded_now, cfg_);
            if (track.occl.status == OcclusionStatus::Deleted) {
                result.events.push_back({TrackEventType::Deleted, track.id});
                if (row.output_index >= 0) dropped_outputs.insert(row.output_index);
                backend_->close_track(camera_, track.id);
                dead.push_back(row.track_index);
                continue;
            }
            if (occluded_now && was_visible)
                result.events.push_back({TrackEventType::Occluded, track.id});
            if (!row.updated) track.tmpl.age += 1;
            if (!row.lost) {
                track.last_box = row.box;
                track.last_c_r = row.c_r;
            }
        }

        if (!dropped_outputs.empty()) {
            std::vector<TrackOutput> kept;
            for (int i = 0; i < static_cast<int>(result.outputs.size()); ++i)
                if (!dropped_outputs.count(i)) kept.push_back(result.outputs[i]);
            result.outputs = std::move(kept);
        }
        for (auto it = dead.rbegin(); it != dead.rend(); ++it)
            tracks_.erase(tracks_.begin() + static_cast<std::ptrdiff_t>(*it));
        return result;
    }

private:
    /// Pushes this frame's quality sample and returns the Eq.-style Re-ID
    /// confidence used for outputs and the occlusion rule.
    double score_proposal(TrackerState& track, const TrackProposal& proposal) {
        const double drift = iou_r({track.last_box.cx, track.last_box.cy},
                                   {proposal.box.cx, proposal.box.cy}, cfg_.r_side);
        const double c_r = reid_confidence(clamp01(proposal.confidence), drift);
        QualitySample sample;
        if (cfg_.update_metric == UpdateMetric::IouT) {
            sample.iou = box_iou(track.last_box, proposal.box);
            sample.conf = clamp01(proposal.confidence);
        } else {
            sample.iou = drift;
            sample.conf = c_r;
        }
        track.history.push(sample);
        return c_r;
    }

    CameraId camera_;
    QualityConfig cfg_;
    TrackerBackend* backend_;
    std::vector<TrackerState> tracks_;
};

}  // namespace sreid
