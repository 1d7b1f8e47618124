// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sreid/assignment.hpp"
#include "sreid/core.hpp"

namespace sreid {

struct GtEntry {
    GlobalId id = 0;
    BoundingBox box;
};

struct HypEntry {
    GlobalId id = 0;
    BoundingBox box;
};

/// One evaluated frame of one camera.
struct EvalFrame {
    FrameIndex frame = 0;
    std::vector<GtEntry> gt;
    std::vector<HypEntry> hyp;
};

/// Paired ground-truth and hypothesis tracks for one sequence.
struct EvalSequence {
    std::array<std::vector<EvalFrame>, 3> cameras;  // indexed by CameraId
};

/// Optimal (not greedy) maximum-total-IoU assignment between ground truth and
/// hypotheses, restricted to pairs with IoU >= iou_min. Returns index pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> match_frame(
    const std::vector<GtEntry>& gt, const std::vector<HypEntry>& hyp, double iou_min) {
    if (!(iou_min > 0.0 && iou_min <= 1.0))
        throw std::invalid_argument("match_frame: iou_min must be in (0,1]");
    if (gt.empty() || hyp.empty()) return {};
    std::vector<std::vector<double>> score(gt.size(), std::vector<double>(hyp.size(), 0.0));
    for (std::size_t i = 0; i < gt.size(); ++i)
        for (std::size_t j = 0; j < hyp.size(); ++j)
            score[i][j] = box_iou(gt[i].box, hyp[j].box);
    return max_score_matching(score, iou_min);
}

struct IcCameraReport {
    long long idsw = 0;
    long long id_total = 0;
    std::map<FrameIndex, int> idsw_by_frame;  // only frames with switches

    std::optional<double> ic() const {
        if (id_total == 0) return std::nullopt;
        return 1.0 - static_cast<double>(idsw) / static_cast<double>(id_total);
    }
};

struct IcReport {
    long long total_idsw = 0;
    long long total_id = 0;
    std::array<IcCameraReport, 3> cameras;

    /// Absent when there are no ground-truth target-frames at all.
    std::optional<double> ic() const {
        if (total_id == 0) return std::nullopt;
        return 1.0 - static_cast<double>(total_idsw) / static_cast<double>(total_id);
    }
};

/// Whether the last-known-assignment state is kept per camera or shared
/// globally across cameras.
enum class StateScope { PerCamera, Global };

/// Counts identity switches: a switch is a matched ground-truth target whose
/// hypothesis id differs from its last known assignment. Unmatched frames do
/// not alter the remembered assignment. With global scope the state is shared
/// across cameras and frames are consumed in tick order (frame-major).
inline IcReport count_idsw(const EvalSequence& seq, double iou_min,
                           StateScope scope = StateScope::PerCamera) {
    IcReport report;
    std::map<GlobalId, GlobalId> global_state;
    std::array<std::map<GlobalId, GlobalId>, 3> camera_state;

    auto eval_frame = [&](CameraId cam, const EvalFrame& fr) {
        auto& sub = report.cameras[static_cast<int>(cam)];
        auto& state =
            scope == StateScope::Global ? global_state : camera_state[static_cast<int>(cam)];
        sub.id_total += static_cast<long long>(fr.gt.size());
        const auto matches = match_frame(fr.gt, fr.hyp, iou_min);
        int switches = 0;
        for (const auto& [gi, hj] : matches) {
            const GlobalId gt_id = fr.gt[gi].id;
            const GlobalId hyp_id = fr.hyp[hj].id;
            auto it = state.find(gt_id);
            if (it != state.end() && it->second != hyp_id) ++switches;
            state[gt_id] = hyp_id;
        }
        if (switches > 0) sub.idsw_by_frame[fr.frame] += switches;
        sub.idsw += switches;
    };

    // Frame-major walk keeps the shared-state variant causally ordered; the
    // per-camera variant is order-independent so one walk serves both.
    std::array<std::size_t, 3> cursor = {0, 0, 0};
    for (;;) {
        std::optional<FrameIndex> next;
        for (CameraId cam : kAllCameras) {
            const auto& frames = seq.cameras[static_cast<int>(cam)];
            const std::size_t at = cursor[static_cast<int>(cam)];
            if (at < frames.size() && (!next || frames[at].frame < *next))
                next = frames[at].frame;
        }
        if (!next) break;
        for (CameraId cam : kAllCameras) {
            const auto& frames = seq.cameras[static_cast<int>(cam)];
            auto& at = cursor[static_cast<int>(cam)];
            if (at < frames.size() && frames[at].frame == *next) {
                eval_frame(cam, frames[at]);
                ++at;
            }
        }
    }
    for (const auto& sub : report.cameras) {
        report.total_idsw += sub.idsw;
        report.total_id += sub.id_total;
    }
    return report;
}

}  // namespace sreid
