// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <set>
#include <stdexcept>
#include <vector>

#include "sreid/core.hpp"

namespace sreid {

/// Which windowed pair drives template updates.
///  - IouR: center-drift ratio and drift-weighted confidence
///  - IouT: plain consecutive-box IoU and raw tracker confidence
///  - None: never update (fixed initial template)
enum class UpdateMetric { None, IouT, IouR };

struct QualityConfig {
    double r_side = 32.0;  // side length R of the drift square, pixels
    double t1 = 0.4;       // threshold on the windowed drift ratio
    double t2 = 0.3;       // threshold on the windowed confidence
    int m_window = 3;      // frames averaged for the update decision
    double t_o = 0.6;      // occlusion coefficient threshold
    int n_occl = 4;        // consecutive occluded frames before deletion; 0 disables
    UpdateMetric update_metric = UpdateMetric::IouR;

    void validate() const {
        if (!(r_side > 0.0)) throw std::invalid_argument("quality.r_side must be > 0");
        if (t1 < 0.0 || t1 > 1.0) throw std::invalid_argument("quality.t1 must be in [0,1]");
        if (t2 < 0.0 || t2 > 1.0) throw std::invalid_argument("quality.t2 must be in [0,1]");
        if (m_window < 1) throw std::invalid_argument("quality.m_window must be >= 1");
        if (!(t_o > 0.0 && t_o <= 1.0)) throw std::invalid_argument("quality.t_o must be in (0,1]");
        if (n_occl < 0) throw std::invalid_argument("quality.n_occl must be >= 0");
    }
};

/// Center-drift ratio of two R-squares centered on consecutive box centers.
/// 1 iff the centers coincide, 0 once either axis offset reaches R.
inline double iou_r(PixelPoint prev_center, PixelPoint curr_center, double r_side) {
    if (!(r_side > 0.0)) throw std::invalid_argument("iou_r: r_side must be > 0");
    const double ox = r_side - std::abs(curr_center.x - prev_center.x);
    const double oy = r_side - std::abs(curr_center.y - prev_center.y);
    if (ox <= 0.0 || oy <= 0.0) return 0.0;
    const double s = ox * oy;
    return s / (2.0 * r_side * r_side - s);
}

/// Tracking confidence downweighted by center stability.
inline double reid_confidence(double c_t, double iou_r_value) {
    if (c_t < 0.0 || c_t > 1.0) throw std::domain_error("reid_confidence: c_t out of [0,1]");
    if (iou_r_value < 0.0 || iou_r_value > 1.0)
        throw std::domain_error("reid_confidence: iou_r out of [0,1]");
    return c_t * iou_r_value;
}

/// One per-frame quality sample: the drift ratio and its paired confidence,
/// whichever metric pair the config selects.
struct QualitySample {
    double iou = 0.0;
    double conf = 0.0;
};

/// Ring of the most recent m_window quality samples for one tracker.
class QualityHistory {
public:
    QualityHistory() = default;
    explicit QualityHistory(int window) : window_(window < 1 ? 1 : static_cast<std::size_t>(window)) {}

    void push(QualitySample s) {
        samples_.push_back(s);
        while (samples_.size() > window_) samples_.pop_front();
    }

    void clear() { samples_.clear(); }
    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }

    double mean_iou() const {
        double acc = 0.0;
        for (const auto& s : samples_) acc += s.iou;
        return samples_.empty() ? 0.0 : acc / static_cast<double>(samples_.size());
    }

    double mean_conf() const {
        double acc = 0.0;
        for (const auto& s : samples_) acc += s.conf;
        return samples_.empty() ? 0.0 : acc / static_cast<double>(samples_.size());
    }

private:
    std::deque<QualitySample> samples_;
    std::size_t window_ = 3;
};

/// Update condition: both windowed means must fall below their thresholds.
/// A window younger than m_window averages what exists.
inline bool should_update_template(const QualityHistory& history, const QualityConfig& cfg) {
    if (history.empty())
        throw std::logic_error("should_update_template: history must be non-empty");
    return history.mean_iou() < cfg.t1 && history.mean_conf() < cfg.t2;
}

/// Fraction of `subject` covered by `other`. Not symmetric.
inline double occlusion_coefficient(const BoundingBox& subject, const BoundingBox& other) {
    return box_intersection_area(subject, other) / subject.area();
}

struct OcclusionInput {
    GlobalId id = 0;
    BoundingBox box;
    double c_r = 0.0;
};

/// Pairwise occlusion marking. For each pair, the sufficiently-covered member
/// is marked; when both cover each other past the threshold only the one with
/// lower c_r is marked (ties go against the higher id).
inline std::set<GlobalId> resolve_occlusions(const std::vector<OcclusionInput>& tracks,
                                             const QualityConfig& cfg) {
    std::set<GlobalId> occluded;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = i + 1; j < tracks.size(); ++j) {
            const auto& a = tracks[i];
            const auto& b = tracks[j];
            const bool a_covered = occlusion_coefficient(a.box, b.box) > cfg.t_o;
            const bool b_covered = occlusion_coefficient(b.box, a.box) > cfg.t_o;
            if (a_covered && b_covered) {
                if (a.c_r < b.c_r)
                    occluded.insert(a.id);
                else if (b.c_r < a.c_r)
                    occluded.insert(b.id);
                else
                    occluded.insert(std::max(a.id, b.id));
            } else if (a_covered) {
                occluded.insert(a.id);
            } else if (b_covered) {
                occluded.insert(b.id);
            }
        }
    }
    return occluded;
}

enum class OcclusionStatus { Visible, Occluded, Deleted };

struct OcclusionState {
    int consecutive_occluded = 0;
    OcclusionStatus status = OcclusionStatus::Visible;
};

/// Advances the per-track occlusion lifecycle by one frame.
/// n_occl = 0 disables occlusion handling entirely.
inline OcclusionState step_occlusion(OcclusionState state, bool occluded_now,
                                     const QualityConfig& cfg) {
    if (state.status == OcclusionStatus::Deleted)
        throw std::logic_error("step_occlusion: track already deleted");
    if (cfg.n_occl == 0) {
        state.status = OcclusionStatus::Visible;
        return state;
    }
    if (occluded_now) {
        state.consecutive_occluded += 1;
        state.status = state.consecutive_occluded >= cfg.n_occl ? OcclusionStatus::Deleted
                                                                : OcclusionStatus::Occluded;
    } else {
        state.consecutive_occluded = 0;
        state.status = OcclusionStatus::Visible;
    }
    return state;
}

}  // namespace sreid
