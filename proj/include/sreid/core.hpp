// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sreid {

/// Axis-aligned box in continuous pixel coordinates, center format (cx, cy, w, h).
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double left() const { return cx - 0.5 * w; }
    double right() const { return cx + 0.5 * w; }
    double top() const { return cy - 0.5 * h; }
    double bottom() const { return cy + 0.5 * h; }

    bool valid() const {
        return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
               std::isfinite(h) && w > 0.0 && h > 0.0;
    }
};

enum class CameraId : int { Left = 0, Front = 1, Right = 2 };

inline constexpr std::array<CameraId, 3> kAllCameras = {CameraId::Left, CameraId::Front,
                                                        CameraId::Right};

inline const char* to_string(CameraId cam) {
    switch (cam) {
        case CameraId::Left: return "left";
        case CameraId::Front: return "front";
        case CameraId::Right: return "right";
    }
    return "?";
}

inline std::optional<CameraId> camera_from_string(const std::string& s) {
    if (s == "left") return CameraId::Left;
    if (s == "front") return CameraId::Front;
    if (s == "right") return CameraId::Right;
    return std::nullopt;
}

/// Identity shared by all single-camera tracks of one physical vehicle.
/// Allocated monotonically, never reused within a run.
using GlobalId = std::int64_t;

using FrameIndex = std::int64_t;

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Appearance feature vector of fixed dimension E (configured per run).
using Embedding = std::vector<double>;

/// Wheel grounding keypoints in image pixels. When present, at least
/// one of front/rear is set.
struct WheelKeypoints {
    std::optional<PixelPoint> front;
    std::optional<PixelPoint> rear;
};

/// One observation in one camera frame.
struct Detection {
    CameraId camera = CameraId::Front;
    FrameIndex frame = 0;
    BoundingBox box;
    double conf = 0.0;  // tracking/detection confidence C_T in [0,1]
    std::optional<WheelKeypoints> keypoints;
    std::optional<Embedding> embedding;
    std::optional<GlobalId> gt_id;  // ground-truth channel, simulator-provided
};

inline double box_intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    if (iw <= 0.0) return 0.0;
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (ih <= 0.0) return 0.0;
    return iw * ih;
}

/// Intersection over union; 1 iff the boxes coincide, 0 iff disjoint.
inline double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = box_intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

inline double euclidean_distance(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("embedding dimension mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace sreid
