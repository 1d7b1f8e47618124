// Copyright (c) 2026 The surround-reid authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "sreid/core.hpp"

namespace sreid {

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

struct GroundPoint {
    double x = 0.0;  // meters, ego ground-plane frame (+x forward, +y left)
    double y = 0.0;
};

inline double ground_distance(const GroundPoint& a, const GroundPoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Ray-model camera: pixel column maps linearly to azimuth within hfov,
/// pixel row maps linearly to elevation within vfov. Rows grow downward.
struct CameraModel {
    CameraId id = CameraId::Front;
    GroundPoint position;         // mount point on the ego ground plane, meters
    double yaw = 0.0;             // radians, CCW from +x
    double hfov = deg_to_rad(110.0);
    double vfov = deg_to_rad(62.0);
    double height = 1.0;          // mount height above ground, meters
    double pitch = 0.32;          // downward tilt, radians
    double image_width = 1280.0;
    double image_height = 720.0;
    double calib_noise_sigma = 0.0;  // meters; simulated per-scenario calibration error

    void validate() const {
        if (!(hfov > 0.0 && hfov < kPi)) throw std::invalid_argument("camera hfov out of (0,pi)");
        if (!(vfov > 0.0 && vfov < kPi)) throw std::invalid_argument("camera vfov out of (0,pi)");
        if (!(image_width > 0.0 && image_height > 0.0))
            throw std::invalid_argument("camera image dimensions must be positive");
        if (!(height > 0.0)) throw std::invalid_argument("camera height must be positive");
        if (calib_noise_sigma < 0.0)
            throw std::invalid_argument("camera calib_noise_sigma must be >= 0");
    }

    double azimuth_of_col(double col) const {
        return yaw - (col / image_width - 0.5) * hfov;
    }
    double elevation_of_row(double row) const {
        return -pitch - (row / image_height - 0.5) * vfov;
    }
    double col_of_azimuth(double azimuth) const {
        return image_width * (0.5 + wrap_angle(yaw - azimuth) / hfov);
    }
    double row_of_elevation(double elevation) const {
        return image_height * (0.5 + (-pitch - elevation) / vfov);
    }
};

/// Inverse projection of an image point onto the ego ground plane.
/// Throws when the ray does not descend to the ground.
inline GroundPoint project_to_ground(PixelPoint kp, const CameraModel& cam) {
    if (kp.x < 0.0 || kp.x > cam.image_width || kp.y < 0.0 || kp.y > cam.image_height)
        throw std::domain_error("project_to_ground: keypoint outside image bounds");
    const double elevation = cam.elevation_of_row(kp.y);
    if (elevation >= 0.0)
        throw std::domain_error("project_to_ground: ray on or above the horizon");
    const double range = cam.height / std::tan(-elevation);
    const double azimuth = cam.azimuth_of_col(kp.x);
    return {cam.position.x + range * std::cos(azimuth),
            cam.position.y + range * std::sin(azimuth)};
}

inline std::optional<GroundPoint> try_project_to_ground(PixelPoint kp, const CameraModel& cam) {
    if (kp.x < 0.0 || kp.x > cam.image_width || kp.y < 0.0 || kp.y > cam.image_height)
        return std::nullopt;
    const double elevation = cam.elevation_of_row(kp.y);
    if (elevation >= 0.0) return std::nullopt;
    const double range = cam.height / std::tan(-elevation);
    const double azimuth = cam.azimuth_of_col(kp.x);
    return GroundPoint{cam.position.x + range * std::cos(azimuth),
                       cam.position.y + range * std::sin(azimuth)};
}

/// Forward projection of a world point at height z; nullopt outside the image.
inline std::optional<PixelPoint> project_from_world(const GroundPoint& p, double z,
                                                    const CameraModel& cam) {
    const double dx = p.x - cam.position.x;
    const double dy = p.y - cam.position.y;
    const double range = std::hypot(dx, dy);
    if (range < 1e-9) return std::nullopt;
    const double azimuth = std::atan2(dy, dx);
    if (std::abs(wrap_angle(cam.yaw - azimuth)) > 0.5 * cam.hfov) return std::nullopt;
    const double elevation = std::atan2(z - cam.height, range);
    const PixelPoint px{cam.col_of_azimuth(azimuth), cam.row_of_elevation(elevation)};
    if (px.x < 0.0 || px.x > cam.image_width || px.y < 0.0 || px.y > cam.image_height)
        return std::nullopt;
    return px;
}

/// Ground disk around a projected keypoint; looser for points farther from
/// the camera, where projection error grows.
struct UncertaintyDisk {
    GroundPoint center;
    double radius = 0.0;
};

inline double uncertainty_radius(const GroundPoint& p, const CameraModel& cam, double r0,
                                 double k) {
    if (!(r0 > 0.0)) throw std::invalid_argument("uncertainty_radius: r0 must be > 0");
    if (k < 0.0) throw std::invalid_argument("uncertainty_radius: k must be >= 0");
    return r0 + k * ground_distance(p, cam.position);
}

/// Boundary contact counts as overlap.
inline bool disks_overlap(const UncertaintyDisk& a, const UncertaintyDisk& b) {
    return ground_distance(a.center, b.center) <= a.radius + b.radius;
}

/// Wheel grounding keypoints after projection to the ground plane.
struct ProjectedKeypoints {
    std::optional<GroundPoint> front;
    std::optional<GroundPoint> rear;
};

/// D_K = D_f + D_r over the two keypoint categories. Absent when either
/// category is missing on either side; the caller falls back to feature-only
/// scoring in that case.
inline std::optional<double> keypoint_distance(const ProjectedKeypoints& a,
                                               const ProjectedKeypoints& b) {
    if (!a.front || !b.front || !a.rear || !b.rear) return std::nullopt;
    return ground_distance(*a.front, *b.front) + ground_distance(*a.rear, *b.rear);
}

/// Per-run projection settings: uncertainty law plus the camera rig.
struct ProjectionConfig {
    double r0 = 0.2;          // base disk radius, meters
    double k_per_meter = 0.05;  // radius growth per meter of camera distance
    std::array<CameraModel, 3> cameras = default_rig();

    const CameraModel& camera(CameraId id) const { return cameras[static_cast<int>(id)]; }

    void validate() const {
        if (!(r0 > 0.0)) throw std::invalid_argument("projection.r0 must be > 0");
        if (k_per_meter < 0.0) throw std::invalid_argument("projection.k must be >= 0");
        for (const auto& cam : cameras) cam.validate();
    }

    static std::array<CameraModel, 3> default_rig() {
        CameraModel left;
        left.id = CameraId::Left;
        left.position = {0.5, 0.95};
        left.yaw = deg_to_rad(90.0);
        CameraModel front;
        front.id = CameraId::Front;
        front.position = {2.2, 0.0};
        front.yaw = 0.0;
        CameraModel right;
        right.id = CameraId::Right;
        right.position = {0.5, -0.95};
        right.yaw = deg_to_rad(-90.0);
        return {left, front, right};
    }
};

}  // namespace sreid
