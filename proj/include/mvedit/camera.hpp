// camera.hpp - look-at cameras on a sphere around the origin, y-up.
#pragma once

#include <array>

#include "mvedit/geometry.hpp"

namespace mvedit {

struct CameraPose {
    double azimuth{};    // radians, about +y; 0 looks from +z
    double elevation{};  // radians above the xz-plane
    double distance{1.0};
    double fov{};  // vertical field of view, radians
    Vec3 position;
    // Rows are the camera right, up and backward axes; view space looks down -z.
    Mat3 rotation;

    Vec3 to_view(const Vec3& world) const { return rotation * (world - position); }
    Vec3 forward() const { return -rotation.row(2); }
};

// Camera at distance * (cos(el) sin(az), sin(el), cos(el) cos(az)) looking at the
// origin. Quarter-turn angles use exact sines/cosines so that rigs rotated by a
// multiple of 90 degrees reproduce identical poses.
CameraPose camera_pose(double azimuth, double elevation, double distance, double fov);

inline constexpr double kDefaultElevation = kPi / 4.0;
inline constexpr double kDefaultDistance = 2.8;
inline constexpr double kDefaultFov = 50.0 * kPi / 180.0;

// Four views at azimuths offset + {0, pi/2, pi, 3pi/2}, shared elevation/distance/fov.
struct CameraRig {
    double azimuth_offset{0.0};
    double elevation{kDefaultElevation};
    double distance{kDefaultDistance};
    double fov{kDefaultFov};

    double azimuth(int view) const;
    std::array<CameraPose, 4> poses() const;
};

}  // namespace mvedit
