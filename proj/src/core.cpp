#include "vlnforge/core.hpp"

namespace vlnforge {

Vec3 pixel_ray(double u, double v, const CameraIntrinsics& intr, const Pose& pose) {
    const double a = (u - intr.cx()) / intr.fx();
    const double b = (v - intr.cy()) / intr.fy();
    const Vec3 f = pose.forward();
    const Vec3 r = pose.right();
    const Vec3 up = pose.up();
    return f + a * r - b * up;
}

Vec3 pixel_to_point(double u, double v, double depth, const CameraIntrinsics& intr,
                    const Pose& pose) {
    if (!(depth > 0.0)) throw InvalidArgument("pixel_to_point: depth must be positive");
    if (u < 0.0 || u >= intr.width || v < 0.0 || v >= intr.height)
        throw InvalidArgument("pixel_to_point: pixel outside image");
    return pose.position + depth * pixel_ray(u, v, intr, pose);
}

PixelProjection project_point(const Vec3& point, const CameraIntrinsics& intr, const Pose& pose) {
    const Vec3 q = point - pose.position;
    PixelProjection out;
    out.depth = q.dot(pose.forward());
    if (out.depth <= 0.0) return out;
    const double a = q.dot(pose.right()) / out.depth;
    const double b = -q.dot(pose.up()) / out.depth;
    out.u = intr.cx() + a * intr.fx();
    out.v = intr.cy() + b * intr.fy();
    out.in_image = out.u >= -0.5 && out.u <= intr.width - 0.5 && out.v >= -0.5 &&
                   out.v <= intr.height - 0.5;
    return out;
}

}  // namespace vlnforge
