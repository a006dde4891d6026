// Procedural test shapes and helpers shared by the unit and acceptance tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mvedit/image.hpp"
#include "mvedit/mesh.hpp"

namespace fixtures {

using mvedit::TriangleMesh;
using mvedit::Vec3;

TriangleMesh box(const Vec3& lo, const Vec3& hi);
TriangleMesh icosphere(int subdivisions, double radius = 1.0, const Vec3& center = {});
TriangleMesh torus(double major, double minor, int seg_major = 32, int seg_minor = 16, const Vec3& center = {});
TriangleMesh cylinder(double radius, double half_height, int segments = 32, const Vec3& center = {});

// Deterministic, varied shape #i (composites of the primitives above, randomly
// stretched and rotated, some with vertex colors).
TriangleMesh corpus_shape(int i);

// Writes shape_00.obj .. shape_{n-1}.obj and captions.tsv into dir.
void write_corpus(const std::filesystem::path& dir, int n);

// Smooth pseudo-natural RGB image: blended gradients, blobs and texture.
mvedit::Image natural_image(int width, int height, std::uint64_t seed);

// Adds uniform noise in [-amplitude, amplitude], clamped.
mvedit::Image add_noise(const mvedit::Image& img, double amplitude, std::uint64_t seed);

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
