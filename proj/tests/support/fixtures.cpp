#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <unistd.h>

#include "mvedit/random.hpp"

namespace fixtures {

using mvedit::Face;
using mvedit::kPi;
using mvedit::Rng;

TriangleMesh box(const Vec3& lo, const Vec3& hi) {
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    // Outward winding.
    m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
               {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return m;
}

TriangleMesh icosphere(int subdivisions, double radius, const Vec3& center) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p = normalized(p);
    std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            if (const auto it = mid.find(key); it != mid.end()) return it->second;
            v.push_back(normalized((v[a] + v[b]) * 0.5));
            const auto idx = static_cast<std::uint32_t>(v.size() - 1);
            mid[key] = idx;
            return idx;
        };
        std::vector<Face> next;
        for (const auto& tri : f) {
            const auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    TriangleMesh m;
    for (const auto& p : v) m.vertices.push_back(center + p * radius);
    m.faces = std::move(f);
    return m;
}

TriangleMesh torus(double major, double minor, int seg_major, int seg_minor, const Vec3& center) {
    TriangleMesh m;
    for (int i = 0; i < seg_major; ++i) {
        const double u = 2.0 * kPi * i / seg_major;
        for (int j = 0; j < seg_minor; ++j) {
            const double w = 2.0 * kPi * j / seg_minor;
            const double r = major + minor * std::cos(w);
            m.vertices.push_back(center + Vec3{r * std::cos(u), minor * std::sin(w), r * std::sin(u)});
        }
    }
    auto id = [&](int i, int j) {
        return static_cast<std::uint32_t>((i % seg_major) * seg_minor + (j % seg_minor));
    };
    for (int i = 0; i < seg_major; ++i)
        for (int j = 0; j < seg_minor; ++j) {
            m.faces.push_back({id(i, j), id(i, j + 1), id(i + 1, j)});
            m.faces.push_back({id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)});
        }
    return m;
}

TriangleMesh cylinder(double radius, double half_height, int segments, const Vec3& center) {
    TriangleMesh m;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < segments; ++i) {
            const double a = 2.0 * kPi * i / segments;
            m.vertices.push_back(center + Vec3{radius * std::cos(a), k ? half_height : -half_height, radius * std::sin(a)});
        }
    const auto n = static_cast<std::uint32_t>(segments);
    const std::uint32_t bottom = 2 * n, top = 2 * n + 1;
    m.vertices.push_back(center + Vec3{0, -half_height, 0});
    m.vertices.push_back(center + Vec3{0, half_height, 0});
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t j = (i + 1) % n;
        m.faces.push_back({i, n + i, j});
        m.faces.push_back({j, n + i, n + j});
        m.faces.push_back({bottom, i, j});
        m.faces.push_back({top, n + j, n + i});
    }
    return m;
}

namespace {

mvedit::Quat random_rotation(Rng& rng) {
    // Uniform over SO(3) (Shoemake).
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return {a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2), b * std::sin(2 * kPi * u3),
            b * std::cos(2 * kPi * u3)};
}

}  // namespace

TriangleMesh corpus_shape(int i) {
    Rng rng(mvedit::mix64(0x5eed0000ull + static_cast<std::uint64_t>(i)));
    TriangleMesh m;
    switch (i % 5) {
        case 0:
            m = icosphere(2 + i % 2, 1.0);
            break;
        case 1:
            m = torus(1.0, rng.uniform(0.2, 0.45), 28, 14);
            break;
        case 2: {
            m = box({-1.0, 0.4, -0.6}, {1.0, 0.5, 0.6});
            for (const double x : {-0.9, 0.8})
                for (const double z : {-0.5, 0.4}) m.append(box({x, -0.6, z}, {x + 0.1, 0.4, z + 0.1}));
            break;
        }
        case 3:
            m = icosphere(2, 0.6, {0, -0.4, 0});
            m.append(icosphere(2, 0.4, {0, 0.5, 0}));
            m.append(cylinder(0.08, 0.25, 16, {0.0, 0.5, 0.45}));
            break;
        default:
            m = cylinder(0.5, 0.6, 40);
            m.append(torus(0.3, 0.07, 20, 10, {0.7, 0.0, 0.0}));
            break;
    }
    const Vec3 stretch{rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6), rng.uniform(0.6, 1.6)};
    const auto rot = random_rotation(rng).to_matrix();
    const Vec3 offset{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double scale = rng.uniform(0.2, 20.0);
    for (auto& v : m.vertices) v = (rot * Vec3{v.x * stretch.x, v.y * stretch.y, v.z * stretch.z} + offset) * scale;
    if (i % 3 == 0) {
        const auto box = m.bounds();
        for (const auto& v : m.vertices) {
            const Vec3 t = (v - box.lo) / std::max(1e-12, box.extent().x + box.extent().y + box.extent().z);
            m.colors.push_back({0.3 + 0.7 * t.x, 0.3 + 0.5 * t.y, 0.9 - 0.6 * t.z});
        }
    }
    return m;
}

void write_corpus(const std::filesystem::path& dir, int n) {
    std::filesystem::create_directories(dir);
    std::ofstream captions(dir / "captions.tsv");
    static constexpr const char* kinds[] = {"a smooth pebble", "a ring", "a small table", "a snowman",
                                            "a mug with a handle"};
    for (int i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "shape_%02d", i);
        mvedit::save_obj(corpus_shape(i), (dir / (std::string(name) + ".obj")).string());
        captions << name << '\t' << kinds[i % 5] << " #" << i << '\n';
    }
}

mvedit::Image natural_image(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    struct Blob {
        double x, y, r, c[3];
    };
    std::vector<Blob> blobs(12);
    for (auto& b : blobs) {
        b = {rng.uniform(0, width), rng.uniform(0, height), rng.uniform(0.05, 0.3) * width, {}};
        for (double& c : b.c) c = rng.uniform(-120, 120);
    }
    const double fx = rng.uniform(0.1, 0.4), fy = rng.uniform(0.1, 0.4);
    mvedit::Image img(width, height, 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = 60.0 + 120.0 * x / width + 40.0 * c * y / height;
                for (const auto& b : blobs) {
                    const double d2 = ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.r * b.r);
                    v += b.c[c] * std::exp(-d2);
                }
                v += 12.0 * std::sin(fx * x + c) * std::cos(fy * y);
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
    return img;
}

mvedit::Image add_noise(const mvedit::Image& img, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    mvedit::Image out = img;
    for (auto& v : out.data) v = static_cast<std::uint8_t>(std::clamp(std::lround(v + rng.uniform(-amplitude, amplitude)), 0L, 255L));
    return out;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mvedit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace fixtures
