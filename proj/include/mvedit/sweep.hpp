// sweep.hpp - azimuth-offset generalization harness.
//
// Every (mesh, mask) item is rendered with the camera rig rotated by
// k * 360/n degrees, k = 0..n-1. Rows carry render statistics and, when a
// backend is configured, how well the backend kept the unmasked pixels.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvedit/backend.hpp"
#include "mvedit/multiview.hpp"

namespace mvedit {

inline constexpr int kSweepOffsets = 16;

// Offsets in radians: k * 2pi / count.
std::vector<double> sweep_offsets(int count = kSweepOffsets);

struct SweepItem {
    std::string id;
    TriangleMesh mesh;  // normalized
    MaskGeometry mask;
    std::uint64_t seed{0};
    std::string prompt;
};

struct SweepConfig {
    int offsets{kSweepOffsets};
    CameraRig rig;  // azimuth_offset is added to every sweep offset
    RenderConfig render;
    InpaintBackend* backend{nullptr};
    int steps{kDefaultSamplerSteps};
    std::optional<double> guidance;
    int workers{1};
};

struct SweepRow {
    std::string item;
    int offset_index{};
    double offset_deg{};
    std::array<double, 4> coverage{};
    double mean_coverage{};
    double foreground_fraction{};  // gt pixels that differ from the background color
    std::optional<double> preservation;
    std::optional<double> ssim_to_gt;
};

struct SweepAggregate {
    int offset_index{};
    double offset_deg{};
    int count{};
    double coverage_mean{}, coverage_std{};
    double foreground_mean{}, foreground_std{};
    std::optional<double> preservation_mean, preservation_std;
    std::optional<double> ssim_mean, ssim_std;
};

// Neural metric columns left empty for external tools to fill.
inline const std::vector<std::string> kReservedMetricColumns{"clip_l", "clip_g", "fid", "lpips", "dreamsim"};

struct EvalReport {
    std::vector<SweepRow> rows;  // sorted by (item, offset_index)
    std::vector<SweepAggregate> aggregates;

    std::string to_json() const;
    std::string to_csv() const;
};

// Population mean/std per offset, recomputed from rows.
std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows, int offsets);

// Conditioning triples for one item at every offset.
std::vector<RenderTuple> render_sweep(const SweepItem& item, const SweepConfig& cfg);

EvalReport azimuth_sweep(const std::vector<SweepItem>& items, const SweepConfig& cfg);

}  // namespace mvedit
