// forge.hpp - offline training-set generation.
//
// Output layout under the output directory:
//   manifest.jsonl                       header line, records, then error lines
//   <shape-id>/<mask-index>/gt.png       color grid of the shape
//   <shape-id>/<mask-index>/masked.png   color grid with mask pixels filled
//   <shape-id>/<mask-index>/mask.png     binary grid, {0,255}
//   <shape-id>/<mask-index>/poses.json   quadrant poses
//
// Every task draws from its own generator seeded by a hash of
// (global seed, shape id, mask index), so outputs do not depend on scheduling.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mvedit/multiview.hpp"

namespace mvedit {

inline constexpr const char* kManifestFormat = "mvedit-forge/1";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kMasksPerType = 10;

struct ShapeEntry {
    std::string id;  // file stem
    std::filesystem::path path;
};

// All *.obj files directly inside `dir`, sorted by id.
std::vector<ShapeEntry> scan_corpus(const std::filesystem::path& dir);

// Tab-separated "shape-id<TAB>caption" lines, or a JSON object {id: caption}.
std::map<std::string, std::string> load_captions(const std::filesystem::path& path);

struct ForgeConfig {
    std::uint64_t global_seed{0};
    RenderConfig render;
    CameraRig rig;
    MaskConfig masks;
    NormalizeOptions normalize;
    int masks_per_type{kMasksPerType};
    int workers{1};
    bool strict_captions{true};
};

struct ForgeTask {
    std::string shape_id;
    std::filesystem::path mesh_path;
    int mask_index{};
    MaskType type{MaskType::TypeI};
    std::uint64_t seed{};
    std::string caption;
};

std::uint64_t task_seed(std::uint64_t global_seed, std::string_view shape_id, int mask_index);

// Indices [0, n) are Type I, [n, 2n) Type II, [2n, 3n) Type III for n = masks_per_type.
MaskType mask_type_for_index(int mask_index, int masks_per_type = kMasksPerType);

inline std::size_t expected_record_count(std::size_t shapes, int masks_per_type = kMasksPerType) {
    return shapes * 3 * static_cast<std::size_t>(masks_per_type);
}

class ForgeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws ForgeError for a missing caption when cfg.strict_captions is set.
std::vector<ForgeTask> plan_tasks(const std::vector<ShapeEntry>& corpus,
                                  const std::map<std::string, std::string>& captions, const ForgeConfig& cfg);

struct DatasetRecord {
    std::string shape_id;
    int mask_index{};
    MaskType type{MaskType::TypeI};
    std::string caption;
    std::uint64_t seed{};
    std::string gt, masked, mask, poses;  // relative to the output directory
};

struct ForgeFailure {
    std::string shape_id;
    int mask_index{};
    MaskType type{MaskType::TypeI};
    std::uint64_t seed{};
    std::string message;
};

struct ForgeStats {
    std::size_t rendered{};
    std::size_t skipped{};  // already complete on disk
    std::size_t failed{};
    double seconds{};
};

struct ForgeManifest {
    nlohmann::json header;
    std::vector<DatasetRecord> records;  // sorted by (shape id, mask index)
    std::vector<ForgeFailure> errors;    // same order
};

struct ForgeResult {
    ForgeManifest manifest;
    ForgeStats stats;
};

// Executes the plan, writes all outputs and manifest.jsonl. Per-task failures are
// recorded; failure to write the manifest throws.
ForgeResult run_forge(const std::vector<ForgeTask>& tasks, const std::filesystem::path& out_dir,
                      const ForgeConfig& cfg);

std::string manifest_to_jsonl(const ForgeManifest& manifest);
ForgeManifest read_manifest(const std::filesystem::path& path);

nlohmann::json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);

struct ValidationIssue {
    std::string kind;  // missing_file, decode_error, dimension_mismatch, non_binary_mask, ...
    std::string shape_id;
    int mask_index{-1};
    std::string detail;
};

struct ValidationReport {
    std::size_t records{};
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    nlohmann::json to_json() const;
};

// Checks files, PNG decoding, mask purity, unmasked agreement, pose sidecars and
// per-shape type balance. Throws ForgeError if the manifest cannot be read.
ValidationReport validate_manifest(const std::filesystem::path& manifest_path);

}  // namespace mvedit
