#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "check.hpp"
#include "mvedit/forge.hpp"

namespace mvedit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace detail {

namespace {

std::optional<Image> load(const fs::path& root, const std::string& rel, const DatasetRecord& r,
                          std::vector<ValidationIssue>& issues) {
    const fs::path p = root / rel;
    if (!fs::is_regular_file(p)) {
        issues.push_back({"missing_file", r.shape_id, r.mask_index, rel});
        return std::nullopt;
    }
    try {
        return read_png(p.string());
    } catch (const std::exception& e) {
        issues.push_back({"decode_error", r.shape_id, r.mask_index, rel + ": " + e.what()});
        return std::nullopt;
    }
}

bool same_pose(const CameraPose& a, const CameraPose& b) {
    constexpr double tol = 1e-12;
    return std::abs(a.azimuth - b.azimuth) <= tol && std::abs(a.elevation - b.elevation) <= tol &&
           std::abs(a.distance - b.distance) <= tol && std::abs(a.fov - b.fov) <= tol;
}

}  // namespace

std::vector<ValidationIssue> check_record_files(const fs::path& root, const DatasetRecord& r,
                                                const RecordExpectations& expect) {
    std::vector<ValidationIssue> issues;
    const auto gt = load(root, r.gt, r, issues);
    const auto masked = load(root, r.masked, r, issues);
    const auto mask = load(root, r.mask, r, issues);

    const fs::path poses_path = root / r.poses;
    if (!fs::is_regular_file(poses_path)) {
        issues.push_back({"missing_file", r.shape_id, r.mask_index, r.poses});
    } else {
        try {
            std::ifstream in(poses_path, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto poses = poses_from_json(ss.str());
            if (expect.poses)
                for (std::size_t q = 0; q < 4; ++q)
                    if (!same_pose(poses[q], (*expect.poses)[q])) {
                        issues.push_back({"pose_mismatch", r.shape_id, r.mask_index,
                                          r.poses + ": quadrant " + std::to_string(q) + " differs from the rig"});
                        break;
                    }
        } catch (const std::exception& e) {
            issues.push_back({"decode_error", r.shape_id, r.mask_index, r.poses + ": " + e.what()});
        }
    }
    if (!gt || !masked || !mask) return issues;

    auto dims = [](const Image& i) { return std::to_string(i.width) + "x" + std::to_string(i.height); };
    if (gt->channels != 3 || masked->channels != 3 || mask->channels != 1) {
        issues.push_back({"dimension_mismatch", r.shape_id, r.mask_index, "expected RGB color grids and a gray mask"});
        return issues;
    }
    if (!gt->same_shape(*masked) || gt->width != mask->width || gt->height != mask->height) {
        issues.push_back({"dimension_mismatch", r.shape_id, r.mask_index,
                          "gt " + dims(*gt) + ", masked " + dims(*masked) + ", mask " + dims(*mask)});
        return issues;
    }
    if (gt->width % 2 != 0 || gt->height % 2 != 0 ||
        (expect.view_resolution > 0 &&
         (gt->width != 2 * expect.view_resolution || gt->height != 2 * expect.view_resolution))) {
        issues.push_back({"dimension_mismatch", r.shape_id, r.mask_index, "grid is " + dims(*gt)});
        return issues;
    }

    std::size_t gray = 0;
    for (const auto v : mask->data) gray += (v != 0 && v != 255);
    if (gray > 0) {
        issues.push_back({"non_binary_mask", r.shape_id, r.mask_index,
                          r.mask + ": " + std::to_string(gray) + " pixel(s) outside {0,255}"});
        return issues;
    }

    std::size_t changed = 0;
    for (std::size_t i = 0; i < mask->data.size(); ++i) {
        if (mask->data[i]) continue;
        for (int c = 0; c < 3; ++c)
            if (gt->data[i * 3 + c] != masked->data[i * 3 + c]) {
                ++changed;
                break;
            }
    }
    if (changed > 0)
        issues.push_back({"unmasked_mismatch", r.shape_id, r.mask_index,
                          std::to_string(changed) + " unmasked pixel(s) differ between gt and masked"});
    return issues;
}

}  // namespace detail

json ValidationReport::to_json() const {
    json j{{"records", records}, {"ok", ok()}, {"issues", json::array()}};
    for (const auto& i : issues)
        j["issues"].push_back(
            json{{"kind", i.kind}, {"shape_id", i.shape_id}, {"mask_index", i.mask_index}, {"detail", i.detail}});
    return j;
}

ValidationReport validate_manifest(const fs::path& manifest_path) {
    const ForgeManifest m = read_manifest(manifest_path);
    const fs::path root = manifest_path.parent_path();

    ValidationReport report;
    report.records = m.records.size();

    detail::RecordExpectations expect;
    int per_type = kMasksPerType;
    try {
        const auto& h = m.header;
        expect.view_resolution = h.at("resolution").get<int>();
        per_type = h.at("masks_per_type").get<int>();
        const auto& rig = h.at("rig");
        CameraRig r;
        r.azimuth_offset = rig.at("azimuth_offset").get<double>();
        r.elevation = rig.at("elevation").get<double>();
        r.distance = rig.at("distance").get<double>();
        r.fov = rig.at("fov").get<double>();
        expect.poses = r.poses();
    } catch (const std::exception& e) {
        report.issues.push_back({"bad_header", "", -1, e.what()});
    }

    std::set<std::pair<std::string, int>> seen;
    std::map<std::string, std::array<int, 3>> per_shape;
    for (const auto& r : m.records) {
        if (!seen.insert({r.shape_id, r.mask_index}).second) {
            report.issues.push_back({"duplicate_record", r.shape_id, r.mask_index, ""});
            continue;
        }
        bool type_ok = false;
        try {
            type_ok = mask_type_for_index(r.mask_index, per_type) == r.type;
        } catch (const std::exception&) {
        }
        if (!type_ok)
            report.issues.push_back({"type_index_mismatch", r.shape_id, r.mask_index,
                                     "mask type " + std::string(to_string(r.type)) + " at this index"});
        else
            ++per_shape[r.shape_id][static_cast<std::size_t>(r.type)];

        auto found = detail::check_record_files(root, r, expect);
        report.issues.insert(report.issues.end(), found.begin(), found.end());
    }
    // Failed tasks are accounted for; anything else missing breaks the balance.
    for (const auto& f : m.errors) {
        if (!seen.insert({f.shape_id, f.mask_index}).second) {
            report.issues.push_back({"duplicate_record", f.shape_id, f.mask_index, "error line for a known record"});
            continue;
        }
        if (f.type == MaskType::TypeI || f.type == MaskType::TypeII || f.type == MaskType::TypeIII)
            ++per_shape[f.shape_id][static_cast<std::size_t>(f.type)];
    }
    for (const auto& [shape, counts] : per_shape)
        if (counts[0] != per_type || counts[1] != per_type || counts[2] != per_type)
            report.issues.push_back({"type_imbalance", shape, -1,
                                     "type counts " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) +
                                         "/" + std::to_string(counts[2]) + ", expected " + std::to_string(per_type) +
                                         " each"});
    return report;
}

}  // namespace mvedit
