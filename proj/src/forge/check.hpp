// Per-record on-disk checks shared by resume and manifest validation.
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "mvedit/forge.hpp"

namespace mvedit::detail {

struct RecordExpectations {
    int view_resolution{0};  // 0 = accept any even size
    std::optional<std::array<CameraPose, 4>> poses;
};

std::vector<ValidationIssue> check_record_files(const std::filesystem::path& root, const DatasetRecord& record,
                                                const RecordExpectations& expect);

}  // namespace mvedit::detail
