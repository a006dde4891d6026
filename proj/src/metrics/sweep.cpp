#include "mvedit/sweep.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mvedit/metrics.hpp"
#include "mvedit/parallel.hpp"

namespace mvedit {

using json = nlohmann::json;

std::vector<double> sweep_offsets(int count) {
    if (count <= 0) throw std::invalid_argument("sweep needs at least one offset");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = k * (2.0 * kPi / count);
    return out;
}

namespace {

double offset_degrees(int k, int count) { return 360.0 * k / count; }

double foreground_fraction(const Image& gt, const Vec3& background) {
    const std::array<int, 3> bg{static_cast<int>(std::lround(background.x * 255.0)),
                                static_cast<int>(std::lround(background.y * 255.0)),
                                static_cast<int>(std::lround(background.z * 255.0))};
    std::size_t fg = 0;
    for (std::size_t i = 0; i < gt.pixel_count(); ++i)
        for (int c = 0; c < gt.channels; ++c)
            if (gt.data[i * gt.channels + c] != bg[static_cast<std::size_t>(c % 3)]) {
                ++fg;
                break;
            }
    return static_cast<double>(fg) / static_cast<double>(gt.pixel_count());
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (const double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_opt(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    return os.str();
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::vector<RenderTuple> render_sweep(const SweepItem& item, const SweepConfig& cfg) {
    const auto offsets = sweep_offsets(cfg.offsets);
    std::vector<RenderTuple> out;
    out.reserve(offsets.size());
    for (const double off : offsets) {
        CameraRig rig = cfg.rig;
        rig.azimuth_offset = cfg.rig.azimuth_offset + off;
        out.push_back(render_tuple(item.mesh, item.mask, rig, cfg.render));
    }
    return out;
}

std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows, int offsets) {
    std::vector<SweepAggregate> out(static_cast<std::size_t>(offsets));
    for (int k = 0; k < offsets; ++k) {
        std::vector<double> cov, fg, pres, ss;
        for (const auto& r : rows) {
            if (r.offset_index != k) continue;
            cov.push_back(r.mean_coverage);
            fg.push_back(r.foreground_fraction);
            if (r.preservation) pres.push_back(*r.preservation);
            if (r.ssim_to_gt) ss.push_back(*r.ssim_to_gt);
        }
        auto& a = out[static_cast<std::size_t>(k)];
        a.offset_index = k;
        a.offset_deg = offset_degrees(k, offsets);
        a.count = static_cast<int>(cov.size());
        std::tie(a.coverage_mean, a.coverage_std) = mean_std(cov);
        std::tie(a.foreground_mean, a.foreground_std) = mean_std(fg);
        if (!pres.empty()) {
            const auto [m, s] = mean_std(pres);
            a.preservation_mean = m;
            a.preservation_std = s;
        }
        if (!ss.empty()) {
            const auto [m, s] = mean_std(ss);
            a.ssim_mean = m;
            a.ssim_std = s;
        }
    }
    return out;
}

EvalReport azimuth_sweep(const std::vector<SweepItem>& items, const SweepConfig& cfg) {
    const auto offsets = sweep_offsets(cfg.offsets);
    const std::size_t n_off = offsets.size();
    std::vector<SweepRow> rows(items.size() * n_off);
    std::vector<std::string> errors(rows.size());

    parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
        const auto& item = items[i / n_off];
        const int k = static_cast<int>(i % n_off);
        try {
            CameraRig rig = cfg.rig;
            rig.azimuth_offset = cfg.rig.azimuth_offset + offsets[static_cast<std::size_t>(k)];
            const auto tuple = render_tuple(item.mesh, item.mask, rig, cfg.render);

            SweepRow row;
            row.item = item.id;
            row.offset_index = k;
            row.offset_deg = offset_degrees(k, cfg.offsets);
            row.coverage = mask_coverage(tuple.mask.image);
            row.mean_coverage = (row.coverage[0] + row.coverage[1] + row.coverage[2] + row.coverage[3]) / 4.0;
            row.foreground_fraction = foreground_fraction(tuple.gt.image, cfg.render.shading.background);

            if (cfg.backend != nullptr) {
                BackendRequest req;
                req.masked_grid_png = encode_grid_png(tuple.masked);
                req.mask_grid_png = encode_grid_png(tuple.mask);
                req.prompt = item.prompt;
                req.seed = item.seed;
                req.steps = cfg.steps;
                req.guidance = cfg.guidance;
                const Image result = cfg.backend->inpaint(req);
                row.preservation = unmasked_preservation(tuple.masked.image, result, tuple.mask.image);
                row.ssim_to_gt = ssim(tuple.gt.image, result);
            }
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            errors[i] = item.id + " @ offset " + std::to_string(k) + ": " + e.what();
        }
    });

    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("sweep failed: " + e);

    EvalReport report;
    report.rows = std::move(rows);
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.item, a.offset_index) < std::tie(b.item, b.offset_index);
    });
    report.aggregates = aggregate_rows(report.rows, cfg.offsets);
    return report;
}

std::string EvalReport::to_json() const {
    json j;
    j["offsets_deg"] = json::array();
    for (const auto& a : aggregates) j["offsets_deg"].push_back(a.offset_deg);
    j["reserved_columns"] = kReservedMetricColumns;
    j["rows"] = json::array();
    for (const auto& r : rows) {
        json row{{"item", r.item},
                 {"offset_index", r.offset_index},
                 {"offset_deg", r.offset_deg},
                 {"coverage", r.coverage},
                 {"mean_coverage", r.mean_coverage},
                 {"foreground_fraction", r.foreground_fraction},
                 {"unmasked_preservation", opt(r.preservation)},
                 {"ssim_to_gt", opt(r.ssim_to_gt)}};
        for (const auto& c : kReservedMetricColumns) row[c] = nullptr;
        j["rows"].push_back(std::move(row));
    }
    j["aggregates"] = json::array();
    for (const auto& a : aggregates) {
        j["aggregates"].push_back(json{{"offset_index", a.offset_index},
                                       {"offset_deg", a.offset_deg},
                                       {"count", a.count},
                                       {"coverage_mean", a.coverage_mean},
                                       {"coverage_std", a.coverage_std},
                                       {"foreground_mean", a.foreground_mean},
                                       {"foreground_std", a.foreground_std},
                                       {"preservation_mean", opt(a.preservation_mean)},
                                       {"preservation_std", opt(a.preservation_std)},
                                       {"ssim_mean", opt(a.ssim_mean)},
                                       {"ssim_std", opt(a.ssim_std)}});
    }
    return j.dump(2);
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "item,offset_index,offset_deg,coverage_tl,coverage_tr,coverage_bl,coverage_br,mean_coverage,"
          "foreground_fraction,unmasked_preservation,ssim_to_gt";
    for (const auto& c : kReservedMetricColumns) os << ',' << c;
    os << '\n';
    for (const auto& r : rows) {
        os << csv_quote(r.item) << ',' << r.offset_index << ',' << r.offset_deg;
        for (const double c : r.coverage) os << ',' << c;
        os << ',' << r.mean_coverage << ',' << r.foreground_fraction << ',' << csv_opt(r.preservation) << ','
           << csv_opt(r.ssim_to_gt);
        for (std::size_t i = 0; i < kReservedMetricColumns.size(); ++i) os << ',';
        os << '\n';
    }
    return os.str();
}

}  // namespace mvedit
