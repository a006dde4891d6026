#include "mvedit/forge.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>

#include "check.hpp"
#include "mvedit/parallel.hpp"

namespace mvedit {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<ShapeEntry> scan_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ForgeError("corpus directory not found: " + dir.string());
    std::vector<ShapeEntry> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext != ".obj") continue;
        out.push_back({e.path().stem().string(), e.path()});
    }
    std::sort(out.begin(), out.end(), [](const ShapeEntry& a, const ShapeEntry& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].id == out[i - 1].id) throw ForgeError("duplicate shape id in corpus: " + out[i].id);
    return out;
}

std::map<std::string, std::string> load_captions(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ForgeError("cannot read captions file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::map<std::string, std::string> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const json j = json::parse(text);
        for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ForgeError(path.string() + ":" + std::to_string(lineno) + ": expected <shape-id>TAB<caption>");
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

std::uint64_t task_seed(std::uint64_t global_seed, std::string_view shape_id, int mask_index) {
    const std::uint64_t h = mix64(mix64(global_seed) ^ fnv1a64(shape_id));
    return mix64(h ^ static_cast<std::uint64_t>(mask_index));
}

MaskType mask_type_for_index(int mask_index, int masks_per_type) {
    if (mask_index < 0 || mask_index >= 3 * masks_per_type) throw std::out_of_range("mask index out of range");
    switch (mask_index / masks_per_type) {
        case 0: return MaskType::TypeI;
        case 1: return MaskType::TypeII;
        default: return MaskType::TypeIII;
    }
}

std::vector<ForgeTask> plan_tasks(const std::vector<ShapeEntry>& corpus,
                                  const std::map<std::string, std::string>& captions, const ForgeConfig& cfg) {
    if (cfg.masks_per_type <= 0) throw ForgeError("masks_per_type must be positive");
    std::vector<ForgeTask> tasks;
    tasks.reserve(expected_record_count(corpus.size(), cfg.masks_per_type));
    for (const auto& shape : corpus) {
        if (shape.id.empty() || shape.id == "." || shape.id == ".." ||
            shape.id.find_first_of("/\\") != std::string::npos)
            throw ForgeError("shape id is not a valid directory name: '" + shape.id + "'");
        std::string caption;
        if (const auto it = captions.find(shape.id); it != captions.end()) {
            caption = it->second;
        } else if (cfg.strict_captions) {
            throw ForgeError("no caption for shape '" + shape.id + "'");
        }
        for (int i = 0; i < 3 * cfg.masks_per_type; ++i)
            tasks.push_back({shape.id, shape.path, i, mask_type_for_index(i, cfg.masks_per_type),
                             task_seed(cfg.global_seed, shape.id, i), caption});
    }
    return tasks;
}

json record_to_json(const DatasetRecord& r) {
    return json{{"kind", "record"},
                {"shape_id", r.shape_id},
                {"mask_index", r.mask_index},
                {"mask_type", std::string(to_string(r.type))},
                {"caption", r.caption},
                {"task_seed", r.seed},
                {"gt", r.gt},
                {"masked", r.masked},
                {"mask", r.mask},
                {"poses", r.poses}};
}

DatasetRecord record_from_json(const json& j) {
    DatasetRecord r;
    r.shape_id = j.at("shape_id").get<std::string>();
    r.mask_index = j.at("mask_index").get<int>();
    r.type = mask_type_from_string(j.at("mask_type").get<std::string>());
    r.caption = j.value("caption", std::string{});
    r.seed = j.at("task_seed").get<std::uint64_t>();
    r.gt = j.at("gt").get<std::string>();
    r.masked = j.at("masked").get<std::string>();
    r.mask = j.at("mask").get<std::string>();
    r.poses = j.at("poses").get<std::string>();
    return r;
}

namespace {

json failure_to_json(const ForgeFailure& f) {
    return json{{"kind", "error"},
                {"shape_id", f.shape_id},
                {"mask_index", f.mask_index},
                {"mask_type", std::string(to_string(f.type))},
                {"task_seed", f.seed},
                {"message", f.message}};
}

json make_header(const ForgeConfig& cfg, std::size_t shapes) {
    return json{{"kind", "header"},
                {"format", kManifestFormat},
                {"tool_version", kToolVersion},
                {"global_seed", cfg.global_seed},
                {"resolution", cfg.render.resolution},
                {"rig",
                 {{"azimuth_offset", cfg.rig.azimuth_offset},
                  {"elevation", cfg.rig.elevation},
                  {"distance", cfg.rig.distance},
                  {"fov", cfg.rig.fov}}},
                {"masks_per_type", cfg.masks_per_type},
                {"fill", cfg.render.fill == FillMode::White ? "white" : "purple"},
                {"normalize_extent", cfg.normalize.target_extent},
                {"shapes", shapes}};
}

DatasetRecord record_for(const ForgeTask& t) {
    const std::string dir = t.shape_id + "/" + std::to_string(t.mask_index) + "/";
    return {t.shape_id, t.mask_index, t.type, t.caption, t.seed,
            dir + "gt.png", dir + "masked.png", dir + "mask.png", dir + "poses.json"};
}

void write_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// Normalized meshes shared by the tasks of one shape, dropped after the last one.
class MeshCache {
public:
    MeshCache(const std::vector<ForgeTask>& tasks, const NormalizeOptions& opts) : opts_(opts) {
        for (const auto& t : tasks) {
            auto& e = entries_[t.shape_id];
            e.path = t.mesh_path;
            ++e.remaining;
        }
    }

    std::shared_ptr<const TriangleMesh> acquire(const std::string& id) {
        auto& e = entries_.at(id);
        std::call_once(e.once, [&] {
            try {
                e.mesh = std::make_shared<const TriangleMesh>(normalize_mesh(load_obj(e.path.string()), opts_).mesh);
            } catch (...) {
                e.error = std::current_exception();
            }
        });
        if (e.error) std::rethrow_exception(e.error);
        std::lock_guard lock(mu_);
        return e.mesh;
    }

    void release(const std::string& id) {
        auto& e = entries_.at(id);
        std::lock_guard lock(mu_);
        if (--e.remaining == 0) e.mesh.reset();
    }

private:
    struct Entry {
        fs::path path;
        std::once_flag once;
        std::shared_ptr<const TriangleMesh> mesh;
        std::exception_ptr error;
        int remaining{0};
    };
    NormalizeOptions opts_;
    std::map<std::string, Entry> entries_;
    std::mutex mu_;
};

}  // namespace

ForgeResult run_forge(const std::vector<ForgeTask>& tasks, const fs::path& out_dir, const ForgeConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    std::size_t shapes = 0;
    {
        std::vector<std::string> ids;
        for (const auto& t : tasks) ids.push_back(t.shape_id);
        std::sort(ids.begin(), ids.end());
        shapes = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    }

    ForgeManifest manifest;
    manifest.header = make_header(cfg, shapes);

    // Resuming on top of a dataset forged with other settings would mix outputs.
    if (const auto existing = out_dir / "manifest.jsonl"; fs::exists(existing)) {
        json old = read_manifest(existing).header, now = manifest.header;
        old.erase("shapes");
        now.erase("shapes");
        if (old != now) throw ForgeError(out_dir.string() + " holds a dataset forged with different settings");
    }

    const fs::path journal_path = out_dir / "manifest.jsonl.partial";
    std::ofstream journal(journal_path, std::ios::binary | std::ios::trunc);
    if (!journal) throw ForgeError("cannot open manifest journal " + journal_path.string());
    journal << manifest.header.dump() << '\n' << std::flush;
    std::mutex journal_mu;

    const detail::RecordExpectations expect{cfg.render.resolution, cfg.rig.poses()};
    const std::string poses_json = poses_to_json(cfg.rig.poses());

    enum class Outcome { Pending, Rendered, Skipped, Failed };
    std::vector<Outcome> outcome(tasks.size(), Outcome::Pending);
    std::vector<ForgeFailure> failures(tasks.size());
    MeshCache cache(tasks, cfg.normalize);

    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        const ForgeTask& task = tasks[i];
        const DatasetRecord record = record_for(task);
        std::string line;
        try {
            if (detail::check_record_files(out_dir, record, expect).empty()) {
                outcome[i] = Outcome::Skipped;
            } else {
                const auto mesh = cache.acquire(task.shape_id);
                Rng rng(task.seed);
                const MaskGeometry mask = generate_mask(task.type, *mesh, rng, cfg.render.resolution, cfg.masks);
                const RenderTuple tuple = render_tuple(*mesh, mask, cfg.rig, cfg.render);

                const fs::path dir = out_dir / task.shape_id / std::to_string(task.mask_index);
                fs::create_directories(dir);
                write_atomic(out_dir / record.gt, encode_grid_png(tuple.gt));
                write_atomic(out_dir / record.masked, encode_grid_png(tuple.masked));
                write_atomic(out_dir / record.mask, encode_grid_png(tuple.mask));
                write_atomic(out_dir / record.poses, poses_json);
                outcome[i] = Outcome::Rendered;
            }
            line = record_to_json(record).dump();
        } catch (const std::exception& e) {
            failures[i] = {task.shape_id, task.mask_index, task.type, task.seed, e.what()};
            outcome[i] = Outcome::Failed;
            line = failure_to_json(failures[i]).dump();
        }
        cache.release(task.shape_id);
        std::lock_guard lock(journal_mu);
        journal << line << '\n' << std::flush;
    });
    journal.close();

    ForgeResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        switch (outcome[i]) {
            case Outcome::Rendered: ++result.stats.rendered; break;
            case Outcome::Skipped: ++result.stats.skipped; break;
            default: ++result.stats.failed; break;
        }
        if (outcome[i] == Outcome::Failed)
            manifest.errors.push_back(failures[i]);
        else
            manifest.records.push_back(record_for(tasks[i]));
    }
    std::sort(manifest.records.begin(), manifest.records.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
        return std::tie(a.shape_id, a.mask_index) < std::tie(b.shape_id, b.mask_index);
    });
    std::sort(manifest.errors.begin(), manifest.errors.end(), [](const ForgeFailure& a, const ForgeFailure& b) {
        return std::tie(a.shape_id, a.mask_index) < std::tie(b.shape_id, b.mask_index);
    });

    try {
        write_atomic(out_dir / "manifest.jsonl", manifest_to_jsonl(manifest));
    } catch (const std::exception& e) {
        throw ForgeError(std::string("manifest write failed: ") + e.what());
    }
    fs::remove(journal_path);

    result.manifest = std::move(manifest);
    result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string manifest_to_jsonl(const ForgeManifest& manifest) {
    std::string out = manifest.header.dump() + "\n";
    for (const auto& r : manifest.records) out += record_to_json(r).dump() + "\n";
    for (const auto& f : manifest.errors) out += failure_to_json(f).dump() + "\n";
    return out;
}

ForgeManifest read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ForgeError("cannot read manifest: " + path.string());
    ForgeManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "header") {
                m.header = j;
            } else if (kind == "record") {
                m.records.push_back(record_from_json(j));
            } else if (kind == "error") {
                m.errors.push_back({j.at("shape_id").get<std::string>(), j.at("mask_index").get<int>(),
                                    mask_type_from_string(j.at("mask_type").get<std::string>()),
                                    j.at("task_seed").get<std::uint64_t>(), j.value("message", std::string{})});
            } else {
                throw ForgeError("unknown line kind '" + kind + "'");
            }
        } catch (const std::exception& e) {
            throw ForgeError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (m.header.is_null()) throw ForgeError(path.string() + ": missing header line");
    return m;
}

}  // namespace mvedit
