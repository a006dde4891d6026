// mvedit - command-line front end: masks, dataset forging, validation, edits,
// the HTTP service, a mock backend, and evaluation.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvedit/backend.hpp"
#include "mvedit/forge.hpp"
#include "mvedit/metrics.hpp"
#include "mvedit/parallel.hpp"
#include "mvedit/service.hpp"
#include "mvedit/session.hpp"
#include "mvedit/sweep.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mvedit;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

Image read_mask_png(const std::string& path) {
    const Image gray = read_png(path);
    if (gray.channels != 1) throw std::runtime_error(path + ": mask must be a grayscale PNG");
    return gray_to_binary(gray);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// --- mask -------------------------------------------------------------------

struct MaskArgs {
    std::string mesh;
    std::string type{"1"};
    std::uint64_t seed{0};
    std::string out;
    int res{512};
};

int run_mask(const MaskArgs& a) {
    const auto normalized = normalize_mesh(load_obj(a.mesh));
    Rng rng(a.seed);
    const MaskType type = mask_type_from_string(a.type);
    const MaskGeometry m = generate_mask(type, normalized.mesh, rng, a.res);

    json summary{{"type", std::string(to_string(type))}, {"seed", a.seed}, {"attempts", m.provenance.attempts}};
    if (const auto* hull = std::get_if<HullMask>(&m.shape)) {
        const std::string path = a.out.empty() ? "mask_hull.obj" : a.out;
        save_obj(hull->hull, path);
        summary["hull_vertices"] = hull->hull.num_vertices();
        summary["hull_faces"] = hull->hull.num_faces();
        summary["output"] = path;
    } else if (const auto* sel = std::get_if<FaceSelection>(&m.shape)) {
        std::ostringstream os;
        for (const auto f : sel->faces) os << f << '\n';
        const std::string path = a.out.empty() ? "mask_faces.txt" : a.out;
        write_file(path, os.str());
        summary["selected_faces"] = sel->faces.size();
        summary["total_faces"] = normalized.mesh.num_faces();
        summary["output"] = path;
    } else if (const auto* views = std::get_if<ViewMasks>(&m.shape)) {
        const fs::path dir = a.out.empty() ? fs::path("mask_views") : fs::path(a.out);
        fs::create_directories(dir);
        json files = json::array();
        for (int v = 0; v < 4; ++v) {
            const auto path = dir / ("view" + std::to_string(v) + ".png");
            write_png(binary_to_gray(views->views[static_cast<std::size_t>(v)]), path.string());
            files.push_back(path.string());
        }
        summary["output"] = files;
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// --- forge / validate ---------------------------------------------------------

struct ForgeArgs {
    std::string corpus, captions, out;
    std::uint64_t seed{0};
    int res{512};
    int workers{default_worker_count()};
    int per_type{kMasksPerType};
    bool allow_missing_captions{false};
};

int run_forge_cmd(const ForgeArgs& a) {
    ForgeConfig cfg;
    cfg.global_seed = a.seed;
    cfg.render.resolution = a.res;
    cfg.workers = a.workers;
    cfg.masks_per_type = a.per_type;
    cfg.strict_captions = !a.allow_missing_captions;

    const auto corpus = scan_corpus(a.corpus);
    const auto captions = a.captions.empty() ? std::map<std::string, std::string>{} : load_captions(a.captions);
    const auto tasks = plan_tasks(corpus, captions, cfg);
    std::cerr << "forging " << tasks.size() << " records from " << corpus.size() << " shapes with " << cfg.workers
              << " worker(s)\n";
    const auto result = run_forge(tasks, a.out, cfg);
    std::cout << json{{"manifest", (fs::path(a.out) / "manifest.jsonl").string()},
                      {"records", result.manifest.records.size()},
                      {"errors", result.manifest.errors.size()},
                      {"rendered", result.stats.rendered},
                      {"skipped", result.stats.skipped},
                      {"failed", result.stats.failed},
                      {"seconds", result.stats.seconds}}
                     .dump(2)
              << '\n';
    return result.stats.failed == 0 ? 0 : 1;
}

int run_validate(const std::string& manifest) {
    const auto report = validate_manifest(manifest);
    std::cout << report.to_json().dump(2) << '\n';
    return report.ok() ? 0 : 1;
}

// --- edit ---------------------------------------------------------------------

struct EditArgs {
    std::string mesh, mask, prompt, backend{"mock"}, out;
    std::uint64_t seed{0};
    int res{512};
    bool paste_back{false};
    int steps{kDefaultSamplerSteps};
    std::optional<double> guidance;
};

// mask.json: {"primitives": [...]} or {"generate": {"type": "type1", "seed": n}}.
int run_edit(const EditArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    auto backend = make_backend(a.backend);
    SessionConfig sc;
    sc.resolution = a.res;
    sc.paste_back = a.paste_back;
    sc.steps = a.steps;
    sc.guidance = a.guidance;
    SessionStore store(*backend, sc);

    const auto id = store.create_session(read_file(a.mesh));
    const json mj = json::parse(read_file(a.mask));
    if (mj.is_object() && mj.contains("generate")) {
        const auto& g = mj["generate"];
        const auto type = mask_type_from_string(g.at("type").get<std::string>());
        Rng rng(g.value("seed", std::uint64_t{0}));
        // Same normalization as the session, so the mask lands on the stored shape.
        const auto mesh = normalize_mesh(load_obj(a.mesh), sc.normalize).mesh;
        store.set_mask_geometry(id, generate_mask(type, mesh, rng, a.res));
    } else {
        store.set_mask(id, primitives_from_json(mj));
    }
    const auto r = store.inpaint(id, a.prompt, a.seed);

    json outputs = json::object();
    if (!a.out.empty()) {
        const fs::path dir = a.out;
        fs::create_directories(dir);
        const auto p = *store.previews(id);
        save_grid_png(p.conditioning, (dir / "masked.png").string());
        save_grid_png(p.mask, (dir / "mask.png").string());
        save_grid_png(p.preview, (dir / "preview.png").string());
        write_png(r.grid, (dir / "result.png").string());
        for (int v = 0; v < 4; ++v)
            write_png(r.views[static_cast<std::size_t>(v)], (dir / ("view" + std::to_string(v) + ".png")).string());
        write_file(dir / "poses.json", poses_to_json(r.poses));
        outputs = {{"dir", dir.string()}};
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << json{{"result_id", r.id},
                      {"backend", r.backend},
                      {"prompt", r.prompt},
                      {"seed", r.seed},
                      {"steps", r.steps},
                      {"paste_back", r.paste_back},
                      {"unmasked_preservation", opt_json(r.unmasked_preservation)},
                      {"grid", {r.grid.width, r.grid.height}},
                      {"timing_s", {{"backend", r.timing.backend_ms / 1000.0}, {"total", total}}},
                      {"outputs", outputs}}
                     .dump(2)
              << '\n';
    return 0;
}

// --- serve / mock-backend -----------------------------------------------------

struct ServeArgs {
    std::string host{"127.0.0.1"};
    int port{8080};
    std::string backend;
    std::string static_dir;
    std::string persist;
    int res{512};
};

int run_serve(const ServeArgs& a) {
    auto backend = make_backend(a.backend);
    SessionConfig sc;
    sc.resolution = a.res;
    if (!a.persist.empty()) sc.persist_dir = a.persist;
    SessionStore store(*backend, sc);
    if (sc.persist_dir) std::cerr << "restored " << store.load_persisted() << " session(s)\n";
    EditService service(store, a.static_dir.empty() ? std::nullopt : std::optional<fs::path>(a.static_dir));
    std::cerr << "serving on http://" << a.host << ":" << a.port << " (backend: " << backend->name() << ")\n";
    service.listen(a.host, a.port);
    return 0;
}

int run_mock_backend(const std::string& host, int port) {
    MockBackend backend;
    BackendServer server(backend);
    std::cerr << "mock backend on http://" << host << ":" << port << "/inpaint\n";
    server.listen(host, port);
    return 0;
}

// --- eval -----------------------------------------------------------------------

struct SweepArgs {
    std::vector<std::string> meshes;
    std::string corpus;
    std::string type{"1"};
    std::uint64_t seed{0};
    int res{256};
    int offsets{kSweepOffsets};
    std::string backend;
    std::string prompt;
    std::string out;
    int workers{default_worker_count()};
};

int run_sweep(const SweepArgs& a) {
    std::vector<ShapeEntry> shapes;
    if (!a.corpus.empty()) shapes = scan_corpus(a.corpus);
    for (const auto& m : a.meshes) shapes.push_back({fs::path(m).stem().string(), m});
    if (shapes.empty()) throw std::runtime_error("sweep needs --mesh or --corpus");

    const MaskType type = mask_type_from_string(a.type);
    std::vector<SweepItem> items;
    for (const auto& s : shapes) {
        SweepItem item;
        item.id = s.id;
        item.mesh = normalize_mesh(load_obj(s.path.string())).mesh;
        item.seed = task_seed(a.seed, s.id, 0);
        Rng rng(item.seed);
        item.mask = generate_mask(type, item.mesh, rng, a.res);
        item.prompt = a.prompt;
        items.push_back(std::move(item));
    }

    std::unique_ptr<InpaintBackend> backend;
    if (!a.backend.empty()) backend = make_backend(a.backend);
    SweepConfig cfg;
    cfg.offsets = a.offsets;
    cfg.render.resolution = a.res;
    cfg.backend = backend.get();
    cfg.workers = a.workers;
    const auto report = azimuth_sweep(items, cfg);
    if (a.out.empty()) {
        std::cout << report.to_json() << '\n';
    } else {
        write_file(a.out + ".json", report.to_json());
        write_file(a.out + ".csv", report.to_csv());
        std::cout << json{{"json", a.out + ".json"}, {"csv", a.out + ".csv"}, {"rows", report.rows.size()}}.dump(2)
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiview mask synthesis, dataset forging and inpainting edits"};
    app.require_subcommand(1);
    int exit_code = 0;

    MaskArgs mask_args;
    auto* mask = app.add_subcommand("mask", "Sample a 3D mask for a mesh");
    mask->add_option("mesh", mask_args.mesh, "Input OBJ")->required()->check(CLI::ExistingFile);
    mask->add_option("--type", mask_args.type, "1, 2, 3 or random2d")
        ->check(CLI::IsMember({"1", "2", "3", "type1", "type2", "type3", "random2d"}));
    mask->add_option("--seed", mask_args.seed);
    mask->add_option("--out", mask_args.out, "OBJ (type 1), face list (types 2/3) or directory (random2d)");
    mask->add_option("--res", mask_args.res, "View resolution for random2d")->check(CLI::Range(16, 8192));
    mask->callback([&] { exit_code = run_mask(mask_args); });

    ForgeArgs forge_args;
    auto* forge = app.add_subcommand("forge", "Render the training dataset for a corpus");
    forge->add_option("--corpus", forge_args.corpus, "Directory of OBJ shapes")->required()->check(CLI::ExistingDirectory);
    forge->add_option("--captions", forge_args.captions, "TSV or JSON captions")->check(CLI::ExistingFile);
    forge->add_option("--out", forge_args.out, "Output directory")->required();
    forge->add_option("--seed", forge_args.seed, "Global seed");
    forge->add_option("--res", forge_args.res, "Per-view resolution")->check(CLI::Range(16, 8192));
    forge->add_option("--workers", forge_args.workers)->check(CLI::PositiveNumber);
    forge->add_option("--masks-per-type", forge_args.per_type)->check(CLI::PositiveNumber);
    forge->add_flag("--allow-missing-captions", forge_args.allow_missing_captions);
    forge->callback([&] { exit_code = run_forge_cmd(forge_args); });

    std::string manifest;
    auto* validate = app.add_subcommand("validate", "Check a forged dataset");
    validate->add_option("manifest", manifest, "manifest.jsonl")->required();
    validate->callback([&] { exit_code = run_validate(manifest); });

    EditArgs edit_args;
    auto* edit = app.add_subcommand("edit", "Run one inpainting edit");
    edit->add_option("--mesh", edit_args.mesh)->required()->check(CLI::ExistingFile);
    edit->add_option("--mask", edit_args.mask, "Mask JSON")->required()->check(CLI::ExistingFile);
    edit->add_option("--prompt", edit_args.prompt)->required();
    edit->add_option("--seed", edit_args.seed);
    edit->add_option("--backend", edit_args.backend, "mock or http://host:port/path");
    edit->add_option("--out", edit_args.out, "Directory for grids and views");
    edit->add_option("--res", edit_args.res)->check(CLI::Range(16, 8192));
    edit->add_option("--steps", edit_args.steps)->check(CLI::PositiveNumber);
    edit->add_option("--guidance", edit_args.guidance);
    edit->add_flag("--paste-back", edit_args.paste_back, "Copy input pixels back outside the mask");
    edit->callback([&] { exit_code = run_edit(edit_args); });

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "HTTP edit service");
    serve->add_option("--host", serve_args.host);
    serve->add_option("--port", serve_args.port);
    serve->add_option("--backend", serve_args.backend, "mock or URL (default: MVEDIT_BACKEND_URL, else mock)");
    serve->add_option("--static", serve_args.static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
    serve->add_option("--persist", serve_args.persist, "Session persistence directory");
    serve->add_option("--res", serve_args.res)->check(CLI::Range(16, 8192));
    serve->callback([&] { exit_code = run_serve(serve_args); });

    std::string mock_host = "127.0.0.1";
    int mock_port = 8090;
    auto* mock = app.add_subcommand("mock-backend", "Serve the mock inpainting backend over HTTP");
    mock->add_option("--host", mock_host);
    mock->add_option("--port", mock_port);
    mock->callback([&] { exit_code = run_mock_backend(mock_host, mock_port); });

    auto* eval = app.add_subcommand("eval", "Metrics");
    eval->require_subcommand(1);

    std::string img_a, img_b, img_c;
    auto* ssim_cmd = eval->add_subcommand("ssim", "SSIM between two images");
    ssim_cmd->add_option("a", img_a)->required()->check(CLI::ExistingFile);
    ssim_cmd->add_option("b", img_b)->required()->check(CLI::ExistingFile);
    ssim_cmd->callback([&] {
        std::cout << json{{"ssim", ssim(read_png(img_a), read_png(img_b))}}.dump() << '\n';
    });

    auto* preserve = eval->add_subcommand("preserve", "Unmasked-region preservation");
    preserve->add_option("input", img_a)->required()->check(CLI::ExistingFile);
    preserve->add_option("output", img_b)->required()->check(CLI::ExistingFile);
    preserve->add_option("mask", img_c)->required()->check(CLI::ExistingFile);
    preserve->callback([&] {
        const auto v = unmasked_preservation(read_png(img_a), read_png(img_b), read_mask_png(img_c));
        std::cout << json{{"unmasked_preservation", opt_json(v)}}.dump() << '\n';
    });

    auto* coverage = eval->add_subcommand("coverage", "Per-quadrant mask coverage");
    coverage->add_option("mask", img_a)->required()->check(CLI::ExistingFile);
    coverage->callback([&] { std::cout << json{{"coverage", mask_coverage(read_mask_png(img_a))}}.dump() << '\n'; });

    SweepArgs sweep_args;
    auto* sweep = eval->add_subcommand("sweep", "Azimuth-offset sweep");
    sweep->add_option("--mesh", sweep_args.meshes)->check(CLI::ExistingFile);
    sweep->add_option("--corpus", sweep_args.corpus)->check(CLI::ExistingDirectory);
    sweep->add_option("--mask-type", sweep_args.type)
        ->check(CLI::IsMember({"1", "2", "3", "type1", "type2", "type3", "random2d"}));
    sweep->add_option("--seed", sweep_args.seed);
    sweep->add_option("--res", sweep_args.res)->check(CLI::Range(16, 8192));
    sweep->add_option("--offsets", sweep_args.offsets)->check(CLI::PositiveNumber);
    sweep->add_option("--backend", sweep_args.backend, "Optional: mock or URL");
    sweep->add_option("--prompt", sweep_args.prompt);
    sweep->add_option("--out", sweep_args.out, "Report prefix (writes .json and .csv)");
    sweep->add_option("--workers", sweep_args.workers)->check(CLI::PositiveNumber);
    sweep->callback([&] { exit_code = run_sweep(sweep_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ObjParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_code;
}
