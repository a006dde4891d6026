#include "mvedit/session.hpp"

#include <sodium.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "mvedit/metrics.hpp"

namespace mvedit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Vec3 vec3_from(const json& j, const char* field) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(field) + " must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string new_id() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    std::array<unsigned char, 8> raw{};
    randombytes_buf(raw.data(), raw.size());
    std::array<char, 17> hex{};
    sodium_bin2hex(hex.data(), hex.size(), raw.data(), raw.size());
    return std::string(hex.data(), 16);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Primitive primitive_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("primitive must be an object");
    Primitive p;
    p.kind = primitive_kind_from_string(j.at("kind").get<std::string>());
    p.center = vec3_from(j.at("center"), "center");
    p.size = vec3_from(j.at("size"), "size");
    if (j.contains("rotation")) {
        const auto& r = j["rotation"];
        if (!r.is_array() || r.size() != 4) throw std::invalid_argument("rotation must be [w, x, y, z]");
        p.rotation = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    }
    return p;
}

json primitive_to_json(const Primitive& p) {
    return json{{"kind", std::string(to_string(p.kind))},
                {"center", {p.center.x, p.center.y, p.center.z}},
                {"size", {p.size.x, p.size.y, p.size.z}},
                {"rotation", {p.rotation.w, p.rotation.x, p.rotation.y, p.rotation.z}}};
}

std::vector<Primitive> primitives_from_json(const json& j) {
    const json& list = j.is_object() ? j.at("primitives") : j;
    if (!list.is_array()) throw std::invalid_argument("primitives must be an array");
    std::vector<Primitive> out;
    for (const auto& p : list) out.push_back(primitive_from_json(p));
    return out;
}

json SessionInfo::to_json() const {
    json prims = json::array();
    for (const auto& p : primitives) prims.push_back(primitive_to_json(p));
    return json{{"id", id},
                {"vertices", vertices},
                {"faces", faces},
                {"has_mask", has_mask},
                {"mask_type", std::string(to_string(mask_type))},
                {"primitives", prims},
                {"normalize", {{"translation", {transform.translation.x, transform.translation.y,
                                                transform.translation.z}},
                               {"scale", transform.scale}}},
                {"prompt", prompt},
                {"result_id", result_id ? json(*result_id) : json(nullptr)},
                {"busy", busy}};
}

struct SessionStore::Session {
    std::string id;
    mutable std::mutex mu;
    TriangleMesh mesh;
    NormalizeTransform transform;
    MaskGeometry mask;
    std::optional<Previews> previews;
    std::string prompt;
    std::optional<EditResult> result;
    int results{0};
    bool busy{false};
};

SessionStore::SessionStore(InpaintBackend& backend, SessionConfig cfg) : backend_(backend), cfg_(std::move(cfg)) {
    if (cfg_.resolution < 16) throw std::invalid_argument("session resolution must be at least 16");
}

SessionStore::~SessionStore() = default;

std::string SessionStore::register_session(std::shared_ptr<Session> s, std::string id) {
    std::lock_guard lock(mu_);
    if (id.empty())
        do id = new_id();
        while (sessions_.count(id));
    s->id = id;
    sessions_[id] = std::move(s);
    return id;
}

std::string SessionStore::create_session(std::string_view obj_text) {
    auto s = std::make_shared<Session>();
    auto normalized = normalize_mesh(parse_obj(obj_text), cfg_.normalize);
    s->mesh = std::move(normalized.mesh);
    s->transform = normalized.transform;
    const auto id = register_session(s);
    std::lock_guard lock(s->mu);
    persist(*s);
    return id;
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::vector<std::string> SessionStore::ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(SessionError::Code::NotFound, "unknown session '" + id + "'");
    return it->second;
}

SessionInfo SessionStore::info(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    SessionInfo out;
    out.id = s->id;
    out.vertices = s->mesh.num_vertices();
    out.faces = s->mesh.num_faces();
    out.has_mask = !s->mask.empty();
    out.mask_type = s->mask.type;
    if (const auto* set = std::get_if<PrimitiveSet>(&s->mask.shape)) out.primitives = set->primitives;
    out.transform = s->transform;
    out.prompt = s->prompt;
    if (s->result) out.result_id = s->result->id;
    out.busy = s->busy;
    return out;
}

Previews SessionStore::render(const Session& s, const MaskGeometry& mask) const {
    RenderConfig rc;
    rc.resolution = cfg_.resolution;
    rc.fill = FillMode::White;
    rc.shading = cfg_.shading;
    auto tuple = render_tuple(s.mesh, mask, cfg_.rig, rc);
    Previews p;
    p.preview = tuple.masked;
    p.preview.image = composite_fill(tuple.gt.image, tuple.mask.image, fill_color(FillMode::Purple));
    p.gt = std::move(tuple.gt);
    p.conditioning = std::move(tuple.masked);
    p.mask = std::move(tuple.mask);
    return p;
}

Previews SessionStore::set_mask(const std::string& id, std::span<const Primitive> primitives) {
    MaskGeometry mask;
    try {
        mask = primitives_to_mask(primitives, cfg_.tessellation);
    } catch (const std::invalid_argument& e) {
        throw SessionError(SessionError::Code::Invalid, e.what());
    }
    return set_mask_geometry(id, std::move(mask));
}

Previews SessionStore::set_mask_geometry(const std::string& id, MaskGeometry mask) {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    if (s->busy) throw SessionError(SessionError::Code::Busy, "session '" + id + "' has an inpaint in flight");
    Previews p;
    try {
        p = render(*s, mask);
    } catch (const std::invalid_argument& e) {
        throw SessionError(SessionError::Code::Invalid, e.what());
    }
    s->mask = std::move(mask);
    s->previews = p;
    persist(*s);
    return p;
}

std::optional<Previews> SessionStore::previews(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    return s->previews;
}

std::optional<EditResult> SessionStore::result(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    return s->result;
}

EditResult SessionStore::inpaint(const std::string& id, const std::string& prompt, std::uint64_t seed,
                                 std::optional<bool> paste_back) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = find(id);

    BackendRequest req;
    Previews cond;
    {
        std::lock_guard lock(s->mu);
        if (s->busy) throw SessionError(SessionError::Code::Busy, "session '" + id + "' has an inpaint in flight");
        if (s->mask.empty() || !s->previews)
            throw SessionError(SessionError::Code::NoMask, "session '" + id + "' has no mask");
        cond = *s->previews;
        s->busy = true;
    }
    req.masked_grid_png = encode_grid_png(cond.conditioning);
    req.mask_grid_png = encode_grid_png(cond.mask);
    req.prompt = prompt;
    req.seed = seed;
    req.steps = cfg_.steps;
    req.guidance = cfg_.guidance;

    Image grid;
    const auto tb = std::chrono::steady_clock::now();
    try {
        grid = backend_.inpaint(req);
    } catch (const std::exception& e) {
        std::lock_guard lock(s->mu);
        s->busy = false;
        const auto* be = dynamic_cast<const BackendError*>(&e);
        throw SessionError(SessionError::Code::Backend,
                           std::string("backend failed: ") + e.what() +
                               (be ? " (attempts: " + std::to_string(be->attempts()) + ")" : ""));
    }
    const double backend_ms = ms_since(tb);

    const Image& input = cond.conditioning.image;
    if (grid.width != input.width || grid.height != input.height || grid.channels != 3) {
        std::lock_guard lock(s->mu);
        s->busy = false;
        throw SessionError(SessionError::Code::Backend, "backend returned a grid of the wrong shape");
    }

    EditResult r;
    r.paste_back = paste_back.value_or(cfg_.paste_back);
    if (r.paste_back)
        for (std::size_t i = 0; i < cond.mask.image.data.size(); ++i)
            if (!cond.mask.image.data[i])
                for (int c = 0; c < 3; ++c) grid.data[i * 3 + c] = input.data[i * 3 + c];
    r.unmasked_preservation = unmasked_preservation(input, grid, cond.mask.image);
    r.views = split_image(grid);
    r.grid = std::move(grid);
    r.poses = cond.conditioning.poses;
    r.prompt = prompt;
    r.seed = seed;
    r.steps = req.steps;
    r.backend = backend_.name();
    r.timing.backend_ms = backend_ms;

    std::lock_guard lock(s->mu);
    s->busy = false;
    r.id = s->id + "-" + std::to_string(++s->results);
    r.timing.total_ms = ms_since(t0);
    s->prompt = prompt;
    s->result = r;
    persist(*s);
    return r;
}

void SessionStore::persist(const Session& s) const {
    if (!cfg_.persist_dir) return;
    const fs::path dir = *cfg_.persist_dir / s.id;
    fs::create_directories(dir);
    save_obj(s.mesh, (dir / "mesh.obj").string());

    json j{{"id", s.id},
           {"normalize",
            {{"translation", {s.transform.translation.x, s.transform.translation.y, s.transform.translation.z}},
             {"scale", s.transform.scale}}},
           {"prompt", s.prompt},
           {"mask_type", std::string(to_string(s.mask.type))},
           {"results", s.results}};
    if (const auto* set = std::get_if<PrimitiveSet>(&s.mask.shape)) {
        j["primitives"] = json::array();
        for (const auto& p : set->primitives) j["primitives"].push_back(primitive_to_json(p));
    }
    if (s.result) {
        const auto& r = *s.result;
        j["result"] = {{"id", r.id},
                       {"prompt", r.prompt},
                       {"seed", r.seed},
                       {"steps", r.steps},
                       {"paste_back", r.paste_back},
                       {"backend", r.backend},
                       {"unmasked_preservation",
                        r.unmasked_preservation ? json(*r.unmasked_preservation) : json(nullptr)}};
        write_png(r.grid, (dir / "result.png").string());
    }
    std::ofstream(dir / "session.json") << j.dump(2);
}

std::size_t SessionStore::load_persisted() {
    if (!cfg_.persist_dir || !fs::is_directory(*cfg_.persist_dir)) return 0;
    std::size_t loaded = 0;
    for (const auto& e : fs::directory_iterator(*cfg_.persist_dir)) {
        const fs::path dir = e.path();
        if (!fs::is_regular_file(dir / "session.json") || !fs::is_regular_file(dir / "mesh.obj")) continue;
        const json j = json::parse(read_text(dir / "session.json"));
        auto s = std::make_shared<Session>();
        s->mesh = parse_obj(read_text(dir / "mesh.obj"));
        const auto& t = j.at("normalize").at("translation");
        s->transform = {{t[0].get<double>(), t[1].get<double>(), t[2].get<double>()},
                        j.at("normalize").at("scale").get<double>()};
        s->prompt = j.value("prompt", std::string{});
        s->results = j.value("results", 0);
        if (j.contains("primitives")) {
            const auto prims = primitives_from_json(j["primitives"]);
            s->mask = primitives_to_mask(prims, cfg_.tessellation);
            s->previews = render(*s, s->mask);
        }
        if (j.contains("result") && fs::is_regular_file(dir / "result.png") && s->previews) {
            const auto& rj = j["result"];
            EditResult r;
            r.id = rj.at("id").get<std::string>();
            r.grid = read_png((dir / "result.png").string());
            r.views = split_image(r.grid);
            r.poses = s->previews->conditioning.poses;
            r.prompt = rj.value("prompt", std::string{});
            r.seed = rj.value("seed", std::uint64_t{0});
            r.steps = rj.value("steps", kDefaultSamplerSteps);
            r.paste_back = rj.value("paste_back", false);
            r.backend = rj.value("backend", std::string{});
            if (!rj["unmasked_preservation"].is_null())
                r.unmasked_preservation = rj["unmasked_preservation"].get<double>();
            s->result = std::move(r);
        }
        register_session(std::move(s), j.at("id").get<std::string>());
        ++loaded;
    }
    return loaded;
}

}  // namespace mvedit
