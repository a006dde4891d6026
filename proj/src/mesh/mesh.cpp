#include "mvedit/mesh.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace mvedit {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_double(std::string_view tok, std::size_t line) {
    double v{};
    const auto* first = tok.data();
    // from_chars rejects a leading '+', which some exporters emit.
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ObjParseError(line, "invalid number '" + std::string(tok) + "'");
    return v;
}

long parse_index(std::string_view tok, std::size_t line) {
    long v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0)
        throw ObjParseError(line, "invalid index '" + std::string(tok) + "'");
    return v;
}

// Resolves a 1-based (or negative, relative) OBJ index against `count` entries.
std::uint32_t resolve_index(long idx, std::size_t count, std::size_t line) {
    const long resolved = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (resolved < 0 || static_cast<std::size_t>(resolved) >= count)
        throw ObjParseError(line, "index " + std::to_string(idx) + " out of range (" + std::to_string(count) +
                                      " available)");
    return static_cast<std::uint32_t>(resolved);
}

}  // namespace

Aabb TriangleMesh::bounds() const {
    Aabb box;
    for (const auto& v : vertices) box.expand(v);
    return box;
}

void TriangleMesh::validate() const {
    const auto n = vertices.size();
    for (std::size_t i = 0; i < faces.size(); ++i)
        for (const auto idx : faces[i])
            if (idx >= n)
                throw std::invalid_argument("face " + std::to_string(i) + " references vertex " +
                                            std::to_string(idx) + " of " + std::to_string(n));
    if (!colors.empty() && colors.size() != n) throw std::invalid_argument("color count does not match vertices");
    if (!uvs.empty() && uvs.size() != n) throw std::invalid_argument("uv count does not match vertices");
}

void TriangleMesh::append(const TriangleMesh& other) {
    const bool keep_colors = (vertices.empty() || has_colors()) && other.has_colors();
    const bool keep_uvs = (vertices.empty() || !uvs.empty()) && !other.uvs.empty();
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& f : other.faces) faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    if (keep_colors)
        colors.insert(colors.end(), other.colors.begin(), other.colors.end());
    else
        colors.clear();
    if (keep_uvs)
        uvs.insert(uvs.end(), other.uvs.begin(), other.uvs.end());
    else
        uvs.clear();
}

TriangleMesh parse_obj(std::string_view text) {
    TriangleMesh mesh;
    std::vector<Uv> texcoords;
    std::vector<std::optional<Uv>> vertex_uv;
    std::vector<Vec3> colors;
    bool any_color = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const auto hash = line.find('#');
        const auto toks = split_ws(hash == std::string_view::npos ? line : line.substr(0, hash));
        if (toks.empty()) continue;
        const auto& kw = toks[0];

        if (kw == "v") {
            if (toks.size() != 4 && toks.size() != 5 && toks.size() != 7)
                throw ObjParseError(line_no, "vertex needs 3 coordinates (optionally w or rgb)");
            mesh.vertices.push_back(
                {parse_double(toks[1], line_no), parse_double(toks[2], line_no), parse_double(toks[3], line_no)});
            if (toks.size() == 7) {
                colors.push_back(
                    {parse_double(toks[4], line_no), parse_double(toks[5], line_no), parse_double(toks[6], line_no)});
                any_color = true;
            } else {
                colors.push_back({1.0, 1.0, 1.0});
            }
            vertex_uv.emplace_back();
        } else if (kw == "vt") {
            if (toks.size() < 3) throw ObjParseError(line_no, "texture coordinate needs u v");
            texcoords.push_back({parse_double(toks[1], line_no), parse_double(toks[2], line_no)});
        } else if (kw == "f") {
            if (toks.size() < 4) throw ObjParseError(line_no, "face needs at least 3 vertices");
            std::vector<std::uint32_t> poly;
            poly.reserve(toks.size() - 1);
            for (std::size_t i = 1; i < toks.size(); ++i) {
                const auto tok = toks[i];
                const auto slash = tok.find('/');
                const auto vi = resolve_index(parse_index(tok.substr(0, slash), line_no), mesh.vertices.size(), line_no);
                if (slash != std::string_view::npos) {
                    const auto rest = tok.substr(slash + 1);
                    const auto slash2 = rest.find('/');
                    const auto vt = rest.substr(0, slash2);
                    if (!vt.empty()) {
                        const auto ti = resolve_index(parse_index(vt, line_no), texcoords.size(), line_no);
                        vertex_uv[vi] = texcoords[ti];
                    }
                }
                poly.push_back(vi);
            }
            for (std::size_t i = 1; i + 1 < poly.size(); ++i) mesh.faces.push_back({poly[0], poly[i], poly[i + 1]});
        }
        // vn, o, g, s, usemtl, mtllib and unknown statements are ignored.
    }

    if (mesh.faces.empty()) throw ObjParseError(0, "mesh has no faces");
    if (any_color) mesh.colors = std::move(colors);
    bool any_uv = false;
    for (const auto& uv : vertex_uv) any_uv = any_uv || uv.has_value();
    if (any_uv) {
        mesh.uvs.reserve(vertex_uv.size());
        for (const auto& uv : vertex_uv) mesh.uvs.push_back(uv.value_or(Uv{0.0, 0.0}));
    }
    return mesh;
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_obj(ss.str());
}

std::string write_obj(const TriangleMesh& mesh) {
    std::string out;
    char buf[160];
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto& v = mesh.vertices[i];
        if (mesh.has_colors()) {
            const auto& c = mesh.colors[i];
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g %.17g %.17g %.17g\n", v.x, v.y, v.z, c.x, c.y, c.z);
        } else {
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        }
        out += buf;
    }
    const bool with_uv = !mesh.uvs.empty();
    for (const auto& uv : mesh.uvs) {
        std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", uv[0], uv[1]);
        out += buf;
    }
    for (const auto& f : mesh.faces) {
        if (with_uv)
            std::snprintf(buf, sizeof buf, "f %u/%u %u/%u %u/%u\n", f[0] + 1, f[0] + 1, f[1] + 1, f[1] + 1, f[2] + 1,
                          f[2] + 1);
        else
            std::snprintf(buf, sizeof buf, "f %u %u %u\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out += buf;
    }
    return out;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << write_obj(mesh);
    if (!out) throw std::runtime_error("write failed for " + path);
}

NormalizedMesh normalize_mesh(const TriangleMesh& mesh, const NormalizeOptions& opts) {
    if (mesh.faces.empty()) throw GeometryError("cannot normalize a mesh without faces");
    if (!(opts.target_extent > 0.0)) throw std::invalid_argument("target extent must be positive");
    const Aabb box = mesh.bounds();
    const Vec3 ext = box.extent();
    const double longest = std::max({ext.x, ext.y, ext.z});
    if (!(longest > 0.0) || !std::isfinite(longest)) throw GeometryError("degenerate bounding box");

    NormalizedMesh out{mesh, {-box.center(), opts.target_extent / longest}};
    for (auto& v : out.mesh.vertices) v = out.transform.apply(v);
    return out;
}

std::vector<Vec3> face_midpoints(const TriangleMesh& mesh) {
    std::vector<Vec3> mids;
    mids.reserve(mesh.faces.size());
    for (const auto& f : mesh.faces) mids.push_back(face_midpoint(mesh, f));
    return mids;
}

double face_area(const TriangleMesh& mesh, const Face& f) {
    const Vec3& a = mesh.vertices[f[0]];
    return 0.5 * length(cross(mesh.vertices[f[1]] - a, mesh.vertices[f[2]] - a));
}

}  // namespace mvedit
