// session.hpp - interactive edit sessions.
//
// A session holds one normalized shape and its current mask. Every mask change
// re-renders the conditioning triple (white fill, the same path the forge uses)
// plus a purple-filled preview. Inpainting sends the cached conditioning grids
// to the backend; the backend call runs outside the session lock, and a failed
// call leaves the session untouched.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mvedit/backend.hpp"
#include "mvedit/multiview.hpp"

namespace mvedit {

// {"kind": "ellipsoid"|"box"|"cylinder", "center": [x,y,z], "size": [a,b,c], "rotation": [w,x,y,z]}
// in normalized shape coordinates; rotation is optional.
Primitive primitive_from_json(const nlohmann::json& j);
nlohmann::json primitive_to_json(const Primitive& p);
// Accepts {"primitives": [...]} or a bare array.
std::vector<Primitive> primitives_from_json(const nlohmann::json& j);

struct SessionConfig {
    CameraRig rig;
    int resolution{512};
    ShadingOptions shading;
    TessellationOptions tessellation;
    NormalizeOptions normalize;
    int steps{kDefaultSamplerSteps};
    std::optional<double> guidance;
    bool paste_back{false};  // copy conditioning pixels back where mask == 0
    std::optional<std::filesystem::path> persist_dir;
};

struct Previews {
    MultiviewGrid gt;
    MultiviewGrid conditioning;  // white fill; what the backend receives
    MultiviewGrid preview;       // purple fill; for display
    MultiviewGrid mask;
};

struct EditTiming {
    double backend_ms{};
    double total_ms{};
};

struct EditResult {
    std::string id;
    Image grid;
    std::array<Image, 4> views;
    std::array<CameraPose, 4> poses;
    std::optional<double> unmasked_preservation;  // against the conditioning grid
    std::string prompt;
    std::uint64_t seed{};
    int steps{};
    bool paste_back{};
    std::string backend;
    EditTiming timing;
};

class SessionError : public std::runtime_error {
public:
    enum class Code { NotFound, Busy, NoMask, Invalid, Backend };
    SessionError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

struct SessionInfo {
    std::string id;
    std::size_t vertices{};
    std::size_t faces{};
    MaskType mask_type{MaskType::User};
    bool has_mask{};
    std::vector<Primitive> primitives;
    NormalizeTransform transform;
    std::string prompt;
    std::optional<std::string> result_id;
    bool busy{};

    nlohmann::json to_json() const;
};

class SessionStore {
public:
    SessionStore(InpaintBackend& backend, SessionConfig cfg = {});
    ~SessionStore();

    // Parses and normalizes an OBJ; ObjParseError / GeometryError propagate.
    std::string create_session(std::string_view obj_text);
    std::size_t size() const;
    std::vector<std::string> ids() const;

    SessionInfo info(const std::string& id) const;
    // Replaces the mask; on error the previous mask and previews are kept.
    Previews set_mask(const std::string& id, std::span<const Primitive> primitives);
    Previews set_mask_geometry(const std::string& id, MaskGeometry mask);
    std::optional<Previews> previews(const std::string& id) const;

    EditResult inpaint(const std::string& id, const std::string& prompt, std::uint64_t seed,
                       std::optional<bool> paste_back = std::nullopt);
    std::optional<EditResult> result(const std::string& id) const;

    const SessionConfig& config() const { return cfg_; }

    // Restores sessions saved under cfg.persist_dir; returns how many were loaded.
    std::size_t load_persisted();

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id) const;
    Previews render(const Session& s, const MaskGeometry& mask) const;
    void persist(const Session& s) const;
    std::string register_session(std::shared_ptr<Session> s, std::string id = {});

    InpaintBackend& backend_;
    SessionConfig cfg_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace mvedit
