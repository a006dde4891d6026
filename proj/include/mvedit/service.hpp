// service.hpp - HTTP surface of the edit sessions.
//
//   POST /api/session                 body: OBJ text          -> 201 {"id", "vertices", "faces"}
//   GET  /api/session/{id}                                    -> session info
//   PUT  /api/session/{id}/mask       body: {"primitives":[]} -> preview grids
//   GET  /api/session/{id}/preview    [?image=gt|conditioning|preview|mask] -> grids JSON or one PNG
//   POST /api/session/{id}/inpaint    body: {"prompt", "seed", "paste_back"?} -> {"result_id", ...}
//   GET  /api/session/{id}/result     [?image=grid|view0..view3] -> grid + split views + poses
//
// Images inside JSON are base64 PNGs. Errors are {"error": message} with 400
// (bad input), 404 (unknown session / nothing yet), 409 (busy) or 502 (backend).
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mvedit/session.hpp"

namespace mvedit {

class EditService {
public:
    explicit EditService(SessionStore& store, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~EditService();
    EditService(const EditService&) = delete;
    EditService& operator=(const EditService&) = delete;

    // Binds (port 0 = ephemeral), serves on a background thread, returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void listen(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mvedit
