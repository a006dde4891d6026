#include "mvedit/service.hpp"

#include <thread>

#include "httplib.h"

namespace mvedit {

using json = nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

int status_for(SessionError::Code code) {
    switch (code) {
        case SessionError::Code::NotFound: return 404;
        case SessionError::Code::Busy: return 409;
        case SessionError::Code::NoMask:
        case SessionError::Code::Invalid: return 400;
        case SessionError::Code::Backend: return 502;
    }
    return 500;
}

std::string b64png(const Image& img) { return base64_encode(encode_png(img)); }
std::string b64grid(const MultiviewGrid& g) { return base64_encode(encode_grid_png(g)); }

json previews_json(const Previews& p) {
    return json{{"gt", b64grid(p.gt)},
                {"conditioning", b64grid(p.conditioning)},
                {"preview", b64grid(p.preview)},
                {"mask", b64grid(p.mask)},
                {"poses", json::parse(poses_to_json(p.gt.poses))}};
}

json result_json(const EditResult& r) {
    json views = json::array();
    for (const auto& v : r.views) views.push_back(b64png(v));
    return json{{"result_id", r.id},
                {"grid", b64png(r.grid)},
                {"views", views},
                {"poses", json::parse(poses_to_json(r.poses))},
                {"prompt", r.prompt},
                {"seed", r.seed},
                {"steps", r.steps},
                {"paste_back", r.paste_back},
                {"backend", r.backend},
                {"unmasked_preservation", r.unmasked_preservation ? json(*r.unmasked_preservation) : json(nullptr)},
                {"timing_ms", {{"backend", r.timing.backend_ms}, {"total", r.timing.total_ms}}}};
}

void send_png(httplib::Response& res, const std::vector<std::uint8_t>& png) {
    res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
}

// Runs a handler, mapping exceptions to HTTP errors.
template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const SessionError& e) {
        send_error(res, status_for(e.code()), e.what());
    } catch (const ObjParseError& e) {
        send_json(res, 400, json{{"error", e.what()}, {"line", e.line()}});
    } catch (const json::exception& e) {
        send_error(res, 400, std::string("bad JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
    } catch (const GeometryError& e) {
        send_error(res, 400, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

}  // namespace

struct EditService::Impl {
    SessionStore& store;
    httplib::Server server;
    std::thread thread;

    Impl(SessionStore& s, const std::optional<std::filesystem::path>& static_dir) : store(s) {
        using Req = httplib::Request;
        using Res = httplib::Response;

        server.Post("/api/session", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const auto id = store.create_session(req.body);
                const auto info = store.info(id);
                send_json(res, 201, json{{"id", id}, {"vertices", info.vertices}, {"faces", info.faces}});
            });
        });

        server.Get(R"(/api/session/([^/]+))", [this](const Req& req, Res& res) {
            guarded(res, [&] { send_json(res, 200, store.info(req.matches[1]).to_json()); });
        });

        server.Put(R"(/api/session/([^/]+)/mask)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const auto prims = primitives_from_json(json::parse(req.body));
                send_json(res, 200, previews_json(store.set_mask(req.matches[1], prims)));
            });
        });

        server.Get(R"(/api/session/([^/]+)/preview)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const auto p = store.previews(req.matches[1]);
                if (!p) return send_error(res, 404, "no mask has been set");
                if (!req.has_param("image")) return send_json(res, 200, previews_json(*p));
                const auto which = req.get_param_value("image");
                if (which == "gt") return send_png(res, encode_grid_png(p->gt));
                if (which == "conditioning") return send_png(res, encode_grid_png(p->conditioning));
                if (which == "preview") return send_png(res, encode_grid_png(p->preview));
                if (which == "mask") return send_png(res, encode_grid_png(p->mask));
                send_error(res, 400, "unknown image '" + which + "'");
            });
        });

        server.Post(R"(/api/session/([^/]+)/inpaint)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body.empty() ? "{}" : req.body);
                if (!body.contains("prompt")) throw std::invalid_argument("missing field 'prompt'");
                const auto prompt = body.at("prompt").get<std::string>();
                const auto seed = body.value("seed", std::uint64_t{0});
                std::optional<bool> paste_back;
                if (body.contains("paste_back")) paste_back = body["paste_back"].get<bool>();
                const auto r = store.inpaint(req.matches[1], prompt, seed, paste_back);
                send_json(res, 200,
                          json{{"result_id", r.id},
                               {"unmasked_preservation",
                                r.unmasked_preservation ? json(*r.unmasked_preservation) : json(nullptr)},
                               {"timing_ms", {{"backend", r.timing.backend_ms}, {"total", r.timing.total_ms}}}});
            });
        });

        server.Get(R"(/api/session/([^/]+)/result)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const auto r = store.result(req.matches[1]);
                if (!r) return send_error(res, 404, "no result yet");
                if (!req.has_param("image")) return send_json(res, 200, result_json(*r));
                const auto which = req.get_param_value("image");
                if (which == "grid") return send_png(res, encode_png(r->grid));
                for (int v = 0; v < 4; ++v)
                    if (which == "view" + std::to_string(v))
                        return send_png(res, encode_png(r->views[static_cast<std::size_t>(v)]));
                send_error(res, 400, "unknown image '" + which + "'");
            });
        });

        if (static_dir && !server.set_mount_point("/", static_dir->string()))
            throw std::invalid_argument("static directory not found: " + static_dir->string());
    }
};

EditService::EditService(SessionStore& store, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store, static_dir)) {}

EditService::~EditService() { stop(); }

int EditService::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0)
        bound = impl_->server.bind_to_any_port(host);
    else if (!impl_->server.bind_to_port(host, port))
        bound = -1;
    if (bound < 0) throw std::runtime_error("cannot bind service to " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void EditService::listen(const std::string& host, int port) {
    if (!impl_->server.listen(host, port))
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void EditService::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mvedit
