// backend.hpp - inpainting backend contract.
//
// Wire protocol (JSON over HTTP POST):
//   request  {"masked_grid": <base64 PNG>, "mask_grid": <base64 PNG>, "prompt": str,
//             "seed": uint64, "steps": int, "guidance": number | null}
//   response {"grid": <base64 PNG>}
// The mask grid is 8-bit grayscale {0,255}; the result must match the request size.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvedit/image.hpp"

namespace mvedit {

inline constexpr int kDefaultSamplerSteps = 29;

struct BackendRequest {
    std::vector<std::uint8_t> masked_grid_png;
    std::vector<std::uint8_t> mask_grid_png;
    std::string prompt;
    std::uint64_t seed{0};
    int steps{kDefaultSamplerSteps};
    std::optional<double> guidance;  // nullopt = backend default
};

// Decoded and checked request payload; mask is converted to {0,1}.
struct DecodedRequest {
    Image masked;
    Image mask;
};
DecodedRequest decode_request(const BackendRequest& req);

class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& what, int attempts) : std::runtime_error(what), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

class InpaintBackend {
public:
    virtual ~InpaintBackend() = default;
    // Returns the inpainted RGB grid.
    virtual Image inpaint(const BackendRequest& req) = 0;
    virtual std::string name() const = 0;
};

// Deterministic stand-in: unmasked pixels are copied verbatim; masked pixels get
// a smooth pattern seeded by (seed, prompt).
class MockBackend final : public InpaintBackend {
public:
    Image inpaint(const BackendRequest& req) override;
    std::string name() const override { return "mock"; }
};

struct HttpBackendOptions {
    std::string url;  // http://host:port/path
    double timeout_seconds{120.0};
    int retries{2};  // additional attempts after the first
};

class HttpBackend final : public InpaintBackend {
public:
    explicit HttpBackend(HttpBackendOptions opts);
    Image inpaint(const BackendRequest& req) override;
    std::string name() const override { return "http:" + opts_.url; }

private:
    HttpBackendOptions opts_;
};

// "mock" or an http:// URL. Empty falls back to MVEDIT_BACKEND_URL, then mock.
// MVEDIT_BACKEND_TIMEOUT (seconds) overrides the HTTP timeout.
std::unique_ptr<InpaintBackend> make_backend(const std::string& spec);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string request_to_json(const BackendRequest& req);
BackendRequest request_from_json(const std::string& body);
std::string response_to_json(const Image& grid);
Image response_from_json(const std::string& body);

// Serves POST /inpaint with the wire protocol in front of any backend.
class BackendServer {
public:
    explicit BackendServer(InpaintBackend& backend);
    ~BackendServer();
    BackendServer(const BackendServer&) = delete;
    BackendServer& operator=(const BackendServer&) = delete;

    // Binds (port 0 = ephemeral) and serves on a background thread; returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Blocks the calling thread.
    void listen(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mvedit
