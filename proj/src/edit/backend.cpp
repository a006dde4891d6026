#include "mvedit/backend.hpp"

#include <sodium.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mvedit/random.hpp"

namespace mvedit {

using json = nlohmann::json;

namespace {

void ensure_sodium() {
    static const bool ok = sodium_init() >= 0;
    if (!ok) throw std::runtime_error("libsodium initialization failed");
}

struct ParsedUrl {
    std::string origin;  // scheme://host:port
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("backend URL needs a scheme: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http") throw std::invalid_argument("unsupported backend URL scheme '" + scheme + "' (http only)");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/inpaint"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    ensure_sodium();
    const auto variant = sodium_base64_VARIANT_ORIGINAL;
    std::string out(sodium_base64_encoded_len(bytes.size(), variant), '\0');
    sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(), variant);
    out.resize(out.size() - 1);  // drop the terminator
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    ensure_sodium();
    std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), " \r\n", &len, nullptr,
                          sodium_base64_VARIANT_ORIGINAL) != 0)
        throw std::invalid_argument("invalid base64 payload");
    out.resize(len);
    return out;
}

DecodedRequest decode_request(const BackendRequest& req) {
    DecodedRequest out;
    out.masked = decode_png(req.masked_grid_png);
    const Image mask = decode_png(req.mask_grid_png);
    if (mask.channels != 1) throw std::invalid_argument("mask grid must be single-channel");
    if (out.masked.width != mask.width || out.masked.height != mask.height)
        throw std::invalid_argument("masked grid and mask grid dimensions differ");
    out.mask = gray_to_binary(mask);
    return out;
}

std::string request_to_json(const BackendRequest& req) {
    json j{{"masked_grid", base64_encode(req.masked_grid_png)},
           {"mask_grid", base64_encode(req.mask_grid_png)},
           {"prompt", req.prompt},
           {"seed", req.seed},
           {"steps", req.steps},
           {"guidance", nullptr}};
    if (req.guidance) j["guidance"] = *req.guidance;
    return j.dump();
}

BackendRequest request_from_json(const std::string& body) {
    const json j = json::parse(body);
    BackendRequest req;
    req.masked_grid_png = base64_decode(j.at("masked_grid").get<std::string>());
    req.mask_grid_png = base64_decode(j.at("mask_grid").get<std::string>());
    req.prompt = j.value("prompt", std::string{});
    req.seed = j.value("seed", std::uint64_t{0});
    req.steps = j.value("steps", kDefaultSamplerSteps);
    if (j.contains("guidance") && !j["guidance"].is_null()) req.guidance = j["guidance"].get<double>();
    return req;
}

std::string response_to_json(const Image& grid) { return json{{"grid", base64_encode(encode_png(grid))}}.dump(); }

Image response_from_json(const std::string& body) {
    const json j = json::parse(body);
    return decode_png(base64_decode(j.at("grid").get<std::string>()));
}

Image MockBackend::inpaint(const BackendRequest& req) {
    const auto [input, mask] = decode_request(req);
    Image out = input;
    if (out.channels == 1) {
        Image rgb(out.width, out.height, 3);
        for (std::size_t i = 0; i < out.pixel_count(); ++i)
            for (int c = 0; c < 3; ++c) rgb.data[i * 3 + c] = out.data[i];
        out = std::move(rgb);
    }

    // Low-frequency sinusoids per channel; phases and frequencies from the seed.
    Rng rng(mix64(req.seed ^ fnv1a64(req.prompt)));
    std::array<double, 3> fx{}, fy{}, phase{}, base{};
    for (int c = 0; c < 3; ++c) {
        fx[c] = rng.uniform(0.5, 3.0) * 2.0 * kPi / out.width;
        fy[c] = rng.uniform(0.5, 3.0) * 2.0 * kPi / out.height;
        phase[c] = rng.uniform(0.0, 2.0 * kPi);
        base[c] = rng.uniform(60.0, 190.0);
    }
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            if (!mask.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                const double v = base[c] + 60.0 * std::sin(fx[c] * x + fy[c] * y + phase[c]);
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 254L));
            }
        }
    return out;
}

HttpBackend::HttpBackend(HttpBackendOptions opts) : opts_(std::move(opts)) {
    parse_url(opts_.url);
    if (opts_.timeout_seconds <= 0) throw std::invalid_argument("backend timeout must be positive");
    if (opts_.retries < 0) throw std::invalid_argument("backend retries must be non-negative");
}

Image HttpBackend::inpaint(const BackendRequest& req) {
    const auto expected = decode_request(req);
    const auto [origin, path] = parse_url(opts_.url);
    const std::string body = request_to_json(req);

    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(opts_.timeout_seconds);
    const auto usecs = static_cast<time_t>((opts_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    std::string last_error;
    const int attempts = opts_.retries + 1;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 2)));
        auto res = client.Post(path, body, "application/json");
        if (!res) {
            last_error = "backend unreachable: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "backend returned HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("backend rejected the request: HTTP " + std::to_string(res->status) + " " + res->body,
                               attempt);
        Image grid;
        try {
            grid = response_from_json(res->body);
        } catch (const std::exception& e) {
            throw BackendError(std::string("malformed backend response: ") + e.what(), attempt);
        }
        if (grid.width != expected.masked.width || grid.height != expected.masked.height)
            throw BackendError("backend returned " + std::to_string(grid.width) + "x" + std::to_string(grid.height) +
                                   ", expected " + std::to_string(expected.masked.width) + "x" +
                                   std::to_string(expected.masked.height),
                               attempt);
        return grid;
    }
    throw BackendError(last_error + " after " + std::to_string(attempts) + " attempt(s)", attempts);
}

std::unique_ptr<InpaintBackend> make_backend(const std::string& spec) {
    std::string target = spec;
    if (target.empty())
        if (const char* env = std::getenv("MVEDIT_BACKEND_URL")) target = env;
    if (target.empty() || target == "mock") return std::make_unique<MockBackend>();

    HttpBackendOptions opts;
    opts.url = target;
    if (const char* t = std::getenv("MVEDIT_BACKEND_TIMEOUT")) {
        try {
            opts.timeout_seconds = std::stod(t);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("MVEDIT_BACKEND_TIMEOUT is not a number: ") + t);
        }
    }
    return std::make_unique<HttpBackend>(opts);
}

struct BackendServer::Impl {
    InpaintBackend& backend;
    httplib::Server server;
    std::thread thread;

    explicit Impl(InpaintBackend& b) : backend(b) {
        server.Post("/inpaint", [this](const httplib::Request& req, httplib::Response& res) {
            try {
                const auto request = request_from_json(req.body);
                res.set_content(response_to_json(backend.inpaint(request)), "application/json");
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        });
    }
};

BackendServer::BackendServer(InpaintBackend& backend) : impl_(std::make_unique<Impl>(backend)) {}

BackendServer::~BackendServer() { stop(); }

int BackendServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw std::runtime_error("cannot bind backend server to " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void BackendServer::listen(const std::string& host, int port) {
    if (!impl_->server.listen(host, port))
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void BackendServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mvedit
