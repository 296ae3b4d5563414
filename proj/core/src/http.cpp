// SPDX-License-Identifier: Apache-2.0
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "rulegen/http.hpp"

namespace rulegen {

namespace {

// splits "scheme://host[:port]/path..." into origin + path
bool split_url(const std::string& url, std::string& origin, std::string& path) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        return false;
    }
    std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        origin = url;
        path = "/";
    } else {
        origin = url.substr(0, slash);
        path = url.substr(slash);
    }
    return true;
}

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
    httplib::Headers h;
    for (const auto& [k, v] : headers) {
        h.emplace(k, v);
    }
    return h;
}

}  // namespace

std::optional<HttpResponse> http_get(const std::string& url,
                                     const std::map<std::string, std::string>& headers) {
    std::string origin;
    std::string path;
    if (!split_url(url, origin, path)) {
        return std::nullopt;
    }
    httplib::Client client(origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path, to_headers(headers));
    if (!res) {
        return std::nullopt;
    }
    return HttpResponse{res->status, res->body};
}

std::optional<HttpResponse> http_post_json(const std::string& url, const std::string& body,
                                           const std::map<std::string, std::string>& headers) {
    std::string origin;
    std::string path;
    if (!split_url(url, origin, path)) {
        return std::nullopt;
    }
    httplib::Client client(origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers h = to_headers(headers);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
        return std::nullopt;
    }
    return HttpResponse{res->status, res->body};
}

}  // namespace rulegen
