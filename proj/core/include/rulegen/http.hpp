// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>

namespace rulegen {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// GET `url` (http:// or https://). Returns nullopt on transport failure.
std::optional<HttpResponse> http_get(const std::string& url,
                                     const std::map<std::string, std::string>& headers = {});

/// POST a JSON body. Returns nullopt on transport failure.
std::optional<HttpResponse> http_post_json(const std::string& url, const std::string& body,
                                           const std::map<std::string, std::string>& headers = {});

}  // namespace rulegen
