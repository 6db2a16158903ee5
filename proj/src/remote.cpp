#include "pe/remote.hpp"

#include <chrono>
#include <cmath>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"
#include "pe/image_io.hpp"

namespace pe {

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw std::invalid_argument("base64 input length must be a multiple of 4");
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw std::invalid_argument("malformed base64 input");
    std::size_t size = static_cast<std::size_t>(n);
    // EVP_DecodeBlock counts padding bytes as data.
    for (std::size_t i = text.size(); i > 0 && text[i - 1] == '='; --i) --size;
    out.resize(size);
    return out;
}

RemoteResult parse_remote_response(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw RemoteProtocolError("remote response is not JSON", body);
    if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
        throw RemoteProtocolError("remote response has no 'labels' array", body);
    RemoteResult result;
    double total = 0.0;
    bool in_unit = true;
    for (const auto& item : j["labels"]) {
        if (!item.is_object() || !item.contains("name") || !item["name"].is_string() || !item.contains("score") ||
            !item["score"].is_number())
            throw RemoteProtocolError("remote label entries need a string 'name' and numeric 'score'", body);
        RemoteLabel label{item["name"].get<std::string>(), item["score"].get<double>()};
        if (!std::isfinite(label.score)) throw RemoteProtocolError("remote score is not finite", body);
        in_unit = in_unit && label.score >= 0.0 && label.score <= 1.0;
        total += label.score;
        result.labels.push_back(std::move(label));
    }
    result.probabilistic = !result.labels.empty() && in_unit && std::abs(total - 1.0) <= 1e-5;
    return result;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must be an http(s) URL: " + url);
    const auto slash = url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = url.substr(0, slash);
    e.path = slash == std::string::npos ? "" : url.substr(slash);
    while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
    return e;
}

}  // namespace

RemoteResult classify_remote(const std::string& endpoint, const RasterImage& image, double timeout_seconds) {
    if (!(timeout_seconds > 0.0)) throw std::invalid_argument("timeout must be positive");
    const auto target = split_endpoint(endpoint);

    nlohmann::json request;
    request["image_png_base64"] = base64_encode(encode_png(image));

    httplib::Client client(target.origin);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(target.path + "/classify", request.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        const std::string what = "remote classifier " + endpoint + ": " + httplib::to_string(err);
        switch (err) {
            case httplib::Error::Connection:
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Read:
            case httplib::Error::Write:
                throw RemoteTimeoutError(what);
            default:
                throw RemoteError(what, false);
        }
    }
    if (res->status < 200 || res->status >= 300) throw RemoteStatusError(res->status, res->body);
    return parse_remote_response(res->body);
}

}  // namespace pe
