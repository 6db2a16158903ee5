#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pe/render.hpp"

namespace pe {

/// Base class for remote classifier failures. retryable() is true for
/// transport problems (timeouts, refused or dropped connections).
class RemoteError : public std::runtime_error {
public:
    RemoteError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

class RemoteTimeoutError : public RemoteError {
public:
    explicit RemoteTimeoutError(const std::string& what) : RemoteError(what, true) {}
};

/// The server answered 2xx but the body does not follow the protocol. The
/// raw body is kept for diagnosis.
class RemoteProtocolError : public RemoteError {
public:
    RemoteProtocolError(const std::string& what, std::string payload)
        : RemoteError(what, false), payload_(std::move(payload)) {}
    const std::string& payload() const { return payload_; }

private:
    std::string payload_;
};

class RemoteStatusError : public RemoteError {
public:
    RemoteStatusError(int status, std::string body)
        : RemoteError("remote classifier returned HTTP " + std::to_string(status), status >= 500),
          status_(status), body_(std::move(body)) {}
    int status() const { return status_; }
    const std::string& body() const { return body_; }

private:
    int status_;
    std::string body_;
};

struct RemoteLabel {
    std::string name;
    double score = 0.0;

    bool operator==(const RemoteLabel&) const = default;
};

struct RemoteResult {
    std::vector<RemoteLabel> labels;
    /// True when every score is in [0,1] and the scores sum to 1 within 1e-5.
    bool probabilistic = false;
};

/// POST <endpoint>/classify with {"image_png_base64": ...}; expects
/// {"labels":[{"name":str,"score":float},...]}.
RemoteResult classify_remote(const std::string& endpoint, const RasterImage& image, double timeout_seconds);

/// Parses a response body; throws RemoteProtocolError on schema mismatch.
RemoteResult parse_remote_response(const std::string& body);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace pe
