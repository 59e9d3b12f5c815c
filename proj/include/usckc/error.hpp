#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace usckc {

/// Failure families. Each maps onto one CLI exit code.
enum class ErrorKind {
    Validation,   // exit 1
    CapExceeded,  // exit 2
    AssetLoad,    // exit 3
};

const char* to_string(ErrorKind kind) noexcept;
int exit_code_for(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(message), kind_(kind), message_(std::move(message)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& incident_id() const noexcept { return incident_id_; }

    /// Attach the incident being processed. Keeps the first tag if already set.
    void tag_incident(const std::string& id) {
        if (incident_id_.empty()) incident_id_ = id;
    }

private:
    ErrorKind kind_;
    std::string message_;
    std::string incident_id_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::string message)
        : Error(ErrorKind::Validation, std::move(message)) {}
};

class AssetLoadError : public Error {
public:
    explicit AssetLoadError(std::string message)
        : Error(ErrorKind::AssetLoad, std::move(message)) {}
};

/// Raised before enumeration when the Cartesian product would exceed the cap.
class CapExceededError : public Error {
public:
    CapExceededError(std::uint64_t would_be, bool saturated, std::uint64_t cap,
                     std::vector<std::size_t> branch_profile);

    /// Product of the branch profile; meaningless if saturated() is true.
    std::uint64_t would_be_count() const noexcept { return would_be_; }
    bool saturated() const noexcept { return saturated_; }
    std::uint64_t cap() const noexcept { return cap_; }
    const std::vector<std::size_t>& branch_profile() const noexcept { return profile_; }

private:
    std::uint64_t would_be_;
    bool saturated_;
    std::uint64_t cap_;
    std::vector<std::size_t> profile_;
};

/// One tab-separated diagnostic line, e.g.
///   error<TAB>kind=validation<TAB>incident=rosat-1998<TAB>message=...
std::string format_diagnostic(const Error& err);

}  // namespace usckc
