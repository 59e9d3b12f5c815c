#include "usckc/error.hpp"

#include <sstream>

namespace usckc {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Validation: return "validation";
        case ErrorKind::CapExceeded: return "cap-exceeded";
        case ErrorKind::AssetLoad: return "asset-load";
    }
    return "unknown";
}

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Validation: return 1;
        case ErrorKind::CapExceeded: return 2;
        case ErrorKind::AssetLoad: return 3;
    }
    return 1;
}

namespace {

std::string describe_cap(std::uint64_t would_be, bool saturated, std::uint64_t cap,
                         const std::vector<std::size_t>& profile) {
    std::ostringstream os;
    os << "chain product ";
    if (saturated)
        os << "overflows 64 bits";
    else
        os << would_be;
    os << " exceeds cap " << cap << " (branch_profile=[";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (i) os << ',';
        os << profile[i];
    }
    os << "])";
    return os.str();
}

// Diagnostics are one line; flatten embedded tabs and newlines.
std::string flatten(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

}  // namespace

CapExceededError::CapExceededError(std::uint64_t would_be, bool saturated, std::uint64_t cap,
                                   std::vector<std::size_t> branch_profile)
    : Error(ErrorKind::CapExceeded, describe_cap(would_be, saturated, cap, branch_profile)),
      would_be_(would_be),
      saturated_(saturated),
      cap_(cap),
      profile_(std::move(branch_profile)) {}

std::string format_diagnostic(const Error& err) {
    std::ostringstream os;
    os << "error\tkind=" << to_string(err.kind());
    if (!err.incident_id().empty()) os << "\tincident=" << flatten(err.incident_id());
    os << "\tmessage=" << flatten(err.message());
    return os.str();
}

}  // namespace usckc
