#pragma once

#include <stdexcept>
#include <string>

namespace mopo {

/// Violated precondition or type invariant on a library call.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Invalid run configuration (engine refuses to start).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Backend capability failure after retry handling.
struct BackendError : std::runtime_error {
    BackendError(std::string request_id, bool permanent, const std::string& what)
        : std::runtime_error(what), request_id(std::move(request_id)), permanent(permanent) {}

    std::string request_id;
    bool permanent;
};

/// Unreadable or inconsistent persisted run state.
struct CorruptState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mopo
