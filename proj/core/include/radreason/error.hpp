#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radreason {

enum class ErrorKind {
    parse,
    schema,
    reference,
    duplicate,
    unknown_id,
    invalid_params,
    instance_too_large,
    infeasible,
    shape_mismatch,
    unknown_strategy,
    config,
    io,
    usage,
};

/// Machine-readable category name, used as the `error:<category>:` prefix by the CLI.
std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace radreason
