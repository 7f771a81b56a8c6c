#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace camref {

/// Malformed embedding/encoder input. `offset` is a 1-based line number for
/// text formats and a byte offset for binary formats.
class ParseError : public std::runtime_error {
public:
    enum class Kind { Header, RowWidth, CameraRange, NonFinite, Truncated, BadNumber };

    ParseError(Kind kind, std::size_t offset, const std::string& what)
        : std::runtime_error(what), kind_(kind), offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A documented precondition was not met by the caller.
class ContractViolation : public std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace camref
