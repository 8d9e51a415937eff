#pragma once

#include <stdexcept>
#include <string>

namespace halp {

/// Failure categories. The CLI maps them onto process exit codes.
enum class ErrorKind {
    Config,      ///< malformed input, unknown names, bad flags
    Contract,    ///< caller broke a precondition (missing variable, size mismatch)
    Domain,      ///< argument outside the mathematical domain of a function
    Numeric,     ///< model evaluation produced an invalid value, singular systems
    Capability,  ///< combination that has no closed form or is out of scope
    Resource,    ///< configured memory or size cap exceeded
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::Config, m) {}
};
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& m) : Error(ErrorKind::Contract, m) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error(ErrorKind::Domain, m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorKind::Numeric, m) {}
};
struct CapabilityError : Error {
    explicit CapabilityError(const std::string& m) : Error(ErrorKind::Capability, m) {}
};
struct ResourceError : Error {
    explicit ResourceError(const std::string& m) : Error(ErrorKind::Resource, m) {}
};

}  // namespace halp
