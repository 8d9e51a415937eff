#include "halp/error.hpp"

namespace halp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Capability: return "capability";
        case ErrorKind::Resource: return "resource";
    }
    return "unknown";
}

}  // namespace halp
