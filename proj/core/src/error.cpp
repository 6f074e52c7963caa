#include "radreason/error.hpp"

namespace radreason {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::schema: return "schema";
        case ErrorKind::reference: return "reference";
        case ErrorKind::duplicate: return "duplicate";
        case ErrorKind::unknown_id: return "unknown-id";
        case ErrorKind::invalid_params: return "invalid-params";
        case ErrorKind::instance_too_large: return "instance-too-large";
        case ErrorKind::infeasible: return "infeasible";
        case ErrorKind::shape_mismatch: return "shape-mismatch";
        case ErrorKind::unknown_strategy: return "unknown-strategy";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::usage: return "usage";
    }
    return "unknown";
}

}  // namespace radreason
