#include "qconv/error.hpp"

namespace qconv {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Index: return "index";
    case ErrorKind::InvalidGate: return "invalid-gate";
    case ErrorKind::Arity: return "arity";
    case ErrorKind::InvalidObservable: return "invalid-observable";
    case ErrorKind::Config: return "config";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::Step: return "step";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::State: return "state";
    case ErrorKind::Label: return "label";
    case ErrorKind::Format: return "format";
    case ErrorKind::Version: return "version";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Size: return "size";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace qconv
