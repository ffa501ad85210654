#include "eds/error.hpp"

namespace eds {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Runtime: return "runtime";
  }
  return "runtime";
}

}  // namespace eds
