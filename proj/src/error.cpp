#include "logit_sue/error.hpp"

namespace sue {

ParseError::ParseError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

NoPathError::NoPathError(int origin, int destination)
    : std::runtime_error("no path from node " + std::to_string(origin + 1) + " to node " +
                         std::to_string(destination + 1)),
      origin_(origin),
      destination_(destination) {}

}  // namespace sue
