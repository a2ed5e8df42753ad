#include "ldpr/errors.hpp"

namespace ldpr {

ParseError::ParseError(const std::string& file, std::size_t line,
                       const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

InsufficientTrainingError::InsufficientTrainingError(std::size_t available,
                                                     std::size_t required)
    : Error("insufficient training data: " + std::to_string(available) +
            " instances available, " + std::to_string(required) + " required"),
      available_(available),
      required_(required) {}

}  // namespace ldpr
