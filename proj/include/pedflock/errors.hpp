#pragma once

#include <stdexcept>
#include <string>

namespace pedflock {

/// Missing or unparseable input; the CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pipeline stage failed; the CLI maps this to exit code 3.
struct StageError : std::runtime_error {
    StageError(std::string stage_name, const std::string& message)
        : std::runtime_error(stage_name + ": " + message), stage(std::move(stage_name)) {}
    std::string stage;
};

}  // namespace pedflock
