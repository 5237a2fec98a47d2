#pragma once

#include <stdexcept>
#include <string>

namespace perish {

// Exit codes shared by the CLI. Library errors map onto these through
// Error::exit_code().
enum class ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kFit = 3,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::kData)
        : std::runtime_error(what), code_(code) {}

    ExitCode exit_code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Malformed input, missing files, inconsistent arguments.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what, ExitCode::kData) {}
};

// Curve or regression could not be fitted.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what, ExitCode::kFit) {}
};

// A loss at or below a learning curve's irreducible term: no finite amount of
// data from that period reaches it.
class SaturationError : public FitError {
public:
    explicit SaturationError(const std::string& what) : FitError(what) {}
};

}  // namespace perish
