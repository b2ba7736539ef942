#pragma once

#include <stdexcept>
#include <string>

namespace recsmith {

// Every failure the library can raise, one code per condition. The CLI maps
// categories to process exit codes, so codes must stay stable.
enum class ErrorCode {
    // config / parameters
    ConfigError,
    UnknownModel,
    InvalidParameter,
    InvalidThreshold,
    InvalidPeriod,
    InvalidRatio,
    InvalidSpace,
    NonFiniteSpace,
    // data / schema
    MissingColumn,
    DuplicateHint,
    DuplicateFeatureKey,
    NonFiniteRating,
    UnknownColumn,
    NonCategoricalColumn,
    UnseenToken,
    IndexOutOfRange,
    ParseError,
    IoError,
    // models
    EmptyDataset,
    NonBinaryRatings,
    UnfittedModel,
    BadModelFile,
    AllTrialsFailed,
    // evaluation
    UnknownMetric,
    MissingInput,
    EmptyEvaluation,
};

enum class ErrorCategory { Config = 2, Data = 3, Model = 4, Evaluation = 5 };

const char* error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    ErrorCategory category() const { return error_category(code_); }
    const char* code_name() const { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace recsmith
