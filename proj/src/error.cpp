#include "recsmith/error.hpp"

namespace recsmith {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::UnknownModel: return "UnknownModel";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::InvalidThreshold: return "InvalidThreshold";
        case ErrorCode::InvalidPeriod: return "InvalidPeriod";
        case ErrorCode::InvalidRatio: return "InvalidRatio";
        case ErrorCode::InvalidSpace: return "InvalidSpace";
        case ErrorCode::NonFiniteSpace: return "NonFiniteSpace";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::DuplicateHint: return "DuplicateHint";
        case ErrorCode::DuplicateFeatureKey: return "DuplicateFeatureKey";
        case ErrorCode::NonFiniteRating: return "NonFiniteRating";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::NonCategoricalColumn: return "NonCategoricalColumn";
        case ErrorCode::UnseenToken: return "UnseenToken";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::NonBinaryRatings: return "NonBinaryRatings";
        case ErrorCode::UnfittedModel: return "UnfittedModel";
        case ErrorCode::BadModelFile: return "BadModelFile";
        case ErrorCode::AllTrialsFailed: return "AllTrialsFailed";
        case ErrorCode::UnknownMetric: return "UnknownMetric";
        case ErrorCode::MissingInput: return "MissingInput";
        case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
    }
    return "UnknownError";
}

ErrorCategory error_category(ErrorCode code) {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::UnknownModel:
        case ErrorCode::InvalidParameter:
        case ErrorCode::InvalidThreshold:
        case ErrorCode::InvalidPeriod:
        case ErrorCode::InvalidRatio:
        case ErrorCode::InvalidSpace:
        case ErrorCode::NonFiniteSpace:
            return ErrorCategory::Config;
        case ErrorCode::MissingColumn:
        case ErrorCode::DuplicateHint:
        case ErrorCode::DuplicateFeatureKey:
        case ErrorCode::NonFiniteRating:
        case ErrorCode::UnknownColumn:
        case ErrorCode::NonCategoricalColumn:
        case ErrorCode::UnseenToken:
        case ErrorCode::IndexOutOfRange:
        case ErrorCode::ParseError:
        case ErrorCode::IoError:
            return ErrorCategory::Data;
        case ErrorCode::EmptyDataset:
        case ErrorCode::NonBinaryRatings:
        case ErrorCode::UnfittedModel:
        case ErrorCode::BadModelFile:
        case ErrorCode::AllTrialsFailed:
            return ErrorCategory::Model;
        case ErrorCode::UnknownMetric:
        case ErrorCode::MissingInput:
        case ErrorCode::EmptyEvaluation:
            return ErrorCategory::Evaluation;
    }
    return ErrorCategory::Data;
}

}  // namespace recsmith
