// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codeprune {

enum class ErrorKind {
    // checkpoint container
    BadMagic,
    BadManifest,
    ShapeMismatch,
    IoFailure,
    InvalidCheckpoint,
    // tokenizer
    UnknownId,
    ClosureViolation,
    BadFormat,
    // model
    IdOutOfRange,
    SequenceTooLong,
    // objective
    LengthMismatch,
    VocabMismatch,
    EmptyCalibration,
    FingerprintMismatch,
    // pruner
    BadLayerIndex,
    TooFewLayers,
    BadK,
    BadIndexList,
    BadRemap,
    MissingTests,
    // recovery / metrics
    ExecutorUnavailable,
    ZeroSavings,
};

std::string_view error_kind_name(ErrorKind kind);

// True for kinds that stem from reading or writing files (CLI exit status 2).
bool is_io_error(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace codeprune
